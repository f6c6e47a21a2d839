"""Stepsize and decay schedules with joint summability validation.

Both sequences are power-law decays,

    stepsize(k) = lambda0 / (1 + b_l * k**p)
    decay(k)    = gamma0  / (1 + b_g * k**q),

and the algorithm's guarantees restrict the exponents: convergence needs
sum(decay) and sum(stepsize) to diverge while sum(decay^2) and
sum(stepsize^2 / decay) stay finite; the infinite-horizon privacy budget
additionally needs sum(stepsize^2 / decay^1.5) finite.  For this family the
four convergence conditions reduce to  p <= 1,  1/2 < q <= 1  and
2p - q > 1, and the privacy condition to  2p - 1.5q > 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Schedules", "ScheduleReport", "energy_schedules", "validate_schedules"]


@dataclass(frozen=True)
class Schedules:
    lambda0: float
    b_l: float
    p: float
    gamma0: float
    b_g: float
    q: float

    def __post_init__(self):
        for name in ("lambda0", "b_l", "p", "gamma0", "b_g", "q"):
            if getattr(self, name) <= 0:
                raise ValueError(f"schedule parameter {name} must be positive")

    def stepsize(self, k: int) -> float:
        return self.lambda0 / (1.0 + self.b_l * k**self.p)

    def decay(self, k: int) -> float:
        return self.gamma0 / (1.0 + self.b_g * k**self.q)

    def stepsize_array(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return self.lambda0 / (1.0 + self.b_l * ks**self.p)

    def decay_array(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return self.gamma0 / (1.0 + self.b_g * ks**self.q)


@dataclass(frozen=True)
class ScheduleReport:
    convergence_ok: bool
    privacy_ok: bool
    violations: tuple[str, ...]

    def __str__(self) -> str:
        lines = [
            f"convergence_ok: {self.convergence_ok}",
            f"privacy_ok:     {self.privacy_ok}",
        ]
        lines += [f"violated: {v}" for v in self.violations]
        return "\n".join(lines)


def validate_schedules(s: Schedules) -> ScheduleReport:
    """Map the summability conditions onto exponent inequalities.

    Reports the convergence flag, the (stricter) privacy flag and the name of
    every violated condition.
    """
    violations: list[str] = []
    if s.p > 1.0:
        violations.append("sum(stepsize) = inf requires p <= 1")
    if s.q > 1.0:
        violations.append("sum(decay) = inf requires q <= 1")
    if 2.0 * s.q <= 1.0:
        violations.append("sum(decay^2) < inf requires q > 1/2")
    if 2.0 * s.p - s.q <= 1.0:
        violations.append("sum(stepsize^2 / decay) < inf requires 2p - q > 1")
    convergence_ok = not violations
    privacy_violations = list(violations)
    if 2.0 * s.p - 1.5 * s.q <= 1.0:
        privacy_violations.append(
            "summable per-iteration privacy loss requires 2p - 1.5q > 1"
        )
    return ScheduleReport(
        convergence_ok=convergence_ok,
        privacy_ok=not privacy_violations,
        violations=tuple(privacy_violations),
    )


def energy_schedules() -> Schedules:
    """Schedules of the bundled energy experiment: 0.03/(1+0.01 k^0.95) and
    1.2/(1+0.12 k^0.55)."""
    return Schedules(lambda0=0.03, b_l=0.01, p=0.95, gamma0=1.2, b_g=0.12, q=0.55)
