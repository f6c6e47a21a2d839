"""Dual-randomness communication mechanism.

Two independent sources of randomness protect a broadcast value: a stochastic
event-trigger that fires with probability growing in the gap between the
current estimate and the last broadcast (temporal privacy), and a stochastic
quantizer that rounds the sent value to a lattice of spacing d, unbiasedly
(numerical privacy).

The trigger draws xi ~ Uniform(a, 1) and fires iff

    xi > sigma * exp(-c * rho**2 / gamma_k),

where rho is the stored-minus-current gap and gamma_k the decay factor of the
current iteration.  Since sigma > 1, a player whose estimate matches its last
broadcast (rho = 0) never fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "MechanismParams",
    "QuantizationSample",
    "TriggerState",
    "mechanism_step",
    "stochastic_quantize",
    "trigger_decide",
    "trigger_probability",
]


@dataclass(frozen=True)
class MechanismParams:
    """Trigger parameters (sigma, a, c) and quantization interval d.

    sigma : threshold scale, > 1 (guarantees silence at zero gap).
    a     : lower endpoint of the uniform trigger draw, in (0, 1).
    c     : trigger threshold tuning coefficient, > 0 (larger fires sooner).
    d     : quantizer lattice spacing, > 0 (larger hides more).
    """

    sigma: float
    a: float
    c: float
    d: float

    def __post_init__(self):
        if self.sigma <= 1.0:
            raise ValueError("sigma must exceed 1")
        if not (0.0 < self.a < 1.0):
            raise ValueError("a must lie in (0, 1)")
        if self.c <= 0.0:
            raise ValueError("c must be positive")
        if self.d <= 0.0:
            raise ValueError("d must be positive")

    def xi_from_uniform(self, u: float) -> float:
        """Map a uniform [0,1) draw onto the trigger support [a, 1)."""
        return self.a + (1.0 - self.a) * u


@dataclass(frozen=True)
class TriggerState:
    """Per-player trigger bookkeeping.

    tau    : iteration index of the last broadcast (0 before the first one).
    stored : the value broadcast at tau, a lattice point of the quantizer.
    rho    : last computed trigger gap, stored - current estimate.
    """

    tau: int
    stored: float
    rho: float


@dataclass(frozen=True)
class QuantizationSample:
    """One quantizer evaluation: the input, the emitted lattice point and the
    signed error (output - input, always inside (-d, d))."""

    input: float
    output: float
    error: float


def stochastic_quantize(v: float, d: float, rng_draw: float) -> QuantizationSample:
    """Randomly round ``v`` to the lattice {n*d : n in Z}, unbiasedly.

    Writing v = n*d + z with n = floor(v/d) and z in [0, d), the output is
    (n+1)*d with probability z/d and n*d otherwise; ``rng_draw`` (uniform in
    [0,1)) decides.  Exact multiples are returned with probability one.
    """
    if d <= 0.0:
        raise ValueError("quantization interval must be positive")
    if not math.isfinite(v):
        raise ValueError(f"cannot quantize non-finite value {v}")
    n = math.floor(v / d)
    z = v - n * d
    if z >= d:  # floor rounding glitch for v barely below a lattice point
        n += 1
        z = 0.0
    out = (n + 1) * d if rng_draw < z / d else n * d
    return QuantizationSample(input=v, output=out, error=out - v)


def _threshold(rho: float, gamma_k: float, p: MechanismParams) -> float:
    if gamma_k <= 0.0:
        raise ValueError("decay factor must be positive")
    return p.sigma * math.exp(-p.c * rho * rho / gamma_k)


def trigger_probability(rho: float, gamma_k: float, p: MechanismParams) -> float:
    """Closed-form firing probability of the trigger at gap ``rho``.

    Equals (1 - max(a, sigma*exp(-c rho^2/gamma))) / (1 - a) clipped to
    [0, 1]: exactly 0 while the threshold exceeds 1 (in particular at
    rho = 0) and exactly 1 once the threshold falls below a.
    """
    thr = _threshold(rho, gamma_k, p)
    if thr >= 1.0:
        return 0.0
    return (1.0 - max(p.a, thr)) / (1.0 - p.a)


def trigger_decide(rho: float, gamma_k: float, p: MechanismParams, xi_draw: float) -> bool:
    """Evaluate the trigger with an explicit draw ``xi_draw`` from [a, 1).

    Over xi ~ Uniform(a, 1) the firing frequency equals
    :func:`trigger_probability`.
    """
    if not (p.a <= xi_draw < 1.0):
        raise ValueError(f"xi draw {xi_draw} outside [a, 1)")
    return xi_draw > _threshold(rho, gamma_k, p)


def mechanism_step(
    state: TriggerState,
    y_current: float,
    k: int,
    gamma_k: float,
    p: MechanismParams,
    u_trigger: float,
    u_quantizer: float,
) -> tuple[bool, float | None, TriggerState]:
    """One trigger-and-quantize round for a single player at iteration k >= 1.

    Computes the gap rho = stored - y_current, draws the trigger and, on
    firing, quantizes ``y_current``; the fresh lattice point becomes both the
    broadcast message and the new stored value.  On silence the state is
    unchanged except for the recorded rho.

    ``u_trigger`` and ``u_quantizer`` are this (player, iteration)'s uniform
    draws from the respective channels.

    Returns ``(fired, message_or_None, new_state)``.
    """
    if k < 1:
        raise ValueError("iteration 0 bypasses the trigger; start at k = 1")
    rho = state.stored - y_current
    xi = p.xi_from_uniform(u_trigger)
    if trigger_decide(rho, gamma_k, p, xi):
        sample = stochastic_quantize(y_current, p.d, u_quantizer)
        return True, sample.output, TriggerState(tau=k, stored=sample.output, rho=rho)
    return False, None, TriggerState(tau=state.tau, stored=state.stored, rho=rho)
