"""Least-squares fits of error metrics against schedule-ratio envelopes.

Diagnostic only: fits metric_k = C * (stepsize_k / decay_k)**e with e = 1 or
e = 2 over a window, reporting the constant, a normalized residual and the
pointwise metric/envelope ratios (whose boundedness is the qualitative decay
claim being probed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schedules import Schedules

__all__ = ["RATE_MODELS", "RateFit", "fit_rate"]

RATE_MODELS = {"lambda_over_gamma": 1, "lambda_over_gamma_sq": 2}


@dataclass(frozen=True, eq=False)
class RateFit:
    model: str
    constant: float
    residual: float  # RMS misfit / RMS metric over the window
    window: tuple[int, int]
    ratios: np.ndarray  # metric / envelope, one entry per window iteration

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())


def fit_rate(
    metric: np.ndarray,
    s: Schedules,
    model: str,
    window: tuple[int, int] | None = None,
) -> RateFit:
    """Fit ``metric[k] ~= C * (stepsize_k/decay_k)**e`` by least squares.

    ``metric`` is indexed by iteration.  The window defaults to the full
    range; entries must be positive after the transient for the ratios to be
    meaningful.
    """
    if model not in RATE_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(RATE_MODELS)}")
    metric = np.asarray(metric, dtype=float)
    if metric.ndim != 1 or metric.size < 2:
        raise ValueError("metric must be a 1-d sequence with at least two entries")
    lo, hi = window if window is not None else (0, metric.size - 1)
    if not (0 <= lo < hi < metric.size):
        raise ValueError(f"window {(lo, hi)} out of range for {metric.size} entries")
    ks = np.arange(lo, hi + 1)
    m = metric[lo : hi + 1]
    if np.any(~np.isfinite(m)):
        raise ValueError("metric contains non-finite values inside the window")
    expo = RATE_MODELS[model]
    g = (s.stepsize_array(ks) / s.decay_array(ks)) ** expo
    denom = float(np.dot(g, g))
    if denom == 0.0:
        raise ValueError("degenerate envelope over the window")
    c = float(np.dot(m, g) / denom)
    rms_m = float(np.sqrt(np.mean(m**2)))
    if rms_m == 0.0:
        raise ValueError("degenerate (all-zero) metric over the window")
    residual = float(np.sqrt(np.mean((m - c * g) ** 2)) / rms_m)
    return RateFit(model=model, constant=c, residual=residual, window=(lo, hi), ratios=m / g)
