"""Honest-but-curious eavesdropper inferring a player's cost gradient.

The attacker sees the broadcast stream only (messages and silences) but knows
the algorithm, the topology and the schedules.  It keeps the latest observed
message of every player (holding values across silences), inverts the
estimate-update equation to recover the target's decision increment,

    dx_hat_k = yhat_k+1 - yhat_k - gamma_k * sum_j w_ij (yhat_j - yhat_i),

and divides by the stepsize to read off the gradient (projection assumed
inactive).  When the mechanism is disabled (raw broadcast every iteration)
this inversion is exact wherever the projection really was inactive; the
privacy mechanism is what makes it fail.

This estimator is this package's construction for evaluating leakage; it is
one concrete realization of an eavesdropper, not an optimal attack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .games import GameInstance
from .schedules import Schedules
from .seeker import ObservationRecord, Trajectory
from .topology import Topology

__all__ = ["AttackReport", "infer_gradient"]


@dataclass(frozen=True, eq=False)
class AttackReport:
    """Per-iteration inference against ground truth for one target player."""

    target: int
    iters: np.ndarray
    inferred: np.ndarray
    truth: np.ndarray
    abs_error: np.ndarray

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Absolute errors restricted to iterations lo..hi (inclusive)."""
        mask = (self.iters >= lo) & (self.iters <= hi)
        return self.abs_error[mask]

    def median_error(self, lo: int, hi: int) -> float:
        return float(np.median(self.window(lo, hi)))

    def mean_error(self, lo: int, hi: int) -> float:
        return float(np.mean(self.window(lo, hi)))


def infer_gradient(
    observations: Iterable[ObservationRecord],
    topo: Topology,
    s: Schedules,
    target: int,
    trajectory: Trajectory,
    game: GameInstance,
) -> AttackReport:
    """Run the eavesdropper over a completed run's observation stream.

    ``trajectory`` and ``game`` supply the ground truth used only to score the
    attack: the true gradient is evaluated on the target's actual decision and
    estimate.  The trajectory must store every iterate.

    Returns inferences for k = 0..T-2 (the inversion needs the k+1 message
    state).
    """
    records = list(observations)
    if not records:
        raise ValueError("empty observation stream")
    if not (0 <= target < topo.n):
        raise ValueError(f"target player {target} out of range")
    horizon = max(rec.k for rec in records) + 1
    if trajectory.x.shape[0] != horizon + 1 or not np.array_equal(
        trajectory.iters, np.arange(horizon + 1)
    ):
        raise ValueError("attack needs a trajectory stored at every iteration")

    messages = np.full((horizon, topo.n), np.nan)
    for rec in records:
        if rec.fired:
            messages[rec.k, rec.player] = rec.message

    # hold-last-message state: yhat[k, j] = latest message of j among rounds <= k
    yhat = messages.copy()
    for k in range(1, horizon):
        stale = np.isnan(yhat[k])
        yhat[k, stale] = yhat[k - 1, stale]
    if np.isnan(yhat[0]).any():
        raise ValueError("round 0 must contain a broadcast from every player")

    weights = topo.weights[target]
    lam = s.stepsize_array(np.arange(horizon - 1))
    gam = s.decay_array(np.arange(horizon - 1))
    if np.any(lam == 0.0):
        raise ValueError("stepsize vanished; gradient inversion undefined")
    # row of the weight matrix has zero sum, so the mixing term reduces to a
    # plain dot product with the held estimates
    mixing = yhat[:-1] @ weights
    dx_hat = yhat[1:, target] - yhat[:-1, target] - gam * mixing
    inferred = -dx_hat / lam

    ks = np.arange(horizon - 1)
    field = game.gradient_fields[target]
    truth = np.array(
        [field(float(trajectory.x[k, target]), float(trajectory.y[k, target])) for k in ks]
    )
    return AttackReport(
        target=target,
        iters=ks,
        inferred=inferred,
        truth=truth,
        abs_error=np.abs(inferred - truth),
    )
