"""Differential-privacy accounting for the broadcast stream.

The observable output of a run is the message sequence (including silences).
For two adjacent games (identical except one player's cost, with gradients
agreeing in a ball around the equilibrium) the per-iteration privacy loss is

    delta_k = (sigma/(1-a) * sqrt(2c/(e*gamma_k)) + 1/d) * C * lam_k^2 / gamma_k

where C bounds the coupled estimate gap via  |y - y'| <= C * lam_k^2/gamma_k.
Each iteration is (0, delta_k)-differentially private and budgets compose
additively; the infinite-horizon budget is finite iff lam^2/gamma^(3/2) is
summable.

C is never published for concrete games, so the module estimates it
empirically: run the game and its adjacent perturbation with *shared* random
streams and identical initials, and track the perturbed player's estimate gap
against the envelope lam^2/gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .games import GameInstance, GradientField, make_game
from .mechanism import MechanismParams
from .schedules import Schedules, validate_schedules
from .seeker import Trajectory, run
from .topology import Topology

__all__ = [
    "AdjacencySpec",
    "CTildeEstimate",
    "CumulativeDeltaReport",
    "PrivacyLedger",
    "cumulative_delta",
    "delta_per_iteration",
    "delta_series",
    "estimate_c_tilde",
    "make_adjacent",
]


def _bracket(s: Schedules, p: MechanismParams, k_arr: np.ndarray) -> np.ndarray:
    gam = s.decay_array(k_arr)
    return p.sigma / (1.0 - p.a) * np.sqrt(2.0 * p.c / (math.e * gam)) + 1.0 / p.d


def delta_per_iteration(s: Schedules, p: MechanismParams, c_tilde: float, k: int) -> float:
    """Closed-form per-iteration privacy loss delta_k (meaningful only in
    (0,1); callers should treat values >= 1 as a vacuous guarantee)."""
    if c_tilde <= 0:
        raise ValueError("c_tilde must be positive")
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    lam = s.stepsize(k)
    gam = s.decay(k)
    bracket = p.sigma / (1.0 - p.a) * math.sqrt(2.0 * p.c / (math.e * gam)) + 1.0 / p.d
    return bracket * c_tilde * lam * lam / gam


def delta_series(s: Schedules, p: MechanismParams, c_tilde: float, T: int) -> np.ndarray:
    """Vector of delta_k for k = 0..T."""
    if c_tilde <= 0:
        raise ValueError("c_tilde must be positive")
    ks = np.arange(T + 1)
    lam = s.stepsize_array(ks)
    gam = s.decay_array(ks)
    return _bracket(s, p, ks) * c_tilde * lam**2 / gam


@dataclass(frozen=True)
class CumulativeDeltaReport:
    """Composite budget over iterations 0..T plus an infinite-horizon bound.

    ``tail_bound`` bounds the sum over all k > T by integral comparison; it is
    infinite when the schedules fail the summability condition.
    """

    T: int
    total: float
    tail_bound: float

    @property
    def converges(self) -> bool:
        return math.isfinite(self.tail_bound)

    @property
    def infinite_horizon_bound(self) -> float:
        return self.total + self.tail_bound


def _tail_bound(s: Schedules, p: MechanismParams, c_tilde: float, start: int) -> float:
    """Integral-comparison bound on sum_{k >= start} delta_k.

    Uses stepsize(k) <= lambda0/(b_l k^p) and decay(k) >= gamma0/((1+b_g) k^q)
    for k >= 1, giving two power tails with exponents 2p - 1.5q and 2p - q.
    """
    e1 = 2.0 * s.p - 1.5 * s.q
    e2 = 2.0 * s.p - s.q
    if e1 <= 1.0:  # the slower tail already diverges
        return math.inf
    lam_c = s.lambda0 / s.b_l
    gam_c = s.gamma0 / (1.0 + s.b_g)
    a1 = (
        p.sigma / (1.0 - p.a)
        * math.sqrt(2.0 * p.c / math.e)
        * c_tilde
        * lam_c**2
        / gam_c**1.5
    )
    a2 = c_tilde * lam_c**2 / (p.d * gam_c)

    def power_tail(coef: float, expo: float, k0: int) -> float:
        return coef * (k0 ** (-expo) + k0 ** (1.0 - expo) / (expo - 1.0))

    k0 = max(start, 1)
    return power_tail(a1, e1, k0) + power_tail(a2, e2, k0)


def cumulative_delta(
    s: Schedules, p: MechanismParams, c_tilde: float, T: int
) -> CumulativeDeltaReport:
    """Sum of delta_k over k = 0..T plus the infinite-horizon tail bound."""
    total = float(delta_series(s, p, c_tilde, T).sum())
    return CumulativeDeltaReport(T=T, total=total, tail_bound=_tail_bound(s, p, c_tilde, T + 1))


@dataclass
class PrivacyLedger:
    """Accumulating record of per-iteration losses and the running budget."""

    c_tilde: float
    per_iter_delta: list[float]
    cumulative: list[float]
    sensitivity_bound: list[float]

    @classmethod
    def accumulate(
        cls, s: Schedules, p: MechanismParams, c_tilde: float, T: int
    ) -> "PrivacyLedger":
        ks = np.arange(T + 1)
        lam = s.stepsize_array(ks)
        gam = s.decay_array(ks)
        sens = c_tilde * lam**2 / gam
        deltas = _bracket(s, p, ks) * sens
        bad = np.flatnonzero((deltas <= 0.0) | (deltas >= 1.0))
        if bad.size:
            raise ValueError(
                f"per-iteration privacy loss leaves (0,1) at k={int(bad[0])}: "
                f"delta={deltas[bad[0]]:.6g}"
            )
        return cls(
            c_tilde=c_tilde,
            per_iter_delta=list(map(float, deltas)),
            cumulative=list(map(float, np.cumsum(deltas))),
            sensitivity_bound=list(map(float, sens)),
        )


@dataclass(frozen=True)
class AdjacencySpec:
    """Perturbation defining an adjacent game.

    Player ``perturbed_player``'s gradient field gains
    ``kappa * ramp(|x - x_star| - alpha)`` with ramp(t) = t^2 for t > 0 and 0
    otherwise, so both games have identical gradients inside the radius-alpha
    ball around that player's equilibrium decision and differ smoothly
    outside.
    """

    perturbed_player: int
    alpha: float
    kappa: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def _ramp(t: float) -> float:
    return t * t if t > 0.0 else 0.0


def make_adjacent(game: GameInstance, spec: AdjacencySpec, ne: Sequence[float]) -> GameInstance:
    """Game identical to ``game`` except for the perturbed player's gradient.

    The perturbed field F'(x, u) = F(x, u) + kappa * ramp(|x - x_star| - alpha)
    equals F exactly on the ball B_alpha(x_star).
    """
    i = spec.perturbed_player
    if not (0 <= i < game.n_players):
        raise ValueError(f"perturbed player {i} out of range")
    x_star = float(np.asarray(ne, dtype=float)[i])
    base = game.gradient_fields[i]
    kappa, alpha = spec.kappa, spec.alpha

    def perturbed(x: float, u: float, _base: GradientField = base) -> float:
        return _base(x, u) + kappa * _ramp(abs(x - x_star) - alpha)

    fields = list(game.gradient_fields)
    fields[i] = perturbed
    return make_game(game.lower, game.upper, fields)


@dataclass(frozen=True, eq=False)
class CTildeEstimate:
    """Empirical envelope constant from coupled adjacent runs.

    ``value`` is the max over seeds and k >= 1 of |y_i - y_i'| * gamma_k /
    lambda_k^2 for the perturbed player i; ``ratio_traces`` holds the full
    per-seed ratio sequences.
    """

    value: float
    seeds: tuple[int, ...]
    ratio_traces: tuple[np.ndarray, ...]

    @property
    def argmax(self) -> tuple[int, int]:
        """(seed, iteration) where the envelope constant is attained."""
        best = (0, 1)
        best_val = -math.inf
        for seed, trace in zip(self.seeds, self.ratio_traces):
            k = int(np.argmax(trace))
            if trace[k] > best_val:
                best_val = float(trace[k])
                best = (seed, k + 1)  # traces start at k = 1
        return best


def coupled_gap_trace(
    game: GameInstance,
    adjacent: GameInstance,
    topo: Topology,
    params: MechanismParams,
    s: Schedules,
    T: int,
    seed: int,
    player: int,
    init: np.ndarray | str = "uniform",
) -> tuple[np.ndarray, Trajectory, Trajectory]:
    """Run the coupled pair under shared streams and identical initials;
    returns |y_i^k - y_i'^k| for k = 0..T plus both trajectories."""
    base = run(game, topo, params, s, T, init=init, seed=seed)
    pert = run(adjacent, topo, params, s, T, init=init, seed=seed)
    gap = np.abs(base.y[:, player] - pert.y[:, player])
    return gap, base, pert


def estimate_c_tilde(
    game: GameInstance,
    adjacent: GameInstance,
    topo: Topology,
    params: MechanismParams,
    s: Schedules,
    T: int,
    seeds: Iterable[int],
    player: int,
    init: np.ndarray | str = "uniform",
) -> CTildeEstimate:
    """Estimate the sensitivity envelope constant from coupled runs.

    Both games run with the same seed (hence identical trigger/quantizer
    draws and identical uniform initials); only the perturbed player's
    estimate can drift, and the max of |y - y'| * gamma_k / lambda_k^2 over
    seeds and k >= 1 is the empirical envelope constant.
    """
    seeds = tuple(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    ks = np.arange(1, T + 1)
    envelope = s.stepsize_array(ks) ** 2 / s.decay_array(ks)
    traces = []
    best = 0.0
    for seed in seeds:
        gap, base, pert = coupled_gap_trace(
            game, adjacent, topo, params, s, T, seed, player, init
        )
        if not (np.all(np.isfinite(base.y)) and np.all(np.isfinite(pert.y))):
            raise ValueError(f"coupled trajectories diverged for seed {seed}")
        ratios = gap[1:] / envelope
        traces.append(ratios)
        best = max(best, float(ratios.max()))
    return CTildeEstimate(value=best, seeds=seeds, ratio_traces=tuple(traces))
