"""Aggregative games on interval decision sets.

Each of the N players controls a scalar decision x_i constrained to a closed
interval, and its cost depends on x_i and on the average u = mean(x) of all
decisions.  The game is described to the solver through the partial-gradient
fields F_i(x_i, u); the stacked map phi(x) = (F_1(x_1, mean x), ...) vanishes
exactly at the Nash equilibrium when it is strictly monotone.

A built-in quadratic family (separable quadratic cost plus a linear price in
the aggregate) comes with an exact linear-system oracle for the equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

GradientField = Callable[[float, float], float]

__all__ = [
    "ActiveConstraintError",
    "GameInstance",
    "MonotonicityReport",
    "QuadraticAggregativeGame",
    "check_monotonicity",
    "energy_game",
    "make_game",
    "ne_oracle_quadratic",
    "project",
    "pseudo_gradient",
]


class ActiveConstraintError(RuntimeError):
    """The unconstrained equilibrium violates a decision interval."""


def project(interval: Sequence[float], v: float) -> float:
    """Euclidean projection of ``v`` onto the closed interval ``[lo, hi]``.

    Idempotent and nonexpansive; raises ``ValueError`` on an empty interval.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        raise ValueError(f"empty interval: lo={lo} > hi={hi}")
    return min(max(v, lo), hi)


@dataclass(frozen=True, eq=False)
class GameInstance:
    """An aggregative game ready for distributed equilibrium seeking.

    Attributes
    ----------
    n_players : int
        Number of players N.
    lower, upper : ndarray, shape (N,)
        Interval bounds of the decision sets.
    gradient_fields : tuple of callables
        ``gradient_fields[i](x_i, u)`` is the partial gradient of player i's
        cost at decision ``x_i`` when the decision average equals ``u``.
    lipschitz_l : float
        Lipschitz constant of each field with respect to the aggregate
        argument ``u`` (supplied or estimated on a grid).
    grad_bound_eta : float
        Uniform bound on ``|gradient_fields[i]|`` over the feasible box
        (supplied or estimated on a grid).
    aggregate_lo, aggregate_hi : float
        Interval of feasible decision averages (the mean of the per-player
        bounds; Minkowski average of the decision sets).
    """

    n_players: int
    lower: np.ndarray
    upper: np.ndarray
    gradient_fields: tuple[GradientField, ...]
    lipschitz_l: float
    grad_bound_eta: float
    aggregate_lo: float
    aggregate_hi: float

    def interval(self, i: int) -> tuple[float, float]:
        return float(self.lower[i]), float(self.upper[i])

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


def _estimate_bounds(
    lower: np.ndarray,
    upper: np.ndarray,
    fields: Sequence[GradientField],
    grid: int,
    margin: float,
) -> tuple[float, float]:
    """Grid estimates of the gradient bound and the aggregate-Lipschitz constant.

    Uses a ``grid`` x ``grid`` sample of each decision interval against the
    aggregate interval and inflates both maxima by ``margin``.
    """
    agg_lo, agg_hi = float(np.mean(lower)), float(np.mean(upper))
    us = np.linspace(agg_lo, agg_hi, grid)
    du = us[1] - us[0] if grid > 1 else 1.0
    eta = 0.0
    lip = 0.0
    for i, field in enumerate(fields):
        xs = np.linspace(lower[i], upper[i], grid)
        vals = np.array([[field(float(x), float(u)) for u in us] for x in xs])
        eta = max(eta, float(np.abs(vals).max()))
        if grid > 1:
            slopes = np.abs(np.diff(vals, axis=1)) / du
            lip = max(lip, float(slopes.max()))
    return margin * lip, margin * eta


def make_game(
    lower: Sequence[float],
    upper: Sequence[float],
    gradient_fields: Sequence[GradientField],
    lipschitz_l: float | None = None,
    grad_bound_eta: float | None = None,
    grid: int = 64,
    margin: float = 1.1,
) -> GameInstance:
    """Assemble a :class:`GameInstance`, estimating missing constants.

    ``lipschitz_l`` and ``grad_bound_eta`` default to grid maxima over the
    feasible box inflated by 10%; pass explicit values to override.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("lower/upper must be 1-d arrays of equal length")
    if np.any(lower >= upper):
        raise ValueError("every decision interval needs lo < hi")
    n = lower.size
    if len(gradient_fields) != n:
        raise ValueError(f"expected {n} gradient fields, got {len(gradient_fields)}")
    if lipschitz_l is None or grad_bound_eta is None:
        est_l, est_eta = _estimate_bounds(lower, upper, gradient_fields, grid, margin)
        lipschitz_l = est_l if lipschitz_l is None else lipschitz_l
        grad_bound_eta = est_eta if grad_bound_eta is None else grad_bound_eta
    if lipschitz_l <= 0 or grad_bound_eta <= 0:
        raise ValueError("lipschitz_l and grad_bound_eta must be positive")
    return GameInstance(
        n_players=n,
        lower=lower,
        upper=upper,
        gradient_fields=tuple(gradient_fields),
        lipschitz_l=float(lipschitz_l),
        grad_bound_eta=float(grad_bound_eta),
        aggregate_lo=float(np.mean(lower)),
        aggregate_hi=float(np.mean(upper)),
    )


def pseudo_gradient(game: GameInstance, x: Sequence[float]) -> np.ndarray:
    """Evaluate phi(x): component i is ``F_i(x_i, mean(x))``.

    ``x`` must lie in the feasible box up to a 1e-9 tolerance.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (game.n_players,):
        raise ValueError(f"expected {game.n_players} decisions, got shape {x.shape}")
    if not game.contains(x):
        raise ValueError("decision profile outside the feasible box")
    u = float(x.mean())
    return np.array([f(float(xi), u) for f, xi in zip(game.gradient_fields, x)])


@dataclass(frozen=True, eq=False)
class QuadraticAggregativeGame:
    """Quadratic game: cost_i = (x_i - target_i)^2 + (coupling * sum(x) + offset) * x_i.

    The gradient field includes the own-decision term ``coupling * x_i`` from
    the price product, so phi(x) equals the exact game gradient and the
    equilibrium is characterised by phi(x) = 0.  User-supplied games must
    follow the same total-derivative convention.
    """

    targets: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    coupling: float
    offset: float

    def __post_init__(self):
        for name in ("targets", "lower", "upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if not (self.targets.shape == self.lower.shape == self.upper.shape):
            raise ValueError("targets/lower/upper must share one shape")

    @property
    def n_players(self) -> int:
        return self.targets.size

    def gradient_field(self, i: int) -> GradientField:
        """Partial gradient of player i's cost as a function of (x_i, mean x)."""
        target = float(self.targets[i])
        beta = self.coupling
        n = self.n_players
        p = self.offset

        def field(x: float, u: float) -> float:
            return 2.0 * (x - target) + beta * x + beta * n * u + p

        return field

    def cost(self, i: int, x: Sequence[float]) -> float:
        """Full cost of player i at the decision profile ``x``."""
        x = np.asarray(x, dtype=float)
        return float((x[i] - self.targets[i]) ** 2 + (self.coupling * x.sum() + self.offset) * x[i])

    def instance(self, **kwargs) -> GameInstance:
        fields = tuple(self.gradient_field(i) for i in range(self.n_players))
        return make_game(self.lower, self.upper, fields, **kwargs)


def energy_game() -> QuadraticAggregativeGame:
    """Five-player energy consumption game used by the bundled experiment."""
    return QuadraticAggregativeGame(
        targets=[50.0, 55.0, 60.0, 65.0, 70.0],
        lower=[40.0, 44.0, 48.0, 54.0, 58.0],
        upper=[45.0, 49.0, 53.0, 59.0, 63.0],
        coupling=0.04,
        offset=5.0,
    )


def ne_oracle_quadratic(game: QuadraticAggregativeGame) -> np.ndarray:
    """Exact Nash equilibrium of the quadratic family.

    Solves the linear system ``(2 + coupling) x_i + coupling * sum(x) =
    2 target_i - offset``.  Raises :class:`ActiveConstraintError` if any
    component leaves its interval, in which case the unconstrained oracle is
    not the constrained equilibrium.
    """
    n = game.n_players
    a = (2.0 + game.coupling) * np.eye(n) + game.coupling * np.ones((n, n))
    rhs = 2.0 * game.targets - game.offset
    try:
        x = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular equilibrium system: {exc}") from exc
    if np.any(x < game.lower) or np.any(x > game.upper):
        raise ActiveConstraintError(
            "unconstrained equilibrium violates a decision interval; "
            f"solution {x} outside bounds"
        )
    return x


@dataclass(frozen=True)
class MonotonicityReport:
    """Sampling probe of strict monotonicity of the pseudo-gradient map."""

    samples: int
    min_inner: float
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_monotonicity(
    game: GameInstance, samples: int, rng: np.random.Generator
) -> MonotonicityReport:
    """Probe ``<phi(x) - phi(x'), x - x'> > 0`` on random pairs in the box.

    A report, not a proof: draws ``samples`` pairs x != x', evaluates the
    inner product and counts nonpositive values.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    span = game.upper - game.lower
    min_inner = np.inf
    violations = 0
    for _ in range(samples):
        x = game.lower + span * rng.random(game.n_players)
        xp = game.lower + span * rng.random(game.n_players)
        while np.all(xp == x):
            xp = game.lower + span * rng.random(game.n_players)
        inner = float(np.dot(pseudo_gradient(game, x) - pseudo_gradient(game, xp), x - xp))
        min_inner = min(min_inner, inner)
        if inner <= 0.0:
            violations += 1
    return MonotonicityReport(samples=samples, min_inner=min_inner, violations=violations)
