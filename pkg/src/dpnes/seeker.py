"""Distributed Nash-equilibrium seeking engine.

Each iteration runs three phases for every player:

a) event-triggering: compare the stored broadcast with the current aggregate
   estimate and draw the stochastic trigger (iteration 0 fires
   unconditionally so that neighbours get an initial value);
b) quantized broadcast: firing players send the stochastically quantized
   estimate to all neighbours, who overwrite their local copy; silent players
   send nothing and everyone keeps stale copies;
c) updates: a projected gradient step on the decision using the player's own
   current estimate, then the estimate update mixing the *stored* lattice
   values of the neighbourhood plus the player's own decision increment.

Because the mixing term is skew-balanced over an undirected graph, the sum of
the estimates equals the sum of the decisions at every iteration; the engine
tracks the worst relative violation of that identity, which is a pure
floating-point residual.

A noise-injection baseline (`run_noisy_baseline`) shares the skeleton but
broadcasts the raw estimate plus decaying Laplace noise every iteration and
uses a geometrically decaying stepsize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .games import GameInstance
from .mechanism import MechanismParams, TriggerState, mechanism_step, stochastic_quantize
from .schedules import Schedules, validate_schedules
from .streams import RunStreams, laplace_from_uniform, uniform_initials
from .topology import Topology

__all__ = [
    "BaselineParams",
    "InvariantViolation",
    "ObservationRecord",
    "PlayerState",
    "Trajectory",
    "init_players",
    "run",
    "run_noisy_baseline",
    "step",
]


class InvariantViolation(RuntimeError):
    """A runtime identity of the iteration was violated."""


@dataclass(frozen=True)
class PlayerState:
    """Decision, aggregate estimate and communication bookkeeping of a player.

    ``neighbor_store`` maps neighbour id -> the latest value received from
    that neighbour; entries change only when a message is delivered.
    """

    x: float
    y: float
    trig: TriggerState
    neighbor_store: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ObservationRecord:
    """What an eavesdropper sees from one player at one iteration: whether it
    fired and, if so, the transmitted value."""

    k: int
    player: int
    fired: bool
    message: float | None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Everything produced by one run.

    ``x``/``y`` have one row per stored iterate (all iterations by default),
    ``fired``/``messages``/``projection_active`` one row per iteration.
    ``messages`` holds NaN where no message was sent.
    """

    seed: int
    iters: np.ndarray
    x: np.ndarray
    y: np.ndarray
    fired: np.ndarray
    messages: np.ndarray
    projection_active: np.ndarray
    trigger_counts: np.ndarray
    conservation_max_rel: float
    nontrigger_violations: int
    quantized: bool

    @property
    def horizon(self) -> int:
        return self.fired.shape[0]

    @property
    def trigger_rates(self) -> np.ndarray:
        return self.trigger_counts / self.horizon

    def observation_records(self) -> list[ObservationRecord]:
        records = []
        for k in range(self.fired.shape[0]):
            for i in range(self.fired.shape[1]):
                fired = bool(self.fired[k, i])
                msg = float(self.messages[k, i]) if fired else None
                records.append(ObservationRecord(k=k, player=i, fired=fired, message=msg))
        return records

    def consensus_error(self) -> np.ndarray:
        """Sum over players of (y_i - mean(y))^2, one value per stored iterate."""
        dev = self.y - self.y.mean(axis=1, keepdims=True)
        return (dev**2).sum(axis=1)

    def distance_to(self, point: np.ndarray) -> np.ndarray:
        """Euclidean distance of each stored decision profile to ``point``."""
        return np.linalg.norm(self.x - np.asarray(point)[None, :], axis=1)


def init_players(game: GameInstance, x0: np.ndarray, topo: Topology) -> list[PlayerState]:
    """States before iteration 0: estimates start at the decisions, stores are
    placeholders until the forced initial broadcast."""
    players = []
    for i in range(game.n_players):
        players.append(
            PlayerState(
                x=float(x0[i]),
                y=float(x0[i]),
                trig=TriggerState(tau=0, stored=math.nan, rho=0.0),
                neighbor_store={},
            )
        )
    return players


def step(
    players: list[PlayerState],
    game: GameInstance,
    topo: Topology,
    params: MechanismParams | None,
    s: Schedules,
    k: int,
    streams: RunStreams,
) -> tuple[list[PlayerState], list[ObservationRecord]]:
    """Advance all players by one iteration; returns new states and the
    iteration's observation records.

    ``params=None`` disables the privacy mechanism: every player broadcasts
    its raw estimate every iteration (the comparison mode used to isolate the
    mechanism's effect).
    """
    n = len(players)
    lam = s.stepsize(k)
    gam = s.decay(k)

    # phase a+b: trigger decisions and quantized broadcasts, from current y
    fired: list[bool] = [False] * n
    messages: list[float | None] = [None] * n
    new_trigs: list[TriggerState] = [st.trig for st in players]
    for i, st in enumerate(players):
        if params is None:
            fired[i] = True
            messages[i] = st.y
            rho = 0.0 if k == 0 else st.trig.stored - st.y
            new_trigs[i] = TriggerState(tau=k, stored=st.y, rho=rho)
        elif k == 0:
            # forced initial broadcast: every player announces Q(y^0)
            sample = stochastic_quantize(st.y, params.d, streams.quantizer[0, i])
            fired[i] = True
            messages[i] = sample.output
            new_trigs[i] = TriggerState(tau=0, stored=sample.output, rho=0.0)
        else:
            did, msg, trig = mechanism_step(
                st.trig, st.y, k, gam, params,
                streams.trigger[k, i], streams.quantizer[k, i],
            )
            fired[i], messages[i], new_trigs[i] = did, msg, trig

    # delivery: firing players overwrite their neighbours' copies
    new_stores = [dict(st.neighbor_store) for st in players]
    for i in range(n):
        if fired[i]:
            for j in topo.neighbors(i):
                new_stores[j][i] = messages[i]

    # phase c: decision update from own pre-update estimate, then estimate
    # update from the post-delivery stores
    new_players: list[PlayerState] = []
    observations: list[ObservationRecord] = []
    for i, st in enumerate(players):
        lo, hi = game.interval(i)
        raw = st.x - lam * game.gradient_fields[i](st.x, st.y)
        x_next = min(max(raw, lo), hi)
        own_stored = new_trigs[i].stored
        mix = 0.0
        for j, w in topo.neighbor_weights(i):
            mix += w * (new_stores[i][j] - own_stored)
        y_next = st.y + gam * mix + (x_next - st.x)
        new_players.append(
            PlayerState(x=x_next, y=y_next, trig=new_trigs[i], neighbor_store=new_stores[i])
        )
        observations.append(
            ObservationRecord(k=k, player=i, fired=fired[i], message=messages[i])
        )
    return new_players, observations


def _resolve_init(
    init: np.ndarray | str, game: GameInstance, seed: int
) -> np.ndarray:
    if isinstance(init, str):
        if init != "uniform":
            raise ValueError(f"unknown init mode {init!r}")
        return uniform_initials(seed, game.lower, game.upper)
    x0 = np.asarray(init, dtype=float)
    if x0.shape != (game.n_players,):
        raise ValueError(f"init must have shape ({game.n_players},)")
    if not game.contains(x0):
        raise ValueError("init outside the decision intervals")
    return x0


def run(
    game: GameInstance,
    topo: Topology,
    params: MechanismParams | None,
    s: Schedules,
    T: int,
    init: np.ndarray | str = "uniform",
    seed: int = 0,
    store_every: int = 1,
) -> Trajectory:
    """Run ``T`` iterations; deterministic given ``seed``.

    ``store_every=m`` keeps every m-th iterate (plus the first and last) in
    the returned arrays; the conservation and non-trigger checks still cover
    every iteration.
    """
    if T < 1:
        raise ValueError("need at least one iteration")
    if topo.n != game.n_players:
        raise ValueError("topology size does not match the game")
    report = validate_schedules(s)
    if not report.convergence_ok:
        raise ValueError(
            "schedules fail the convergence conditions: " + "; ".join(report.violations)
        )
    n = game.n_players
    x0 = _resolve_init(init, game, seed)
    streams = RunStreams.for_run(seed, n, T)
    players = init_players(game, x0, topo)

    keep = [k for k in range(T + 1) if k % store_every == 0 or k == T]
    keep_set = set(keep)
    xs = np.empty((len(keep), n))
    ys = np.empty((len(keep), n))
    fired = np.zeros((T, n), dtype=bool)
    messages = np.full((T, n), np.nan)
    proj_active = np.zeros((T, n), dtype=bool)
    trigger_counts = np.zeros(n, dtype=int)
    row = 0
    if 0 in keep_set:
        xs[row] = x0
        ys[row] = x0
        row += 1

    conservation_max = 0.0
    nontrigger_violations = 0
    for k in range(T):
        lam = s.stepsize(k)
        gam = s.decay(k)
        prev = players
        players, obs = step(players, game, topo, params, s, k, streams)
        for i, rec in enumerate(obs):
            fired[k, i] = rec.fired
            if rec.fired:
                messages[k, i] = rec.message
                trigger_counts[i] += 1
            elif params is not None:
                # silence certifies a bounded gap against the drawn xi
                xi = params.xi_from_uniform(streams.trigger[k, i])
                rho = players[i].trig.rho
                if rho * rho > (gam / params.c) * math.log(params.sigma / xi):
                    nontrigger_violations += 1
            raw = prev[i].x - lam * game.gradient_fields[i](prev[i].x, prev[i].y)
            proj_active[k, i] = players[i].x != raw
        sum_x = sum(st.x for st in players)
        sum_y = sum(st.y for st in players)
        rel = abs(sum_y - sum_x) / max(1.0, abs(sum_x))
        conservation_max = max(conservation_max, rel)
        if not math.isfinite(sum_y):
            raise InvariantViolation(f"estimates diverged to non-finite values at k={k}")
        if k + 1 in keep_set:
            xs[row] = [st.x for st in players]
            ys[row] = [st.y for st in players]
            row += 1

    return Trajectory(
        seed=seed,
        iters=np.asarray(keep),
        x=xs,
        y=ys,
        fired=fired,
        messages=messages,
        projection_active=proj_active,
        trigger_counts=trigger_counts,
        conservation_max_rel=conservation_max,
        nontrigger_violations=nontrigger_violations,
        quantized=params is not None,
    )


@dataclass(frozen=True)
class BaselineParams:
    """Noise-injection comparison algorithm.

    Every iteration every player broadcasts its raw estimate plus
    Laplace(noise_scale * noise_decay**k) noise; the stepsize decays
    geometrically as lambda0 * lambda_decay**k (``lambda_decay=None`` reuses
    the power-law stepsize, which turns the baseline into the unprivate
    variant when the noise scale is zero).
    """

    noise_scale: float
    noise_decay: float
    lambda0: float
    lambda_decay: float | None

    def __post_init__(self):
        if not (0.0 < self.noise_decay < 1.0):
            raise ValueError("noise_decay must lie in (0, 1)")
        if self.lambda_decay is not None and not (0.0 < self.lambda_decay < 1.0):
            raise ValueError("lambda_decay must lie in (0, 1)")
        if self.lambda0 <= 0.0:
            raise ValueError("lambda0 must be positive")
        if self.noise_scale < 0.0:
            raise ValueError("noise_scale must be nonnegative")


def run_noisy_baseline(
    game: GameInstance,
    topo: Topology,
    baseline: BaselineParams,
    s: Schedules,
    T: int,
    init: np.ndarray | str = "uniform",
    seed: int = 0,
    store_every: int = 1,
) -> Trajectory:
    """Run the noise-injection baseline; same skeleton and decay factor as the
    main algorithm, but noisy every-iteration broadcasts and a geometric
    stepsize."""
    if T < 1:
        raise ValueError("need at least one iteration")
    if topo.n != game.n_players:
        raise ValueError("topology size does not match the game")
    n = game.n_players
    x0 = _resolve_init(init, game, seed)
    streams = RunStreams.for_run(seed, n, T, with_noise=True)

    x = x0.copy()
    y = x0.copy()
    keep = [k for k in range(T + 1) if k % store_every == 0 or k == T]
    keep_set = set(keep)
    xs = np.empty((len(keep), n))
    ys = np.empty((len(keep), n))
    messages = np.full((T, n), np.nan)
    proj_active = np.zeros((T, n), dtype=bool)
    row = 0
    if 0 in keep_set:
        xs[row] = x
        ys[row] = y
        row += 1
    conservation_max = 0.0
    neighbor_weights = [topo.neighbor_weights(i) for i in range(n)]
    for k in range(T):
        lam = (
            baseline.lambda0 * baseline.lambda_decay**k
            if baseline.lambda_decay is not None
            else s.stepsize(k)
        )
        gam = s.decay(k)
        noise_scale = baseline.noise_scale * baseline.noise_decay**k
        sent = np.array(
            [
                y[i]
                + (
                    laplace_from_uniform(streams.noise[k, i], noise_scale)
                    if baseline.noise_scale > 0.0
                    else 0.0
                )
                for i in range(n)
            ]
        )
        messages[k] = sent
        x_next = np.empty(n)
        y_next = np.empty(n)
        for i in range(n):
            lo, hi = game.interval(i)
            raw = x[i] - lam * game.gradient_fields[i](float(x[i]), float(y[i]))
            x_next[i] = min(max(raw, lo), hi)
            proj_active[k, i] = x_next[i] != raw
            mix = 0.0
            for j, w in neighbor_weights[i]:
                mix += w * (sent[j] - sent[i])
            y_next[i] = y[i] + gam * mix + (x_next[i] - x[i])
        x, y = x_next, y_next
        rel = abs(y.sum() - x.sum()) / max(1.0, abs(x.sum()))
        conservation_max = max(conservation_max, rel)
        if k + 1 in keep_set:
            xs[row] = x
            ys[row] = y
            row += 1

    return Trajectory(
        seed=seed,
        iters=np.asarray(keep),
        x=xs,
        y=ys,
        fired=np.ones((T, n), dtype=bool),
        messages=messages,
        projection_active=proj_active,
        trigger_counts=np.full(n, T),
        conservation_max_rel=conservation_max,
        nontrigger_violations=0,
        quantized=False,
    )
