"""Experiment configuration: one TOML file with flat, documented keys.

Sections and keys (see the README for the full grammar):

  [game]       family ("quadratic"), targets, intervals, beta, p
  [topology]   preset ("ring"|"complete"|"path") + weight, or edges=[[i,j,w],...]
  [mechanism]  sigma, a, c, d
  [schedule]   lambda0, b_l, p, gamma0, b_g, q
  [run]        T, n_seeds, base_seed, init ("uniform" or a vector), store_every
  [baseline]   optional: noise_scale, noise_decay, lambda0, lambda_decay
  [attack]     optional: target
  [accountant] optional: c_tilde (number or "estimate"), alpha, kappa,
               player, estimate_seeds
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .games import GameInstance, QuadraticAggregativeGame
from .mechanism import MechanismParams
from .schedules import Schedules
from .seeker import BaselineParams
from . import topology as topo_mod

__all__ = [
    "AccountantConfig",
    "AttackConfig",
    "ConfigError",
    "ExperimentConfig",
    "RunConfig",
    "load_config",
]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _section(data: dict, name: str, required: bool = True) -> dict | None:
    sec = data.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section [{name}]")
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _get(sec: dict, section: str, key: str, default: Any = ...) -> Any:
    if key not in sec:
        if default is ...:
            raise ConfigError(f"[{section}] missing key '{key}'")
        return default
    return sec[key]


@dataclass(frozen=True)
class RunConfig:
    T: int
    n_seeds: int
    base_seed: int
    init: str | tuple[float, ...]
    store_every: int

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(range(self.base_seed, self.base_seed + self.n_seeds))


@dataclass(frozen=True)
class AttackConfig:
    target: int


@dataclass(frozen=True)
class AccountantConfig:
    c_tilde: float | str  # a number, or "estimate"
    alpha: float
    kappa: float
    player: int
    estimate_seeds: int


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    game: QuadraticAggregativeGame
    topology: topo_mod.Topology
    mechanism: MechanismParams
    schedules: Schedules
    run: RunConfig
    baseline: BaselineParams | None
    attack: AttackConfig | None
    accountant: AccountantConfig | None

    def game_instance(self) -> GameInstance:
        return self.game.instance()


def _build_game(sec: dict) -> QuadraticAggregativeGame:
    family = _get(sec, "game", "family")
    if family != "quadratic":
        raise ConfigError(f"[game] unsupported family {family!r} (only 'quadratic')")
    targets = _get(sec, "game", "targets")
    intervals = _get(sec, "game", "intervals")
    if len(intervals) != len(targets):
        raise ConfigError("[game] targets and intervals must have the same length")
    try:
        lower = [float(iv[0]) for iv in intervals]
        upper = [float(iv[1]) for iv in intervals]
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"[game] intervals must be [lo, hi] pairs: {exc}") from exc
    try:
        return QuadraticAggregativeGame(
            targets=targets,
            lower=lower,
            upper=upper,
            coupling=float(_get(sec, "game", "beta")),
            offset=float(_get(sec, "game", "p")),
        )
    except ValueError as exc:
        raise ConfigError(f"[game] {exc}") from exc


def _build_topology(sec: dict, n: int) -> topo_mod.Topology:
    preset = sec.get("preset")
    edges = sec.get("edges")
    if (preset is None) == (edges is None):
        raise ConfigError("[topology] give exactly one of 'preset' or 'edges'")
    try:
        if preset is not None:
            weight = float(sec.get("weight", 1.0))
            makers = {
                "ring": topo_mod.ring,
                "complete": topo_mod.complete,
                "path": topo_mod.path,
            }
            if preset not in makers:
                raise ConfigError(
                    f"[topology] unknown preset {preset!r}; choose from {sorted(makers)}"
                )
            return makers[preset](n, weight)
        return topo_mod.build(n, edges)
    except ValueError as exc:
        raise ConfigError(f"[topology] {exc}") from exc


def _build_mechanism(sec: dict) -> MechanismParams:
    try:
        return MechanismParams(
            sigma=float(_get(sec, "mechanism", "sigma")),
            a=float(_get(sec, "mechanism", "a")),
            c=float(_get(sec, "mechanism", "c")),
            d=float(_get(sec, "mechanism", "d")),
        )
    except ValueError as exc:
        raise ConfigError(f"[mechanism] {exc}") from exc


def _build_schedules(sec: dict) -> Schedules:
    try:
        return Schedules(
            lambda0=float(_get(sec, "schedule", "lambda0")),
            b_l=float(_get(sec, "schedule", "b_l")),
            p=float(_get(sec, "schedule", "p")),
            gamma0=float(_get(sec, "schedule", "gamma0")),
            b_g=float(_get(sec, "schedule", "b_g")),
            q=float(_get(sec, "schedule", "q")),
        )
    except ValueError as exc:
        raise ConfigError(f"[schedule] {exc}") from exc


def _build_run(sec: dict, n: int) -> RunConfig:
    init = _get(sec, "run", "init", "uniform")
    if isinstance(init, str):
        if init != "uniform":
            raise ConfigError(f"[run] init must be 'uniform' or a vector, got {init!r}")
        init_val: str | tuple[float, ...] = "uniform"
    else:
        init_val = tuple(float(v) for v in init)
        if len(init_val) != n:
            raise ConfigError(f"[run] explicit init needs {n} entries")
    t = int(_get(sec, "run", "T"))
    n_seeds = int(_get(sec, "run", "n_seeds", 1))
    store_every = int(_get(sec, "run", "store_every", 1))
    if t < 1 or n_seeds < 1 or store_every < 1:
        raise ConfigError("[run] T, n_seeds and store_every must be >= 1")
    return RunConfig(
        T=t,
        n_seeds=n_seeds,
        base_seed=int(_get(sec, "run", "base_seed", 0)),
        init=init_val,
        store_every=store_every,
    )


def _build_baseline(sec: dict | None) -> BaselineParams | None:
    if sec is None:
        return None
    decay = sec.get("lambda_decay")
    try:
        return BaselineParams(
            noise_scale=float(_get(sec, "baseline", "noise_scale")),
            noise_decay=float(_get(sec, "baseline", "noise_decay")),
            lambda0=float(_get(sec, "baseline", "lambda0")),
            lambda_decay=None if decay is None else float(decay),
        )
    except ValueError as exc:
        raise ConfigError(f"[baseline] {exc}") from exc


def _build_attack(sec: dict | None, n: int) -> AttackConfig | None:
    if sec is None:
        return None
    target = int(_get(sec, "attack", "target", 0))
    if not (0 <= target < n):
        raise ConfigError(f"[attack] target {target} out of range for {n} players")
    return AttackConfig(target=target)


def _build_accountant(sec: dict | None, n: int) -> AccountantConfig | None:
    if sec is None:
        return None
    c_tilde = _get(sec, "accountant", "c_tilde", "estimate")
    if isinstance(c_tilde, str):
        if c_tilde != "estimate":
            raise ConfigError("[accountant] c_tilde must be a number or 'estimate'")
    else:
        c_tilde = float(c_tilde)
        if c_tilde <= 0:
            raise ConfigError("[accountant] c_tilde must be positive")
    player = int(_get(sec, "accountant", "player", 0))
    if not (0 <= player < n):
        raise ConfigError(f"[accountant] player {player} out of range for {n} players")
    alpha = float(_get(sec, "accountant", "alpha", 0.5))
    kappa = float(_get(sec, "accountant", "kappa", 1e-3))
    estimate_seeds = int(_get(sec, "accountant", "estimate_seeds", 4))
    if alpha <= 0:
        raise ConfigError("[accountant] alpha must be positive")
    if estimate_seeds < 1:
        raise ConfigError("[accountant] estimate_seeds must be >= 1")
    return AccountantConfig(
        c_tilde=c_tilde, alpha=alpha, kappa=kappa, player=player, estimate_seeds=estimate_seeds
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and cross-validate an experiment configuration file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    game = _build_game(_section(data, "game"))
    n = game.n_players
    topology = _build_topology(_section(data, "topology"), n)
    mechanism = _build_mechanism(_section(data, "mechanism"))
    schedules = _build_schedules(_section(data, "schedule"))
    run_cfg = _build_run(_section(data, "run"), n)
    if isinstance(run_cfg.init, tuple):
        x0 = np.asarray(run_cfg.init)
        if np.any(x0 < game.lower) or np.any(x0 > game.upper):
            raise ConfigError("[run] explicit init violates the decision intervals")
    return ExperimentConfig(
        game=game,
        topology=topology,
        mechanism=mechanism,
        schedules=schedules,
        run=run_cfg,
        baseline=_build_baseline(_section(data, "baseline", required=False)),
        attack=_build_attack(_section(data, "attack", required=False), n),
        accountant=_build_accountant(_section(data, "accountant", required=False), n),
    )
