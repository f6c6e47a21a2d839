"""Experiment harness: multi-seed runs, aggregation and report bundles.

Produces a deterministic bundle in the output directory:

  trajectory.csv, summary.csv, convergence.csv   always
  attack.csv                                     when [attack] is configured
  accountant.csv                                 when [accountant] is configured
  summary.txt                                    human-readable recap

Identical config + base seed produce byte-identical bundles.  A conservation
or non-trigger invariant violation aborts with :class:`InvariantViolation`
(CLI exit code 3); configuration problems raise :class:`ConfigError` (exit
code 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adversary import AttackReport, infer_gradient
from .config import ConfigError, ExperimentConfig
from .games import GameInstance, ne_oracle_quadratic
from .privacy import (
    AdjacencySpec,
    PrivacyLedger,
    cumulative_delta,
    estimate_c_tilde,
    make_adjacent,
)
from .reports import (
    fmt,
    write_accountant_csv,
    write_attack_csv,
    write_convergence_csv,
    write_summary_csv,
    write_trajectory_csv,
)
from .schedules import validate_schedules
from .seeker import InvariantViolation, Trajectory, run, run_noisy_baseline

__all__ = ["ExperimentResult", "run_experiment"]

CONSERVATION_TOL = 1e-9

MAIN = "dpnes"
BASELINE = "baseline"


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    out_dir: Path
    files: tuple[str, ...]
    ne: np.ndarray
    main_runs: dict[str, Trajectory]
    baseline_runs: dict[str, Trajectory]
    mean_final_distance: float
    mean_initial_distance: float
    baseline_final_distance: float | None
    attack_reports: dict[str, AttackReport]
    c_tilde: float | None
    cumulative_delta: float | None
    delta_at_T: float | None

    @property
    def trigger_rates(self) -> np.ndarray:
        rates = np.array([tr.trigger_rates for tr in self.main_runs.values()])
        return rates.mean(axis=0)


def _enforce_invariants(run_id: str, tr: Trajectory, game: GameInstance) -> None:
    if tr.conservation_max_rel > CONSERVATION_TOL:
        raise InvariantViolation(
            f"{run_id}: conservation residual {tr.conservation_max_rel:.3e} "
            f"exceeds {CONSERVATION_TOL}"
        )
    if tr.nontrigger_violations:
        raise InvariantViolation(
            f"{run_id}: {tr.nontrigger_violations} silent rounds violate the "
            "trigger gap bound"
        )
    if np.any(tr.x < game.lower[None, :] - 1e-12) or np.any(
        tr.x > game.upper[None, :] + 1e-12
    ):
        raise InvariantViolation(f"{run_id}: decision left its interval")


def _distance_stats(
    runs: dict[str, Trajectory], ne: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iters = next(iter(runs.values())).iters
    dists = np.vstack([tr.distance_to(ne) for tr in runs.values()])
    return iters, dists.mean(axis=0), dists.var(axis=0)


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    seeds_override: int | None = None,
    quiet: bool = False,
) -> ExperimentResult:
    """Run the configured experiment end to end and write the report bundle."""
    report = validate_schedules(cfg.schedules)
    if not report.convergence_ok:
        raise ConfigError(
            "schedules fail the convergence conditions: " + "; ".join(report.violations)
        )
    if cfg.accountant is not None and not report.privacy_ok:
        raise ConfigError(
            "privacy accounting requested but the schedules violate: "
            + "; ".join(v for v in report.violations)
        )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    game = cfg.game_instance()
    ne = ne_oracle_quadratic(cfg.game)
    seeds = cfg.run.seeds
    if seeds_override is not None:
        if seeds_override < 1:
            raise ConfigError("--seeds override must be >= 1")
        seeds = tuple(range(cfg.run.base_seed, cfg.run.base_seed + seeds_override))
    init = "uniform" if cfg.run.init == "uniform" else np.asarray(cfg.run.init)

    def say(msg: str) -> None:
        if not quiet:
            print(msg)

    say(f"equilibrium: {np.array2string(ne, precision=4)}")

    main_runs: dict[str, Trajectory] = {}
    for seed in seeds:
        run_id = f"{MAIN}-{seed}"
        tr = run(
            game,
            cfg.topology,
            cfg.mechanism,
            cfg.schedules,
            cfg.run.T,
            init=init,
            seed=seed,
            store_every=cfg.run.store_every,
        )
        _enforce_invariants(run_id, tr, game)
        main_runs[run_id] = tr
    say(f"ran {len(main_runs)} seeded runs of the main algorithm")

    baseline_runs: dict[str, Trajectory] = {}
    if cfg.baseline is not None:
        for seed in seeds:
            baseline_runs[f"{BASELINE}-{seed}"] = run_noisy_baseline(
                game,
                cfg.topology,
                cfg.baseline,
                cfg.schedules,
                cfg.run.T,
                init=init,
                seed=seed,
                store_every=cfg.run.store_every,
            )
        say(f"ran {len(baseline_runs)} baseline runs")

    files = ["trajectory.csv", "summary.csv", "convergence.csv"]
    all_runs = {**main_runs, **baseline_runs}
    write_trajectory_csv(out_dir / "trajectory.csv", all_runs)
    write_summary_csv(out_dir / "summary.csv", all_runs)

    curves = {MAIN: _distance_stats(main_runs, ne)}
    if baseline_runs:
        curves[BASELINE] = _distance_stats(baseline_runs, ne)
    write_convergence_csv(out_dir / "convergence.csv", curves)

    initial = np.array([tr.distance_to(ne)[0] for tr in main_runs.values()])
    final = np.array([tr.distance_to(ne)[-1] for tr in main_runs.values()])
    baseline_final = (
        float(np.mean([tr.distance_to(ne)[-1] for tr in baseline_runs.values()]))
        if baseline_runs
        else None
    )

    attack_reports: dict[str, AttackReport] = {}
    if cfg.attack is not None:
        seed0 = seeds[0]
        private = main_runs[f"{MAIN}-{seed0}"]
        if cfg.run.store_every != 1:
            raise ConfigError("[attack] needs store_every = 1 for ground truth")
        open_run = run(
            game, cfg.topology, None, cfg.schedules, cfg.run.T, init=init, seed=seed0
        )
        attack_reports["privacy"] = infer_gradient(
            private.observation_records(),
            cfg.topology,
            cfg.schedules,
            cfg.attack.target,
            private,
            game,
        )
        attack_reports["no_privacy"] = infer_gradient(
            open_run.observation_records(),
            cfg.topology,
            cfg.schedules,
            cfg.attack.target,
            open_run,
            game,
        )
        write_attack_csv(out_dir / "attack.csv", attack_reports)
        files.append("attack.csv")
        lo, hi = 100, min(cfg.run.T - 2, 1500)
        say(
            "attack medians over k in "
            f"[{lo},{hi}]: privacy {attack_reports['privacy'].median_error(lo, hi):.4g} "
            f"vs open {attack_reports['no_privacy'].median_error(lo, hi):.4g}"
        )

    c_tilde_val: float | None = None
    cum_delta: float | None = None
    delta_T: float | None = None
    if cfg.accountant is not None:
        acc = cfg.accountant
        if acc.c_tilde == "estimate":
            adj = make_adjacent(game, AdjacencySpec(acc.player, acc.alpha, acc.kappa), ne)
            est = estimate_c_tilde(
                game,
                adj,
                cfg.topology,
                cfg.mechanism,
                cfg.schedules,
                cfg.run.T,
                seeds=range(cfg.run.base_seed, cfg.run.base_seed + acc.estimate_seeds),
                player=acc.player,
                init=init,
            )
            c_tilde_val = est.value
            say(f"estimated envelope constant: {c_tilde_val:.6g}")
            if c_tilde_val <= 0.0:
                raise ConfigError(
                    "[accountant] estimated envelope constant is zero "
                    "(kappa too small?); supply c_tilde explicitly"
                )
        else:
            c_tilde_val = float(acc.c_tilde)
        ledger = PrivacyLedger.accumulate(cfg.schedules, cfg.mechanism, c_tilde_val, cfg.run.T)
        ks = np.arange(cfg.run.T + 1)
        write_accountant_csv(
            out_dir / "accountant.csv",
            ks,
            cfg.schedules.stepsize_array(ks),
            cfg.schedules.decay_array(ks),
            np.asarray(ledger.sensitivity_bound),
            np.asarray(ledger.per_iter_delta),
            np.asarray(ledger.cumulative),
        )
        files.append("accountant.csv")
        cum_delta = ledger.cumulative[-1]
        delta_T = ledger.per_iter_delta[-1]
        tail = cumulative_delta(cfg.schedules, cfg.mechanism, c_tilde_val, cfg.run.T)
        say(
            f"privacy budget at T={cfg.run.T}: per-iteration delta {delta_T:.4g}, "
            f"cumulative {cum_delta:.4g}, infinite-horizon bound "
            f"{tail.infinite_horizon_bound:.4g}"
        )

    lines = [
        "experiment summary",
        f"players: {game.n_players}",
        f"iterations: {cfg.run.T}",
        f"seeds: {','.join(map(str, seeds))}",
        f"equilibrium: {' '.join(fmt(v) for v in ne)}",
        f"mean initial distance: {fmt(initial.mean())}",
        f"mean final distance: {fmt(final.mean())}",
        "mean trigger rates: "
        + " ".join(
            fmt(r)
            for r in np.array([tr.trigger_rates for tr in main_runs.values()]).mean(axis=0)
        ),
    ]
    if baseline_final is not None:
        lines.append(f"baseline mean final distance: {fmt(baseline_final)}")
    if attack_reports:
        lo, hi = 100, min(cfg.run.T - 2, 1500)
        lines.append(
            "attack median abs error (privacy/no_privacy): "
            f"{fmt(attack_reports['privacy'].median_error(lo, hi))} "
            f"{fmt(attack_reports['no_privacy'].median_error(lo, hi))}"
        )
    if c_tilde_val is not None:
        lines.append(f"envelope constant: {fmt(c_tilde_val)}")
        lines.append(
            f"privacy statement: (0, {fmt(cum_delta)})-differential privacy over "
            f"{cfg.run.T} iterations (per-iteration delta at T: {fmt(delta_T)})"
        )
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    files.append("summary.txt")

    return ExperimentResult(
        out_dir=out_dir,
        files=tuple(files),
        ne=ne,
        main_runs=main_runs,
        baseline_runs=baseline_runs,
        mean_final_distance=float(final.mean()),
        mean_initial_distance=float(initial.mean()),
        baseline_final_distance=baseline_final,
        attack_reports=attack_reports,
        c_tilde=c_tilde_val,
        cumulative_delta=cum_delta,
        delta_at_T=delta_T,
    )
