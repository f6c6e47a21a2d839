"""Command-line harness.

Subcommands:

  run         full experiment bundle (trajectories, summaries, convergence
              stats, optional attack and accountant reports)
  validate    parse the config and report the schedule validity flags
  accountant  privacy budget only
  attack      gradient-inference comparison only
  rate-fit    fit error-decay envelopes on a fresh set of runs

Exit codes: 0 ok, 2 configuration error, 3 runtime invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .adversary import infer_gradient
from .config import ConfigError, load_config
from .experiment import run_experiment
from .games import ne_oracle_quadratic
from .privacy import AdjacencySpec, PrivacyLedger, cumulative_delta, estimate_c_tilde, make_adjacent
from .ratefit import fit_rate
from .reports import write_accountant_csv, write_attack_csv
from .schedules import validate_schedules
from .seeker import InvariantViolation, run as run_seeker

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpnes",
        description="Differentially private distributed Nash equilibrium seeking",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("run", "run the full experiment and write the report bundle"),
        ("validate", "validate the configuration and schedule conditions"),
        ("accountant", "compute the privacy budget"),
        ("attack", "run the eavesdropper comparison"),
        ("rate-fit", "fit error decay envelopes"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, type=Path, help="TOML config file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seeds", type=int, default=None, help="override [run].n_seeds")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    run_experiment(cfg, args.out, seeds_override=args.seeds, quiet=args.quiet)
    if not args.quiet:
        print(f"report bundle written to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_schedules(cfg.schedules)
    print(report)
    if not args.quiet:
        print(f"players: {cfg.game.n_players}, horizon: {cfg.run.T}")
        print(f"equilibrium: {np.array2string(ne_oracle_quadratic(cfg.game), precision=4)}")
    return EXIT_OK


def _cmd_accountant(args) -> int:
    cfg = load_config(args.config)
    if cfg.accountant is None:
        raise ConfigError("the config has no [accountant] section")
    report = validate_schedules(cfg.schedules)
    if not report.privacy_ok:
        raise ConfigError(
            "privacy accounting requested but the schedules violate: "
            + "; ".join(report.violations)
        )
    acc = cfg.accountant
    game = cfg.game_instance()
    if acc.c_tilde == "estimate":
        ne = ne_oracle_quadratic(cfg.game)
        adj = make_adjacent(game, AdjacencySpec(acc.player, acc.alpha, acc.kappa), ne)
        init = "uniform" if cfg.run.init == "uniform" else np.asarray(cfg.run.init)
        c_tilde = estimate_c_tilde(
            game,
            adj,
            cfg.topology,
            cfg.mechanism,
            cfg.schedules,
            cfg.run.T,
            seeds=range(cfg.run.base_seed, cfg.run.base_seed + acc.estimate_seeds),
            player=acc.player,
            init=init,
        ).value
        if c_tilde <= 0.0:
            raise ConfigError(
                "[accountant] estimated envelope constant is zero; supply c_tilde"
            )
    else:
        c_tilde = float(acc.c_tilde)
    ledger = PrivacyLedger.accumulate(cfg.schedules, cfg.mechanism, c_tilde, cfg.run.T)
    args.out.mkdir(parents=True, exist_ok=True)
    ks = np.arange(cfg.run.T + 1)
    write_accountant_csv(
        args.out / "accountant.csv",
        ks,
        cfg.schedules.stepsize_array(ks),
        cfg.schedules.decay_array(ks),
        np.asarray(ledger.sensitivity_bound),
        np.asarray(ledger.per_iter_delta),
        np.asarray(ledger.cumulative),
    )
    tail = cumulative_delta(cfg.schedules, cfg.mechanism, c_tilde, cfg.run.T)
    print(
        f"(0, {ledger.cumulative[-1]:.6g})-differential privacy over {cfg.run.T} "
        f"iterations (envelope constant {c_tilde:.6g})"
    )
    print(
        f"per-iteration delta at T: {ledger.per_iter_delta[-1]:.6g}; "
        f"infinite-horizon bound: {tail.infinite_horizon_bound:.6g}"
    )
    return EXIT_OK


def _cmd_attack(args) -> int:
    cfg = load_config(args.config)
    if cfg.attack is None:
        raise ConfigError("the config has no [attack] section")
    game = cfg.game_instance()
    init = "uniform" if cfg.run.init == "uniform" else np.asarray(cfg.run.init)
    seed = cfg.run.base_seed
    private = run_seeker(
        game, cfg.topology, cfg.mechanism, cfg.schedules, cfg.run.T, init=init, seed=seed
    )
    open_run = run_seeker(
        game, cfg.topology, None, cfg.schedules, cfg.run.T, init=init, seed=seed
    )
    reports = {
        "privacy": infer_gradient(
            private.observation_records(), cfg.topology, cfg.schedules,
            cfg.attack.target, private, game,
        ),
        "no_privacy": infer_gradient(
            open_run.observation_records(), cfg.topology, cfg.schedules,
            cfg.attack.target, open_run, game,
        ),
    }
    args.out.mkdir(parents=True, exist_ok=True)
    write_attack_csv(args.out / "attack.csv", reports)
    lo, hi = 100, min(cfg.run.T - 2, 1500)
    print(
        f"median abs inference error over k in [{lo},{hi}]: "
        f"privacy {reports['privacy'].median_error(lo, hi):.6g}, "
        f"no_privacy {reports['no_privacy'].median_error(lo, hi):.6g}"
    )
    return EXIT_OK


def _cmd_rate_fit(args) -> int:
    cfg = load_config(args.config)
    game = cfg.game_instance()
    ne = ne_oracle_quadratic(cfg.game)
    init = "uniform" if cfg.run.init == "uniform" else np.asarray(cfg.run.init)
    seeds = cfg.run.seeds if args.seeds is None else tuple(
        range(cfg.run.base_seed, cfg.run.base_seed + args.seeds)
    )
    cons = []
    dist_sq = []
    for seed in seeds:
        tr = run_seeker(
            game, cfg.topology, cfg.mechanism, cfg.schedules, cfg.run.T, init=init, seed=seed
        )
        cons.append(tr.consensus_error())
        dist_sq.append(tr.distance_to(ne) ** 2)
    cons_mean = np.vstack(cons).mean(axis=0)
    dist_mean = np.vstack(dist_sq).mean(axis=0)
    window = (min(200, cfg.run.T // 2), cfg.run.T)
    fit_cons = fit_rate(cons_mean, cfg.schedules, "lambda_over_gamma_sq", window)
    fit_dist = fit_rate(dist_mean, cfg.schedules, "lambda_over_gamma", window)
    print(
        f"consensus error ~ C*(stepsize/decay)^2: C={fit_cons.constant:.6g} "
        f"residual={fit_cons.residual:.3f} max_ratio={fit_cons.max_ratio:.6g}"
    )
    print(
        f"squared distance ~ C*(stepsize/decay): C={fit_dist.constant:.6g} "
        f"residual={fit_dist.residual:.3f} max_ratio={fit_dist.max_ratio:.6g}"
    )
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "validate": _cmd_validate,
    "accountant": _cmd_accountant,
    "attack": _cmd_attack,
    "rate-fit": _cmd_rate_fit,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
