"""CSV report schemas shared by the experiment harness and downstream tools.

All floats are written with 17 significant digits so that re-reading a file
reproduces the binary values exactly.  Column layouts:

  trajectory.csv   run_id, k, player, x, y, fired, message  (message empty
                   on silent rounds)
  summary.csv      run_id, player, trigger_count, trigger_rate
  convergence.csv  variant, k, mean_dist, var_dist
  accountant.csv   k, lambda, gamma, sensitivity_bound, delta_k, cum_delta
  attack.csv       k, inferred, truth, abs_error, mode
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeker import Trajectory

__all__ = [
    "fmt",
    "read_rows",
    "write_accountant_csv",
    "write_attack_csv",
    "write_convergence_csv",
    "write_summary_csv",
    "write_trajectory_csv",
]


def fmt(v: float) -> str:
    """Decimal text that round-trips float64 exactly."""
    return format(float(v), ".17g")


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_trajectory_csv(path: Path, runs: dict[str, Trajectory]) -> None:
    """One row per (run, stored iterate, player); run ids in sorted order."""
    def rows():
        for run_id in sorted(runs):
            tr = runs[run_id]
            for row, k in enumerate(tr.iters):
                for i in range(tr.x.shape[1]):
                    fired = bool(tr.fired[k, i]) if k < tr.fired.shape[0] else False
                    msg = fmt(tr.messages[k, i]) if fired else ""
                    yield (
                        run_id,
                        str(int(k)),
                        str(i),
                        fmt(tr.x[row, i]),
                        fmt(tr.y[row, i]),
                        "1" if fired else "0",
                        msg,
                    )

    _write(path, ["run_id", "k", "player", "x", "y", "fired", "message"], rows())


def write_summary_csv(path: Path, runs: dict[str, Trajectory]) -> None:
    def rows():
        for run_id in sorted(runs):
            tr = runs[run_id]
            for i, count in enumerate(tr.trigger_counts):
                yield (run_id, str(i), str(int(count)), fmt(count / tr.horizon))

    _write(path, ["run_id", "player", "trigger_count", "trigger_rate"], rows())


def write_convergence_csv(
    path: Path, curves: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]
) -> None:
    """``curves`` maps variant name -> (iters, mean distance, distance variance)."""
    def rows():
        for variant in sorted(curves):
            iters, mean, var = curves[variant]
            for k, m, v in zip(iters, mean, var):
                yield (variant, str(int(k)), fmt(m), fmt(v))

    _write(path, ["variant", "k", "mean_dist", "var_dist"], rows())


def write_accountant_csv(
    path: Path,
    ks: np.ndarray,
    lam: np.ndarray,
    gam: np.ndarray,
    sensitivity: np.ndarray,
    deltas: np.ndarray,
    cumulative: np.ndarray,
) -> None:
    def rows():
        for k, l, g, s_, d_, c_ in zip(ks, lam, gam, sensitivity, deltas, cumulative):
            yield (str(int(k)), fmt(l), fmt(g), fmt(s_), fmt(d_), fmt(c_))

    _write(
        path,
        ["k", "lambda", "gamma", "sensitivity_bound", "delta_k", "cum_delta"],
        rows(),
    )


def write_attack_csv(path: Path, reports: dict[str, "AttackReport"]) -> None:
    """``reports`` maps mode name ('privacy'/'no_privacy') -> AttackReport."""
    def rows():
        for mode in sorted(reports):
            rep = reports[mode]
            for k, inf, tru, err in zip(rep.iters, rep.inferred, rep.truth, rep.abs_error):
                yield (str(int(k)), fmt(inf), fmt(tru), fmt(err), mode)

    _write(path, ["k", "inferred", "truth", "abs_error", "mode"], rows())


def read_rows(path: Path) -> list[dict[str, str]]:
    """Read any of the report CSVs back as a list of string-valued dicts."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
