"""Dense ridge baseline and the runtime scaling study.

Timing methodology: every cell is the median of ``repeats`` runs of a
fixed-sweep solve on freshly generated synthetic data, measured with the
monotonic clock. Scaling runs should execute exclusively (no concurrent
work) to avoid contention skew; the orchestration here is strictly
sequential for that reason.
"""

import csv
import json
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .data import make_synthetic_total, pad_points, plan_factor_shape
from .exceptions import RankDeficiencyError, ShapeError, SizeLimitError
from .solver import solve_factors

DEFAULT_BASELINE_MAX_N = 4096


def dense_baseline_solve(X, lam, max_n=DEFAULT_BASELINE_MAX_N):
    """Closed-form dense ridge self-representation, the cubic-cost reference.

    Solves for the full N x N coefficient matrix ``(G + lam I)^{-1} G`` with
    ``G`` the sample Gram matrix. Refuses inputs beyond ``max_n`` samples.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be 2-D (n_samples, n_features)")
    n = X.shape[0]
    if max_n is not None and n > max_n:
        raise SizeLimitError(
            "dense baseline capped at %d samples, got %d" % (max_n, n)
        )
    gram = X @ X.T
    try:
        return scipy.linalg.solve(gram + lam * np.eye(n), gram, assume_a="pos")
    except np.linalg.LinAlgError:
        raise RankDeficiencyError(
            "dense system is singular; use lam > 0"
        ) from None


@dataclass
class ScalingCell:
    """Timings for one problem size (median over repetitions), in seconds."""

    n_points: int
    assembly_time: float
    solve_time: float
    total_time: float
    baseline_time: float = None


@dataclass
class ScalingReport:
    """Scaling study results for one method and factor count."""

    method: str
    n_factors: int
    lam: float
    n_sweeps: int
    repeats: int
    seed: int
    cells: list = field(default_factory=list)
    slope: float = float("nan")
    baseline_slope: float = None

    def speedups(self):
        """Dense-baseline time over factored solve time, where both exist."""
        return {
            c.n_points: c.baseline_time / c.total_time
            for c in self.cells
            if c.baseline_time is not None and c.total_time > 0
        }

    def to_dict(self):
        return {
            "method": self.method,
            "n_factors": self.n_factors,
            "lam": self.lam,
            "n_sweeps": self.n_sweeps,
            "repeats": self.repeats,
            "seed": self.seed,
            "cells": [
                {
                    "n_points": c.n_points,
                    "assembly_seconds": c.assembly_time,
                    "solve_seconds": c.solve_time,
                    "total_seconds": c.total_time,
                    "baseline_seconds": c.baseline_time,
                }
                for c in self.cells
            ],
            "loglog_slope": self.slope,
            "baseline_loglog_slope": self.baseline_slope,
            "speedups": {str(k): v for k, v in self.speedups().items()},
        }


def _fit_slope(sizes, times):
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def scaling_bench(sizes, n_factors=2, regularizer="frobenius", lam=0.2,
                  n_sweeps=5, repeats=3, baseline_max_n=DEFAULT_BASELINE_MAX_N,
                  n_subspaces=5, subspace_dim=6, ambient_dim=9,
                  random_state=0, method=None):
    """Time the factor solve across problem sizes and fit a log-log slope.

    The sweep count is fixed so each cell measures per-sweep cost rather than
    convergence variance, and factor shapes come from the balanced split (the
    canonical complexity setting). The dense baseline is timed wherever the
    size permits.

    Parameters
    ----------
    sizes : sequence of int
        Strictly increasing sample counts.

    Returns
    -------
    ScalingReport
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) == 0:
        raise ValueError("need at least one size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    report = ScalingReport(
        method=method or regularizer,
        n_factors=n_factors,
        lam=lam,
        n_sweeps=n_sweeps,
        repeats=repeats,
        seed=random_state,
    )
    for n in sizes:
        X, _ = make_synthetic_total(
            n, n_subspaces, subspace_dim, ambient_dim, random_state=random_state
        )
        shape, pad = plan_factor_shape(n, n_factors, random_state=random_state)
        padded = pad_points(X, pad)
        assembly, solve, total = [], [], []
        for _ in range(repeats):
            result = solve_factors(
                padded, shape, regularizer=regularizer, lam=lam,
                max_sweeps=n_sweeps, rel_tol=-np.inf,
                random_state=random_state,
            )
            assembly.append(result.assembly_time)
            solve.append(result.solve_time)
            total.append(result.total_time)
        cell = ScalingCell(
            n_points=n,
            assembly_time=statistics.median(assembly),
            solve_time=statistics.median(solve),
            total_time=statistics.median(total),
        )
        if baseline_max_n is not None and n <= baseline_max_n:
            times = []
            for _ in range(repeats):
                tic = time.perf_counter()
                dense_baseline_solve(X, lam, max_n=baseline_max_n)
                times.append(time.perf_counter() - tic)
            cell.baseline_time = statistics.median(times)
        report.cells.append(cell)
    if len(report.cells) >= 2:
        report.slope = _fit_slope(
            [c.n_points for c in report.cells],
            [c.total_time for c in report.cells],
        )
    baseline_cells = [c for c in report.cells if c.baseline_time is not None]
    if len(baseline_cells) >= 2:
        report.baseline_slope = _fit_slope(
            [c.n_points for c in baseline_cells],
            [c.baseline_time for c in baseline_cells],
        )
    return report


def write_scaling_csv(report, path):
    """One row per size: method, k, n, assembly/solve/total/baseline seconds."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "method", "n_factors", "n_points",
            "assembly_seconds", "solve_seconds", "total_seconds",
            "baseline_seconds",
        ])
        for c in report.cells:
            writer.writerow([
                report.method, report.n_factors, c.n_points,
                "%.9g" % c.assembly_time, "%.9g" % c.solve_time,
                "%.9g" % c.total_time,
                "" if c.baseline_time is None else "%.9g" % c.baseline_time,
            ])


def write_scaling_json(report, path, config_echo=None):
    """Full report structure, including the effective configuration."""
    payload = report.to_dict()
    if config_echo is not None:
        payload["config"] = dict(config_echo)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
