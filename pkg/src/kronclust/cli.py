"""Command-line interface.

Subcommands: ``generate`` (synthetic data), ``cluster`` (full pipeline on a
CSV/IDX dataset), ``bench`` (runtime scaling study), ``nkp-check`` (rank-one
Kronecker approximation of a square matrix), ``eval`` (accuracy between two
label files).

Options may come from a config file of ``key = value`` lines (``--config``);
explicit flags win over the file, which wins over built-in defaults. Every
command is deterministic for a fixed ``--seed``, and JSON reports embed the
effective configuration.

Exit codes: 0 success, 2 usage error, 3 numerical/approximation failure,
4 I/O or data-format error.
"""

import argparse
import ast
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import scaling_bench, write_scaling_csv, write_scaling_json
from .cluster import DenseRidgeSubspaceClustering, KroneckerSubspaceClustering
from .data import (
    load_idx_images,
    load_points_csv,
    make_union_of_subspaces,
    save_points_csv,
)
from .exceptions import (
    ApproximationError,
    DegenerateDataError,
    IdxFormatError,
    KronClustError,
    NumericalError,
    ShapeError,
    SizeLimitError,
)
from .kronecker import kron, nkp_symmetric_approx
from .metrics import clustering_accuracy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

METHODS = ("krtrr", "krssc", "krlrr", "dense-trr")
_REGULARIZER_BY_METHOD = {"krtrr": "frobenius", "krssc": "l1", "krlrr": "nuclear"}


def _parse_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(
                "%s:%d: expected 'key = value', got %r" % (path, lineno, raw)
            )
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            values[key.replace("-", "_")] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            values[key.replace("-", "_")] = value
    return values


def _effective(args, defaults):
    """Merge flag values over config-file values over defaults."""
    config = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    merged = dict(defaults)
    for key in defaults:
        if key in config:
            merged[key] = config[key]
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_sizes(value):
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(part) for part in str(value).split(",") if part.strip()]


def _load_dataset(cfg):
    """Points plus optional ground-truth labels from CSV or an IDX pair."""
    if cfg["idx_labels"]:
        return load_idx_images(cfg["data"], cfg["idx_labels"])
    labels = {"auto": "auto", "yes": True, "no": False}[cfg["assume_labels"]]
    return load_points_csv(cfg["data"], labels=labels)


def _make_estimator(cfg, n_clusters):
    method = cfg["method"]
    if method == "dense-trr":
        return DenseRidgeSubspaceClustering(
            n_clusters=n_clusters, lam=cfg["lam"], threshold_tau=cfg["tau"],
            random_state=cfg["seed"],
        )
    return KroneckerSubspaceClustering(
        n_clusters=n_clusters, regularizer=_REGULARIZER_BY_METHOD[method],
        lam=cfg["lam"], n_factors=cfg["k"], threshold_tau=cfg["tau"],
        max_sweeps=cfg["max_sweeps"], system_form=cfg["system_form"],
        diagonal_policy=cfg["diag_policy"], factor_split=cfg["split"],
        max_n_materialize=cfg["max_n_materialize"], random_state=cfg["seed"],
    )


def _write_json(path, payload):
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


GENERATE_DEFAULTS = {
    "n_subspaces": 5, "subspace_dim": 6, "ambient_dim": 9,
    "points_per_subspace": 100, "seed": 0, "out": "synthetic.csv",
}


def cmd_generate(args):
    cfg = _effective(args, GENERATE_DEFAULTS)
    X, labels = make_union_of_subspaces(
        cfg["n_subspaces"], cfg["subspace_dim"], cfg["ambient_dim"],
        cfg["points_per_subspace"], random_state=cfg["seed"],
    )
    save_points_csv(cfg["out"], X, labels)
    print("wrote %d points (%d subspaces, ambient dim %d) to %s [seed %d]" % (
        X.shape[0], cfg["n_subspaces"], cfg["ambient_dim"], cfg["out"], cfg["seed"]
    ))
    return EXIT_OK


CLUSTER_DEFAULTS = {
    "data": None, "idx_labels": None, "assume_labels": "auto",
    "method": "krtrr", "lam": 0.2, "k": 2, "n_clusters": None, "seed": 0,
    "trials": 10, "tau": 0.1, "system_form": "exact_sum", "max_sweeps": 50,
    "diag_policy": "auto", "split": "skewed", "max_n_materialize": 10000,
    "out_dir": "results",
}


def cmd_cluster(args):
    cfg = _effective(args, CLUSTER_DEFAULTS)
    if not cfg["data"]:
        raise ShapeError("--data is required")
    if cfg["trials"] < 1:
        raise ShapeError("--trials must be >= 1")
    X, truth = _load_dataset(cfg)
    n_clusters = cfg["n_clusters"]
    if n_clusters is None:
        if truth is None:
            raise ShapeError(
                "--n-clusters is required when the data carries no labels"
            )
        n_clusters = int(len(np.unique(truth)))
    cfg["n_clusters"] = int(n_clusters)

    # Trials rerun the pipeline on the same data with derived seeds, so the
    # report captures seed variance; the first trial provides the labels.
    seeds = np.random.SeedSequence(cfg["seed"]).spawn(cfg["trials"])
    accuracies = []
    timings = []
    first = None
    for child in seeds:
        trial_cfg = dict(cfg, seed=int(child.generate_state(1)[0]))
        estimator = _make_estimator(trial_cfg, cfg["n_clusters"])
        estimator.fit(X)
        if first is None:
            first = estimator
        timings.append(estimator.timings_)
        if truth is not None:
            accuracies.append(clustering_accuracy(estimator.labels_, truth))

    accuracy = float(np.mean(accuracies)) if accuracies else None
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    labels_path = out_dir / "labels.csv"
    np.savetxt(labels_path, first.labels_, fmt="%d")
    mean_timings = {
        key: float(np.mean([t[key] for t in timings])) for key in timings[0]
    }
    report = {
        "command": "cluster",
        "config": {k: v for k, v in cfg.items()},
        "n_points": int(X.shape[0]),
        "accuracy": accuracy,
        "accuracy_per_trial": accuracies or None,
        "accuracy_std": (
            float(np.std(accuracies, ddof=1)) if len(accuracies) > 1 else 0.0
        ),
        "timings": mean_timings,
        "labels_path": str(labels_path),
    }
    if isinstance(first, KroneckerSubspaceClustering):
        report["objective_trace"] = [float(v) for v in first.objective_trace_]
        report["factor_shape"] = [list(s) for s in first.factor_shape_]
        report["n_padded"] = int(len(first.padding_indices_))
        report["sweeps"] = first.n_iter_
    _write_json(out_dir / "report.json", report)

    print("method      %s" % cfg["method"])
    print("points      %d" % X.shape[0])
    print("clusters    %d" % cfg["n_clusters"])
    print("trials      %d" % cfg["trials"])
    if accuracy is not None:
        print("accuracy    %.2f" % accuracy)
    print("total time  %.3f s" % mean_timings["total"])
    print("report      %s" % (out_dir / "report.json"))
    return EXIT_OK


BENCH_DEFAULTS = {
    "sizes": "1024,4096", "k": 2, "method": "krtrr", "lam": 0.2, "seed": 0,
    "sweeps": 5, "repeats": 3, "baseline_cap": 4096, "out_dir": "results",
}


def cmd_bench(args):
    cfg = _effective(args, BENCH_DEFAULTS)
    if cfg["method"] == "dense-trr":
        raise ShapeError(
            "bench times the factored solver; the dense baseline is "
            "included automatically for sizes within --baseline-cap"
        )
    sizes = _parse_sizes(cfg["sizes"])
    report = scaling_bench(
        sizes, n_factors=cfg["k"],
        regularizer=_REGULARIZER_BY_METHOD[cfg["method"]], lam=cfg["lam"],
        n_sweeps=cfg["sweeps"], repeats=cfg["repeats"],
        baseline_max_n=cfg["baseline_cap"], random_state=cfg["seed"],
        method=cfg["method"],
    )
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_scaling_csv(report, out_dir / "scaling.csv")
    write_scaling_json(report, out_dir / "scaling.json", config_echo=cfg)

    print("%8s %12s %12s %12s" % ("n", "solve (s)", "dense (s)", "speedup"))
    speedups = report.speedups()
    for cell in report.cells:
        dense = "-" if cell.baseline_time is None else "%.4f" % cell.baseline_time
        gain = "-" if cell.n_points not in speedups else "%.1fx" % speedups[cell.n_points]
        print("%8d %12.4f %12s %12s" % (cell.n_points, cell.total_time, dense, gain))
    print("log-log slope: %.3f" % report.slope)
    if report.baseline_slope is not None:
        print("dense baseline slope: %.3f" % report.baseline_slope)
    print("wrote %s and %s" % (out_dir / "scaling.csv", out_dir / "scaling.json"))
    return EXIT_OK


NKP_DEFAULTS = {
    "matrix": None, "random": None, "construct_from_a": None, "seed": 0,
    "tol": 1e-10, "max_iter": 10000, "out_dir": None,
}


def cmd_nkp_check(args):
    cfg = _effective(args, NKP_DEFAULTS)
    chosen = [k for k in ("matrix", "random", "construct_from_a") if cfg[k]]
    if len(chosen) != 1:
        raise ShapeError(
            "exactly one of --matrix, --random, --construct-from-a is required"
        )
    rng = np.random.default_rng(cfg["seed"])
    source_a = None
    if cfg["matrix"]:
        c = np.loadtxt(cfg["matrix"], delimiter=",", ndmin=2)
    elif cfg["random"]:
        p = int(cfg["random"])
        c = rng.standard_normal((p * p, p * p))
    else:
        p = int(cfg["construct_from_a"])
        source_a = rng.standard_normal((p, p))
        c = kron(source_a, source_a)
    side = c.shape[0]
    p = int(round(np.sqrt(side)))
    if c.shape != (side, side) or p * p != side:
        raise ShapeError(
            "matrix must be square with a perfect-square side, got %s"
            % (c.shape,)
        )
    factor, eigval, residual = nkp_symmetric_approx(
        c, p, tol=cfg["tol"], max_iter=cfg["max_iter"]
    )
    print("matrix side      %d (blocks of %d)" % (side, p))
    print("dominant eigval  %.6g" % eigval)
    print("factor trace     %.6g" % np.trace(factor))
    print("residual         %.3e" % residual)
    recovery = None
    if source_a is not None:
        recovery = float(min(
            np.linalg.norm(factor - source_a), np.linalg.norm(factor + source_a)
        ))
        print("recovery error   %.3e" % recovery)
    if cfg["out_dir"]:
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "nkp.json", {
            "command": "nkp-check",
            "config": {k: v for k, v in cfg.items()},
            "eigval": float(eigval),
            "residual": float(residual),
            "factor_trace": float(np.trace(factor)),
            "recovery_error": recovery,
        })
    return EXIT_OK


def _load_label_file(path):
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data[:, -1].astype(int)


def cmd_eval(args):
    pred = _load_label_file(args.pred)
    truth = _load_label_file(args.truth)
    print("accuracy %.2f" % clustering_accuracy(pred, truth))
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--config", help="key = value option file; flags win")
    parser.add_argument("--seed", type=int, help="master random seed (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kronclust",
        description="Kronecker-factored subspace clustering toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic union-of-subspaces CSV")
    _add_common(p)
    p.add_argument("--n-subspaces", type=int)
    p.add_argument("--subspace-dim", type=int)
    p.add_argument("--ambient-dim", type=int)
    p.add_argument("--points-per-subspace", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="run the clustering pipeline on a dataset")
    _add_common(p)
    p.add_argument("--data", help="points CSV (row per point, optional label column)")
    p.add_argument("--idx-labels",
                   help="treat --data as an IDX image file with this IDX label file")
    p.add_argument("--assume-labels", choices=("auto", "yes", "no"),
                   help="whether the CSV's last column is labels")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--n-clusters", type=int)
    p.add_argument("--trials", type=int,
                   help="rerun with derived seeds and report trial statistics")
    p.add_argument("--tau", type=float)
    p.add_argument("--system-form", choices=("exact_sum", "paper_aggregate"))
    p.add_argument("--max-sweeps", type=int)
    p.add_argument("--diag-policy", choices=("auto", "all", "inner", "none"))
    p.add_argument("--split", choices=("skewed", "balanced"))
    p.add_argument("--max-n-materialize", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("bench", help="runtime scaling study with dense baseline")
    _add_common(p)
    p.add_argument("--sizes", help="comma-separated sample counts, increasing")
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--baseline-cap", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("nkp-check",
                       help="rank-one Kronecker approximation of a square matrix")
    _add_common(p)
    p.add_argument("--matrix", help="CSV file holding a p^2 x p^2 matrix")
    p.add_argument("--random", type=int, metavar="P",
                   help="use a random p^2 x p^2 matrix")
    p.add_argument("--construct-from-a", type=int, metavar="P",
                   help="build the input from a random p x p factor")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_nkp_check)

    p = sub.add_parser("eval", help="accuracy between predicted and true labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IdxFormatError, DegenerateDataError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except (ApproximationError, NumericalError, SizeLimitError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    except (ShapeError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except KronClustError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
