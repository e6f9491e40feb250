"""Clustering accuracy and multi-trial experiment orchestration."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import ShapeError


def _check_labels(labels, name):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ShapeError("%s must be 1-D" % name)
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        as_int = labels.astype(int)
        if np.any(as_int != labels):
            raise ValueError("%s contains non-integer labels" % name)
        labels = as_int
    if labels.size and labels.min() < 0:
        raise ValueError("%s contains negative labels" % name)
    return labels.astype(int)


def confusion_matrix(pred, truth):
    """Square count matrix over the union of the two label domains."""
    pred = _check_labels(pred, "pred")
    truth = _check_labels(truth, "truth")
    if pred.shape[0] != truth.shape[0]:
        raise ShapeError(
            "label length mismatch: %d vs %d" % (pred.shape[0], truth.shape[0])
        )
    size = int(max(pred.max(initial=-1), truth.max(initial=-1))) + 1
    counts = np.zeros((size, size), dtype=int)
    np.add.at(counts, (pred, truth), 1)
    return counts


def clustering_accuracy(pred, truth, exclude=None):
    """Percent of points matched under the best label permutation.

    The optimal alignment between predicted and true label ids is found by
    solving the assignment problem on the confusion matrix, so the score is
    invariant to relabeling on either side. ``exclude`` removes indices (for
    example internally padded duplicates) before scoring.

    Returns
    -------
    float
        Accuracy in percent, in [0, 100].
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(
            "label length mismatch: %s vs %s" % (pred.shape, truth.shape)
        )
    if exclude is not None and len(exclude):
        keep = np.ones(pred.shape[0], dtype=bool)
        keep[np.asarray(list(exclude), dtype=int)] = False
        pred, truth = pred[keep], truth[keep]
    if pred.size == 0:
        raise ValueError("no points left to score")
    counts = confusion_matrix(pred, truth)
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return 100.0 * counts[rows, cols].sum() / pred.size


@dataclass
class TrialStats:
    """Per-trial accuracies and stage timings with summary statistics.

    Failed trials are recorded in ``failures`` as ``(trial_index, message)``
    and excluded from the statistics.
    """

    accuracies: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    n_trials: int = 0

    @property
    def mean_accuracy(self):
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std_accuracy(self):
        if len(self.accuracies) < 2:
            return 0.0
        return float(np.std(self.accuracies, ddof=1))

    def mean_timings(self):
        """Per-stage mean wall time over successful trials."""
        if not self.timings:
            return {}
        keys = self.timings[0].keys()
        return {k: float(np.mean([t[k] for t in self.timings])) for k in keys}

    def to_dict(self):
        return {
            "n_trials": self.n_trials,
            "accuracies": [float(a) for a in self.accuracies],
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_timings": self.mean_timings(),
            "failures": [list(f) for f in self.failures],
        }


def run_trials(data_factory, estimator_factory, n_trials=10, random_state=None):
    """Repeat the full pipeline on freshly sampled data.

    Each trial draws two child seeds from the master seed, calls
    ``data_factory(seed) -> (X, truth)`` and ``estimator_factory(seed)``,
    fits, and scores against the truth. Trials run sequentially; a failing
    trial is recorded and the remaining trials still run. Deterministic for
    a fixed integer ``random_state``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    stats = TrialStats(n_trials=n_trials)
    for trial, child in enumerate(np.random.SeedSequence(random_state).spawn(n_trials)):
        data_seed, est_seed = (int(s.generate_state(1)[0]) for s in child.spawn(2))
        try:
            X, truth = data_factory(data_seed)
            estimator = estimator_factory(est_seed)
            estimator.fit(X)
            accuracy = clustering_accuracy(estimator.labels_, truth)
        except Exception as exc:  # noqa: BLE001 - recorded, not swallowed silently
            stats.failures.append((trial, repr(exc)))
            continue
        stats.accuracies.append(accuracy)
        stats.timings.append(dict(getattr(estimator, "timings_", {})))
    return stats
