"""Scikit-learn style estimators for the full clustering pipeline.

``KroneckerSubspaceClustering`` learns a Kronecker-factored self-representation
and clusters its spectral embedding; ``DenseRidgeSubspaceClustering`` is the
cubic-cost dense ridge reference that the factored model is benchmarked
against.
"""

import time

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array

from .benchmark import dense_baseline_solve
from .data import pad_points, plan_factor_shape
from .solver import solve_factors, threshold_factors
from .spectral import (
    DEFAULT_MAX_N_MATERIALIZE,
    affinity_from_factors,
    affinity_from_matrix,
    kmeans_labels,
    normalized_laplacian,
    spectral_embed,
)


def _seed_ints(random_state, count):
    children = np.random.SeedSequence(random_state).spawn(count)
    return [int(c.generate_state(1)[0]) for c in children]


class KroneckerSubspaceClustering(ClusterMixin, BaseEstimator):
    """Subspace clustering with a Kronecker-factored coefficient matrix.

    Fits small factors whose Kronecker product acts as the N x N
    self-representation matrix, thresholds them, builds the symmetric
    affinity ``|C| + |C|^T`` with a zeroed diagonal, and clusters the rows of
    the normalized-Laplacian spectral embedding with k-means. Sample counts
    that admit no balanced factorization are handled by duplicating a few
    points internally; ``labels_`` always covers exactly the input rows.

    Parameters
    ----------
    n_clusters : int, default=5
        Number of clusters.
    regularizer : {"frobenius", "l1", "nuclear"}, default="frobenius"
        Penalty on the coefficient matrix: "frobenius" is the ridge variant,
        "l1" the sparse variant, "nuclear" the low-rank variant.
    lam : float, default=0.2
        Penalty weight.
    n_factors : int, default=2
        Number of Kronecker factors (>= 2). Larger values cut solve cost at
        some accuracy cost.
    threshold_tau : float, default=0.1
        Relative magnitude below which factor entries are truncated before
        the affinity is built; in [0, 1).
    max_sweeps : int, default=50
    rel_tol : float, default=1e-6
        Solver termination controls, see :func:`kronclust.solver.solve_factors`.
    system_form : {"exact_sum", "paper_aggregate"}, default="exact_sum"
    prox_steps : int, default=200
    prox_tol : float, default=1e-8
    fold_penalty : "auto", True, or False, default="auto"
    diagonal_policy : {"auto", "all", "inner", "none"}, default="auto"
        Which factors get a zero-diagonal constraint. Zeroing any factor
        diagonal rules out the trivial identity representation. "auto" zeroes
        all factor diagonals when every cluster is expected to span several
        coarse blocks (n_clusters < leading factor dimension) and otherwise
        keeps the leading factor's diagonal free so that points inside one
        coarse block can still express each other.
    factor_split : {"skewed", "balanced"}, default="skewed"
        Factorization policy for the sample count, see
        :func:`kronclust.data.plan_factor_shape`.
    kmeans_restarts : int, default=20
        Number of k-means restarts; the best run by inertia wins.
    row_normalize : bool, default=True
        Scale embedding rows to unit length before k-means.
    max_n_materialize : int, default=10000
        Refuse to materialize the affinity beyond this many points.
    random_state : int or None, default=None
        Seeds initialization, padding choices, and k-means.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Cluster assignment per input row.
    factors_ : list of ndarray
        Learned factors (before thresholding).
    objective_trace_ : list of float
        Objective at initialization plus one value per sweep.
    factor_shape_ : list of (int, int)
        Planned factor dimensions.
    padding_indices_ : ndarray
        Source row of each internally duplicated point (empty if none).
    affinity_matrix_ : ndarray
        The symmetric affinity the embedding was computed from.
    embedding_ : ndarray
        Spectral embedding rows fed to k-means.
    timings_ : dict
        Wall-clock seconds per pipeline stage.
    n_iter_ : int
        Number of completed sweeps.
    """

    def __init__(self, n_clusters=5, regularizer="frobenius", lam=0.2,
                 n_factors=2, threshold_tau=0.1, max_sweeps=50, rel_tol=1e-6,
                 system_form="exact_sum", prox_steps=200, prox_tol=1e-8,
                 fold_penalty="auto", diagonal_policy="auto",
                 factor_split="skewed", kmeans_restarts=20, row_normalize=True,
                 max_n_materialize=DEFAULT_MAX_N_MATERIALIZE, random_state=None):
        self.n_clusters = n_clusters
        self.regularizer = regularizer
        self.lam = lam
        self.n_factors = n_factors
        self.threshold_tau = threshold_tau
        self.max_sweeps = max_sweeps
        self.rel_tol = rel_tol
        self.system_form = system_form
        self.prox_steps = prox_steps
        self.prox_tol = prox_tol
        self.fold_penalty = fold_penalty
        self.diagonal_policy = diagonal_policy
        self.factor_split = factor_split
        self.kmeans_restarts = kmeans_restarts
        self.row_normalize = row_normalize
        self.max_n_materialize = max_n_materialize
        self.random_state = random_state

    def _resolve_diagonal_policy(self, shape):
        if self.diagonal_policy == "auto":
            return "all" if self.n_clusters < shape[0][0] else "inner"
        if self.diagonal_policy in ("all", "inner", "none"):
            return self.diagonal_policy
        raise ValueError(
            "diagonal_policy must be 'auto', 'all', 'inner', or 'none', "
            "got %r" % self.diagonal_policy
        )

    def fit(self, X, y=None):
        """Learn factors from ``X`` and assign cluster labels.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)

        Returns
        -------
        self
        """
        X = check_array(X, dtype=np.float64)
        if self.n_factors < 2:
            raise ValueError("n_factors must be >= 2; use "
                             "DenseRidgeSubspaceClustering for the dense model")
        if not 1 <= self.n_clusters <= X.shape[0]:
            raise ValueError("n_clusters must be in [1, n_samples]")
        n = X.shape[0]
        pad_seed, solver_seed, kmeans_seed = _seed_ints(self.random_state, 3)
        timings = {}
        total_tic = time.perf_counter()

        tic = time.perf_counter()
        shape, pad = plan_factor_shape(
            n, self.n_factors, random_state=pad_seed, split=self.factor_split
        )
        diag_mode = self._resolve_diagonal_policy(shape)
        padded = pad_points(X, pad)
        timings["prepare"] = time.perf_counter() - tic

        result = solve_factors(
            padded, shape,
            regularizer=self.regularizer, lam=self.lam,
            max_sweeps=self.max_sweeps, rel_tol=self.rel_tol,
            system_form=self.system_form, prox_steps=self.prox_steps,
            prox_tol=self.prox_tol, fold_penalty=self.fold_penalty,
            zero_diagonal=diag_mode, random_state=solver_seed,
        )
        timings["solve"] = result.total_time
        timings["solve_assembly"] = result.assembly_time
        timings["solve_updates"] = result.solve_time

        tic = time.perf_counter()
        thresholded = threshold_factors(result.factors, self.threshold_tau)
        timings["threshold"] = time.perf_counter() - tic

        tic = time.perf_counter()
        affinity = affinity_from_factors(thresholded, self.max_n_materialize)
        timings["affinity"] = time.perf_counter() - tic

        tic = time.perf_counter()
        lap = normalized_laplacian(affinity)
        timings["laplacian"] = time.perf_counter() - tic

        tic = time.perf_counter()
        embedding = spectral_embed(lap, self.n_clusters, self.row_normalize)
        timings["embedding"] = time.perf_counter() - tic

        tic = time.perf_counter()
        labels = kmeans_labels(
            embedding, self.n_clusters, self.kmeans_restarts, kmeans_seed
        )
        timings["kmeans"] = time.perf_counter() - tic
        timings["total"] = time.perf_counter() - total_tic

        self.labels_ = labels[:n]
        self.factors_ = result.factors
        self.objective_trace_ = result.objective_trace
        self.factor_shape_ = shape
        self.diagonal_mode_ = diag_mode
        self.padding_indices_ = pad
        self.affinity_matrix_ = affinity
        self.embedding_ = embedding
        self.timings_ = timings
        self.n_iter_ = len(result.objective_trace) - 1
        return self


class DenseRidgeSubspaceClustering(ClusterMixin, BaseEstimator):
    """Dense ridge self-representation baseline (cubic cost in n_samples).

    Solves the full N x N ridge problem in closed form, thresholds the
    coefficients, and runs the same affinity/Laplacian/embedding/k-means
    stages as the factored estimator. Capped at ``max_n`` samples.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    representation_matrix_ : ndarray of shape (n_samples, n_samples)
    timings_ : dict
    """

    def __init__(self, n_clusters=5, lam=0.2, threshold_tau=0.1,
                 kmeans_restarts=20, row_normalize=True, max_n=4096,
                 random_state=None):
        self.n_clusters = n_clusters
        self.lam = lam
        self.threshold_tau = threshold_tau
        self.kmeans_restarts = kmeans_restarts
        self.row_normalize = row_normalize
        self.max_n = max_n
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if not 1 <= self.n_clusters <= X.shape[0]:
            raise ValueError("n_clusters must be in [1, n_samples]")
        (kmeans_seed,) = _seed_ints(self.random_state, 1)
        timings = {}
        total_tic = time.perf_counter()

        tic = time.perf_counter()
        coeff = dense_baseline_solve(X, self.lam, self.max_n)
        timings["solve"] = time.perf_counter() - tic

        tic = time.perf_counter()
        coeff_thr = threshold_factors([coeff], self.threshold_tau)[0]
        affinity = affinity_from_matrix(coeff_thr)
        timings["affinity"] = time.perf_counter() - tic

        tic = time.perf_counter()
        lap = normalized_laplacian(affinity)
        embedding = spectral_embed(lap, self.n_clusters, self.row_normalize)
        timings["embedding"] = time.perf_counter() - tic

        tic = time.perf_counter()
        labels = kmeans_labels(
            embedding, self.n_clusters, self.kmeans_restarts, kmeans_seed
        )
        timings["kmeans"] = time.perf_counter() - tic
        timings["total"] = time.perf_counter() - total_tic

        self.labels_ = labels
        self.representation_matrix_ = coeff
        self.affinity_matrix_ = affinity
        self.timings_ = timings
        return self
