"""Subspace clustering with a Kronecker-factored self-representation matrix.

The N x N coefficient matrix of the self-expressive model ``X ~ X C`` is
parameterized as a Kronecker product of small factors, cutting the solve
cost from cubic in the sample count to roughly ``k * N^(3/k)``. The package
bundles the factor solver, the spectral clustering pipeline around it,
synthetic and IDX data handling, accuracy metrics, and a scaling benchmark.
"""

from .benchmark import ScalingReport, dense_baseline_solve, scaling_bench
from .cluster import DenseRidgeSubspaceClustering, KroneckerSubspaceClustering
from .data import (
    load_idx_images,
    load_points_csv,
    make_synthetic_total,
    make_union_of_subspaces,
    normalize_points,
    plan_factor_shape,
    save_idx_images,
    save_points_csv,
)
from .kronecker import (
    kron,
    kron_all,
    kron_matvec,
    kron_vec_product,
    nkp_rearrange,
    nkp_symmetric_approx,
    unvec,
    vec,
)
from .metrics import TrialStats, clustering_accuracy, run_trials
from .solver import (
    FactorizationResult,
    build_ridge_system,
    objective,
    solve_factors,
    threshold_factors,
    update_factor_prox,
    update_factor_ridge,
)
from .spectral import (
    affinity_from_factors,
    affinity_from_matrix,
    kmeans_labels,
    normalized_laplacian,
    spectral_embed,
)

__version__ = "0.1.0"

__all__ = [
    "DenseRidgeSubspaceClustering",
    "FactorizationResult",
    "KroneckerSubspaceClustering",
    "ScalingReport",
    "TrialStats",
    "affinity_from_factors",
    "affinity_from_matrix",
    "build_ridge_system",
    "clustering_accuracy",
    "dense_baseline_solve",
    "kmeans_labels",
    "kron",
    "kron_all",
    "kron_matvec",
    "kron_vec_product",
    "load_idx_images",
    "load_points_csv",
    "make_synthetic_total",
    "make_union_of_subspaces",
    "nkp_rearrange",
    "nkp_symmetric_approx",
    "normalize_points",
    "normalized_laplacian",
    "objective",
    "plan_factor_shape",
    "run_trials",
    "save_idx_images",
    "save_points_csv",
    "scaling_bench",
    "solve_factors",
    "spectral_embed",
    "threshold_factors",
    "unvec",
    "update_factor_prox",
    "update_factor_ridge",
    "vec",
]
