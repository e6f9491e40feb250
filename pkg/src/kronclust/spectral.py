"""Spectral clustering stages: affinity, normalized Laplacian, embedding, k-means.

Turns a learned factor set into cluster labels. The affinity is built from
the factors' absolute values (absolute value distributes over Kronecker
products), symmetrized, and its diagonal zeroed to rule out trivial
self-affinity.
"""

import numpy as np
import scipy.sparse.linalg
from sklearn.cluster import KMeans

from . import kronecker as kr
from .exceptions import ShapeError, SizeLimitError

DEFAULT_MAX_N_MATERIALIZE = 10_000

# Above this size the embedding uses a Lanczos solver when only a few
# eigenvectors are needed.
_DENSE_EIG_CUTOFF = 2048


def affinity_from_factors(factors, max_n=DEFAULT_MAX_N_MATERIALIZE):
    """Symmetric nonnegative affinity ``|C| + |C|^T`` with a zero diagonal.

    ``|C|`` is materialized as the Kronecker product of the factors' absolute
    values, which is exact. Refuses to materialize beyond ``max_n`` points.
    """
    factors = [np.asarray(f, dtype=float) for f in factors]
    n_rows = int(np.prod([f.shape[0] for f in factors]))
    n_cols = int(np.prod([f.shape[1] for f in factors]))
    if n_rows != n_cols:
        raise ShapeError(
            "factors imply a %d x %d coefficient matrix; it must be square"
            % (n_rows, n_cols)
        )
    if max_n is not None and n_rows > max_n:
        raise SizeLimitError(
            "materializing a %d x %d affinity exceeds the cap of %d points"
            % (n_rows, n_rows, max_n)
        )
    c_abs = kr.kron_all([np.abs(f) for f in factors], max_entries=None)
    w = c_abs + c_abs.T
    np.fill_diagonal(w, 0.0)
    return w


def affinity_from_matrix(coefficients):
    """``|C| + |C|^T`` with a zeroed diagonal, from a dense coefficient matrix."""
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError("coefficient matrix must be square, got %s" % (c.shape,))
    w = np.abs(c)
    w = w + w.T
    np.fill_diagonal(w, 0.0)
    return w


def check_affinity(w, tol=1e-12):
    """Validate symmetry, nonnegativity, and zero diagonal of an affinity."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ShapeError("affinity must be square, got %s" % (w.shape,))
    scale = max(1.0, float(np.abs(w).max()) if w.size else 0.0)
    if np.abs(w - w.T).max(initial=0.0) > tol * scale:
        raise ValueError("affinity is not symmetric within tolerance")
    if w.size and w.min() < 0.0:
        raise ValueError("affinity has negative entries")
    if np.abs(np.diag(w)).max(initial=0.0) > 0.0:
        raise ValueError("affinity diagonal is not zero")
    return w


def normalized_laplacian(w):
    """Symmetric normalized Laplacian ``I - D^{-1/2} W D^{-1/2}``.

    Vertices with zero degree keep an identity row/column (isolated-vertex
    convention), so ``W = 0`` yields the identity.
    """
    w = check_affinity(w)
    degrees = w.sum(axis=1)
    inv_sqrt = np.zeros_like(degrees)
    positive = degrees > 0.0
    inv_sqrt[positive] = 1.0 / np.sqrt(degrees[positive])
    lap = -(w * inv_sqrt[:, None]) * inv_sqrt[None, :]
    np.fill_diagonal(lap, 1.0)
    return 0.5 * (lap + lap.T)


def spectral_embed(lap, n_components, row_normalize=True):
    """Eigenvectors of the ``n_components`` smallest Laplacian eigenvalues.

    Columns are orthonormal; with ``row_normalize`` each nonzero row is then
    scaled to unit length (zero rows are kept as zero). Uses a dense solver
    for small problems and a Lanczos solver for large ones, falling back to
    the dense path if Lanczos fails to converge.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ShapeError("Laplacian must be square, got %s" % (lap.shape,))
    n = lap.shape[0]
    if not 1 <= n_components <= n:
        raise ShapeError(
            "cannot extract %d eigenvectors from a %d-point graph"
            % (n_components, n)
        )
    vectors = None
    if n > _DENSE_EIG_CUTOFF and n_components < n // 10:
        # Largest eigenpairs of 2I - L are the smallest of L; Lanczos
        # converges much faster at that end of the spectrum.
        shifted = 2.0 * np.eye(n) - lap
        start = np.full(n, 1.0 / np.sqrt(n))
        try:
            values, vectors = scipy.sparse.linalg.eigsh(
                shifted, k=n_components, which="LA", v0=start
            )
            vectors = vectors[:, np.argsort(2.0 - values)]
        except scipy.sparse.linalg.ArpackError:
            vectors = None
    if vectors is None:
        _, eigvecs = np.linalg.eigh(lap)
        vectors = eigvecs[:, :n_components]
    if row_normalize:
        norms = np.linalg.norm(vectors, axis=1)
        positive = norms > 0.0
        vectors = vectors.copy()
        vectors[positive] /= norms[positive, None]
    return vectors


def kmeans_labels(embedding, n_clusters, restarts=20, random_state=None):
    """Best-of-``restarts`` k-means on the embedding rows.

    Uses k-means++ seeding with at most 300 iterations per run and picks the
    run with the lowest within-cluster sum of squares. Deterministic for a
    fixed integer seed; empty clusters are reseeded internally from far
    points.
    """
    embedding = np.asarray(embedding, dtype=float)
    km = KMeans(
        n_clusters=n_clusters,
        init="k-means++",
        n_init=restarts,
        max_iter=300,
        random_state=random_state,
    )
    return km.fit_predict(embedding)
