"""Kronecker-product algebra.

Dense products, the column-major vec/unvec pair, structured vector products
that avoid materializing large Kronecker products, multiplicative norm
identities, and the rank-one symmetric Kronecker approximation of a square
matrix.

All vec/reshape operations in this module are column-major. The structured
product identities below fail under row-major conventions, so every reshape
is explicit about ``order="F"``.
"""

import numpy as np

from .exceptions import ApproximationError, ShapeError, SizeLimitError

# Refuse dense results above ~0.8 GB of float64 unless the caller raises the cap.
DEFAULT_MAX_ENTRIES = 100_000_000

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_ITER = 10_000


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeError("%s must be 2-D, got shape %s" % (name, (a.shape,)))
    if not np.all(np.isfinite(a)):
        raise ValueError("%s contains non-finite entries" % name)
    return a


def _check_result_size(rows, cols, max_entries):
    if max_entries is not None and rows * cols > max_entries:
        raise SizeLimitError(
            "materializing a %d x %d matrix (%d entries) exceeds the cap of "
            "%d entries" % (rows, cols, rows * cols, max_entries)
        )


def kron(a, b, max_entries=DEFAULT_MAX_ENTRIES):
    """Kronecker product whose (i, j) block equals ``a[i, j] * b``.

    Raises SizeLimitError when the dense result would exceed ``max_entries``.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    _check_result_size(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], max_entries)
    return np.kron(a, b)


def kron_all(factors, max_entries=DEFAULT_MAX_ENTRIES):
    """Left fold of ``kron`` over a nonempty list of matrices."""
    if len(factors) == 0:
        raise ShapeError("kron_all requires at least one factor")
    mats = [_as_matrix(f, "factor %d" % i) for i, f in enumerate(factors)]
    rows = int(np.prod([m.shape[0] for m in mats]))
    cols = int(np.prod([m.shape[1] for m in mats]))
    _check_result_size(rows, cols, max_entries)
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def vec(m):
    """Stack the columns of ``m`` into a single vector."""
    return np.asarray(m, dtype=float).reshape(-1, order="F")


def unvec(a, rows, cols):
    """Column-major reshape of a vector into a ``rows x cols`` matrix.

    Inverse of :func:`vec`.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != rows * cols:
        raise ShapeError(
            "cannot reshape length-%d vector to %d x %d" % (a.size, rows, cols)
        )
    return a.reshape(rows, cols, order="F")


def kron_vec_product(a, c1, c2):
    """Row-vector product ``a^T (c1 kron c2)`` without forming the product.

    Uses the reshape identity: with M the column-major ``p2 x p1`` reshape of
    ``a``, the result is ``vec(c2^T M c1)``. Exact up to floating-point
    rounding.
    """
    c1 = _as_matrix(c1, "c1")
    c2 = _as_matrix(c2, "c2")
    a = np.asarray(a, dtype=float).reshape(-1)
    p1, _ = c1.shape
    p2, _ = c2.shape
    if a.size != p1 * p2:
        raise ShapeError(
            "vector length %d does not match row dimensions %d * %d"
            % (a.size, p1, p2)
        )
    m = a.reshape(p2, p1, order="F")
    return (c2.T @ m @ c1).reshape(-1, order="F")


def kron_matvec(factors, x):
    """Product of ``kron_all(factors)`` with ``x`` without materialization.

    ``x`` may be a vector of length ``prod(cols)`` or a matrix whose first
    axis has that length; in the matrix case every column is transformed.
    """
    if len(factors) == 0:
        raise ShapeError("kron_matvec requires at least one factor")
    mats = [np.asarray(f, dtype=float) for f in factors]
    x = np.asarray(x, dtype=float)
    in_dim = int(np.prod([m.shape[1] for m in mats]))
    if x.shape[0] != in_dim:
        raise ShapeError(
            "operand first axis %d does not match factor columns product %d"
            % (x.shape[0], in_dim)
        )
    batched = x.ndim == 2
    shape = [m.shape[1] for m in mats] + ([x.shape[1]] if batched else [])
    t = x.reshape(shape)
    for axis, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    out_dim = int(np.prod([m.shape[0] for m in mats]))
    return t.reshape(out_dim, -1) if batched else t.reshape(out_dim)


def frobenius_norm(m):
    return float(np.linalg.norm(np.asarray(m, dtype=float), "fro"))


def l1_norm(m):
    """Entrywise l1 norm (sum of absolute values)."""
    return float(np.abs(np.asarray(m, dtype=float)).sum())


def nuclear_norm(m):
    """Sum of singular values."""
    m = np.asarray(m, dtype=float)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def _blocks(c, p):
    c = _as_matrix(c, "c")
    if c.shape != (p * p, p * p):
        raise ShapeError(
            "expected a %d x %d matrix, got %s" % (p * p, p * p, (c.shape,))
        )
    # axes: (block row, row within block, block col, col within block)
    return c.reshape(p, p, p, p)


def nkp_rearrange(c, p):
    """Rearrange a ``p^2 x p^2`` matrix into columns of vectorized blocks.

    The input is partitioned into a ``p x p`` grid of ``p x p`` blocks; column
    ``i*p + j`` of the output is ``vec`` of block ``(i, j)``, so the columns
    enumerate blocks row-by-row. For inputs of the form ``kron(a, a)`` the
    result has rank one.
    """
    blocks = _blocks(c, p)
    # out[(cj*p + ri), (bi*p + bj)] = c[(bi*p + ri), (bj*p + cj)]
    return blocks.transpose(3, 1, 0, 2).reshape(p * p, p * p)


def _symmetric_rearrange(c, p):
    """Rearrangement whose symmetric part drives the rank-one approximation.

    Columns are indexed by the column-major position of each block, so that
    ``kron(a, a)`` maps to the symmetric outer product ``vec(a) vec(a)^T``.
    Differs from :func:`nkp_rearrange` by a column permutation and transpose.
    """
    blocks = _blocks(c, p)
    m = blocks.transpose(2, 0, 3, 1).reshape(p * p, p * p)
    return 0.5 * (m + m.T)


def _power_iteration(s, tol, max_iter):
    """Dominant eigenpair of a symmetric matrix, deterministic all-ones start.

    A Gershgorin diagonal shift makes the iteration converge to the most
    positive eigenvalue rather than the largest in magnitude.
    """
    n = s.shape[0]
    shift = float(np.abs(s).sum(axis=1).max())
    x = np.full(n, 1.0 / np.sqrt(n))
    if shift == 0.0:
        raise ApproximationError(
            "matrix has zero spectrum; no dominant eigenpair", iterate=x
        )
    for _ in range(max_iter):
        y = s @ x + shift * x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            raise ApproximationError(
                "power iteration collapsed to the zero vector", iterate=x
            )
        y /= norm
        if np.linalg.norm(y - x) < tol:
            return float(y @ s @ y), y
        x = y
    raise ApproximationError(
        "power iteration did not converge within %d iterations" % max_iter,
        iterate=x,
    )


def nkp_symmetric_approx(c, p, tol=POWER_ITERATION_TOL, max_iter=POWER_ITERATION_MAX_ITER):
    """Best symmetric rank-one Kronecker approximation ``a kron a`` of ``c``.

    Solves the first-order condition of ``min_a ||a kron a - c||_F^2``: the
    vectorized factor is the dominant eigenvector of the (symmetrized)
    block rearrangement of ``c`` and its squared Frobenius norm equals the
    dominant eigenvalue. The sign is fixed so that ``trace(a) >= 0``.

    Returns ``(a, eigval, residual)`` with
    ``residual = ||a kron a - c||_F / ||c||_F``.

    Raises ApproximationError when the dominant eigenvalue is not positive or
    the power iteration fails to converge; the error carries the last iterate.
    """
    c = _as_matrix(c, "c")
    s = _symmetric_rearrange(c, p)
    eigval, v = _power_iteration(s, tol, max_iter)
    if eigval <= 0.0:
        raise ApproximationError(
            "dominant eigenvalue %g is not positive" % eigval,
            iterate=unvec(v, p, p),
        )
    a = np.sqrt(eigval) * unvec(v, p, p)
    if np.trace(a) < 0.0:
        a = -a
    residual = float(
        np.linalg.norm(np.kron(a, a) - c, "fro") / np.linalg.norm(c, "fro")
    )
    return a, eigval, residual
