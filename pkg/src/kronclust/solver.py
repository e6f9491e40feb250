"""Alternating block-coordinate solver for Kronecker-factored self-representation.

Learns small factors whose Kronecker product plays the role of the N x N
coefficient matrix in the self-expressive model ``X ~ X C``, under a squared
Frobenius, entrywise l1, or nuclear norm penalty on the full product.

Data layout: ``X`` has one sample per row, shape ``(n_samples, n_features)``.
The per-feature columns of ``X`` (length ``n_samples``) are the vectors the
reshape identities operate on.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kronecker as kr
from .exceptions import (
    DegenerateFactorError,
    DivergenceError,
    RankDeficiencyError,
    ShapeError,
)

REGULARIZERS = ("frobenius", "l1", "nuclear")
SYSTEM_FORMS = ("exact_sum", "paper_aggregate")

_FACTOR_NORMS = {
    "frobenius": kr.frobenius_norm,
    "l1": kr.l1_norm,
    "nuclear": kr.nuclear_norm,
}


@dataclass
class FactorizationResult:
    """Learned factors plus the per-sweep objective trace and phase timings.

    The trace holds the objective the sweeps minimize: the product-penalty
    form when the penalty is folded, the additive per-factor form otherwise.
    """

    factors: list
    objective_trace: list
    assembly_time: float = 0.0
    solve_time: float = 0.0
    total_time: float = 0.0


def _check_shape(shape, n_samples):
    shape = [(int(p), int(q)) for p, q in shape]
    if len(shape) < 1:
        raise ShapeError("factor shape list is empty")
    for p, q in shape:
        if p < 1 or q < 1:
            raise ShapeError("factor dimensions must be >= 1, got %s" % (shape,))
    rows = int(np.prod([p for p, _ in shape]))
    cols = int(np.prod([q for _, q in shape]))
    if rows != n_samples or cols != n_samples:
        raise ShapeError(
            "factor shape %s implies a %d x %d coefficient matrix but the "
            "data has %d samples" % (shape, rows, cols, n_samples)
        )
    return shape


def _check_factors(factors):
    factors = [np.asarray(f, dtype=float) for f in factors]
    for f in factors:
        if f.ndim != 2:
            raise ShapeError("factors must be 2-D matrices")
    return factors


def _resolve_fold(fold_penalty, regularizer):
    # The folded l1 weight grows with the entry count of the fixed factors,
    # which drives the soft threshold far past every coefficient at practical
    # lam; the per-factor penalty is the usable default there.
    if fold_penalty == "auto":
        return regularizer != "l1"
    return bool(fold_penalty)


def _resolve_zero_diagonal(zero_diagonal, shape):
    n_factors = len(shape)
    if zero_diagonal is None or zero_diagonal == "none":
        return frozenset()
    if zero_diagonal == "all":
        idx = frozenset(range(n_factors))
    elif zero_diagonal == "inner":
        idx = frozenset(range(1, n_factors))
    else:
        idx = frozenset(int(j) for j in zero_diagonal)
        if any(j < 0 or j >= n_factors for j in idx):
            raise ShapeError("zero_diagonal indices out of range")
    # A 1 x 1 factor has no off-diagonal entries, so pinning its diagonal
    # would annihilate the factor instead of suppressing self-loops.
    return frozenset(j for j in idx if min(shape[j]) > 1)


def penalty(factors, regularizer="frobenius"):
    """Penalty of the full Kronecker product, via the factor-norm identities.

    Squared Frobenius norms multiply across factors, as do entrywise l1 and
    nuclear norms, so no product is ever materialized.
    """
    norm = _FACTOR_NORMS[regularizer]
    out = 1.0
    for f in factors:
        value = norm(f)
        out *= value * value if regularizer == "frobenius" else value
    return out


def _fidelity(X, factors):
    reconstructed = kr.kron_matvec([f.T for f in factors], X)
    return float(((X - reconstructed) ** 2).sum())


def objective(X, factors, lam, regularizer="frobenius"):
    """Self-representation objective: fidelity plus ``lam`` times the penalty.

    The fidelity ``||X^T - X^T C||_F^2`` is accumulated feature-by-feature
    through structured Kronecker products, never materializing ``C``.
    """
    if regularizer not in REGULARIZERS:
        raise ValueError("unknown regularizer %r" % regularizer)
    X = np.asarray(X, dtype=float)
    factors = _check_factors(factors)
    return _fidelity(X, factors) + lam * penalty(factors, regularizer)


def _sweep_objective(X, factors, lam, regularizer, fold):
    """Objective that the block sweeps actually minimize.

    Folded updates descend the product-penalty objective; un-folded updates
    descend the additive per-factor penalty instead, so termination must be
    keyed on that form.
    """
    if fold:
        return objective(X, factors, lam, regularizer)
    norm = _FACTOR_NORMS[regularizer]
    total = 0.0
    for f in factors:
        value = norm(f)
        total += value * value if regularizer == "frobenius" else value
    return _fidelity(X, factors) + lam * total


def build_ridge_system(X, factors, j, system_form="exact_sum"):
    """Normal equations for factor ``j`` with the other factors held fixed.

    Returns ``(gram, rhs)`` such that the data-fidelity term, as a function
    of factor ``j`` alone, equals ``trace(C^T gram C) - 2 trace(C^T rhs)`` up
    to an additive constant. With ``system_form="exact_sum"`` the per-feature
    normal equations are summed exactly; ``"paper_aggregate"`` first sums the
    reshaped feature blocks and then forms a single normal equation, which is
    cheaper but no longer minimizes the exact sum when ``n_features > 1``.

    The fixed factors are applied one at a time as tensor contractions, so no
    grouped Kronecker product is ever materialized.
    """
    if system_form not in SYSTEM_FORMS:
        raise ValueError("unknown system form %r" % system_form)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be 2-D (n_samples, n_features)")
    factors = _check_factors(factors)
    if not 0 <= j < len(factors):
        raise ShapeError("factor index %d out of range" % j)
    n = X.shape[0]
    row_dims = [f.shape[0] for f in factors]
    col_dims = [f.shape[1] for f in factors]
    if int(np.prod(row_dims)) != n or int(np.prod(col_dims)) != n:
        raise ShapeError(
            "factor shapes do not multiply to the sample count %d" % n
        )
    # Sample axis unfolded into one axis per factor (first factor slowest),
    # plus the trailing feature axis.
    h = X.reshape(row_dims + [-1])
    for t, f in enumerate(factors):
        if t != j:
            # Contract factor t's row axis against data axis t.
            h = np.moveaxis(np.tensordot(f, h, axes=([0], [t])), 0, t)
    g = X.reshape(col_dims + [-1])
    if system_form == "paper_aggregate":
        h = h.sum(axis=-1)
        g = g.sum(axis=-1)
    h_mat = np.moveaxis(h, j, 0).reshape(factors[j].shape[0], -1)
    g_mat = np.moveaxis(g, j, 0).reshape(factors[j].shape[1], -1)
    return h_mat @ h_mat.T, h_mat @ g_mat.T


def effective_penalty_weight(factors, j, lam, regularizer="frobenius", fold_penalty="auto"):
    """Ridge/prox weight for factor ``j``.

    When folding is active the fixed factors' norms are folded in so that the
    per-factor penalty matches the penalty on the full Kronecker product;
    otherwise the raw ``lam`` applies to factor ``j`` alone.
    """
    if not _resolve_fold(fold_penalty, regularizer):
        return float(lam)
    norm = _FACTOR_NORMS[regularizer]
    out = float(lam)
    for i, f in enumerate(factors):
        if i == j:
            continue
        value = norm(f)
        out *= value * value if regularizer == "frobenius" else value
    return out


def _zero_diagonal_inplace(m):
    d = min(m.shape)
    m[np.arange(d), np.arange(d)] = 0.0
    return m


def _ridge_from_system(gram, rhs, weight, zero_diagonal=False):
    a = gram + weight * np.eye(gram.shape[0])
    if not zero_diagonal:
        try:
            return scipy.linalg.solve(a, rhs, assume_a="pos")
        except np.linalg.LinAlgError:
            if weight == 0.0:
                raise RankDeficiencyError(
                    "normal equations are singular with zero ridge weight; "
                    "use lam > 0"
                ) from None
            raise
    # Constrained minimizer with zero diagonal entries: correct each column
    # of the unconstrained solution along the corresponding inverse column
    # (one Lagrange multiplier per pinned entry).
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        if weight == 0.0:
            raise RankDeficiencyError(
                "normal equations are singular with zero ridge weight; "
                "use lam > 0"
            ) from None
        raise
    x = inv @ rhs
    for c in range(min(x.shape)):
        x[:, c] -= (x[c, c] / inv[c, c]) * inv[:, c]
    return x


def _soft_threshold(m, t):
    return np.sign(m) * np.maximum(np.abs(m) - t, 0.0)


def _singular_value_threshold(m, t):
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return (u * np.maximum(s - t, 0.0)) @ vt


def _gram_spectral_norm(gram):
    # Gram is symmetric PSD, so plain power iteration finds its largest
    # eigenvalue; tolerance is loose because only a step size depends on it.
    n = gram.shape[0]
    x = np.full(n, 1.0 / np.sqrt(n))
    value = 0.0
    for _ in range(500):
        y = gram @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        y /= norm
        new_value = float(y @ gram @ y)
        if abs(new_value - value) <= 1e-12 * max(1.0, new_value):
            return new_value
        x, value = y, new_value
    return value


def _prox_from_system(gram, rhs, weight, regularizer, start, prox_steps,
                      prox_tol, zero_diagonal=False):
    prox = _soft_threshold if regularizer == "l1" else _singular_value_threshold
    lipschitz = _gram_spectral_norm(gram)
    if lipschitz <= 0.0:
        # Degenerate quadratic: only the penalty remains, minimized at zero.
        return np.zeros_like(start)
    step = 1.0 / lipschitz
    threshold = 0.5 * step * weight
    c = np.array(start, dtype=float)
    if zero_diagonal:
        _zero_diagonal_inplace(c)
    for _ in range(prox_steps):
        c_next = prox(c - step * (gram @ c - rhs), threshold)
        if zero_diagonal:
            _zero_diagonal_inplace(c_next)
        change = np.linalg.norm(c_next - c)
        c = c_next
        if change <= prox_tol * max(1.0, np.linalg.norm(c)):
            break
    return c


def update_factor_ridge(X, factors, j, lam, system_form="exact_sum",
                        fold_penalty="auto", zero_diagonal=False):
    """Exact minimizer of the Frobenius-penalized objective in factor ``j``.

    With ``zero_diagonal`` the minimization is over matrices with a zero
    diagonal, which suppresses the trivial self-representation.
    """
    gram, rhs = build_ridge_system(X, factors, j, system_form)
    weight = effective_penalty_weight(factors, j, lam, "frobenius", fold_penalty)
    return _ridge_from_system(gram, rhs, weight, zero_diagonal)


def update_factor_prox(X, factors, j, lam, regularizer, system_form="exact_sum",
                       prox_steps=200, prox_tol=1e-8, fold_penalty="auto",
                       zero_diagonal=False):
    """Proximal-gradient update of factor ``j`` under an l1 or nuclear penalty.

    Runs ISTA on the block quadratic with step ``1 / lambda_max(gram)`` and a
    soft-threshold (l1) or singular-value-threshold (nuclear) proximal map,
    warm-started at the current factor.
    """
    if regularizer not in ("l1", "nuclear"):
        raise ValueError("prox update requires an l1 or nuclear regularizer")
    gram, rhs = build_ridge_system(X, factors, j, system_form)
    weight = effective_penalty_weight(factors, j, lam, regularizer, fold_penalty)
    if _resolve_fold(fold_penalty, regularizer) and lam > 0.0 and weight == 0.0:
        raise DegenerateFactorError(
            "fixed factors have zero norm, leaving factor %d unpenalized; "
            "reinitialize the factor set" % j
        )
    return _prox_from_system(
        gram, rhs, weight, regularizer, factors[j], prox_steps, prox_tol,
        zero_diagonal,
    )


def initialize_factors(shape, n_samples, random_state=None, zero_diagonal=()):
    """I.i.d. uniform nonnegative initialization on ``[0, n^{-1/k}]``.

    The identity is deliberately not used as a start: it is a trivial
    self-representation that the model has no reason to leave.
    """
    rng = np.random.default_rng(random_state)
    scale = float(n_samples) ** (-1.0 / len(shape))
    factors = [rng.uniform(0.0, scale, size=(p, q)) for p, q in shape]
    for j in _resolve_zero_diagonal(zero_diagonal, [f.shape for f in factors]):
        _zero_diagonal_inplace(factors[j])
    return factors


def solve_factors(X, shape, regularizer="frobenius", lam=0.2, max_sweeps=50,
                  rel_tol=1e-6, system_form="exact_sum", prox_steps=200,
                  prox_tol=1e-8, fold_penalty="auto", zero_diagonal=(),
                  random_state=None):
    """Learn the factor set by cyclic block-coordinate minimization.

    Parameters
    ----------
    X : ndarray of shape (n_samples, n_features)
        Data with one sample per row.
    shape : sequence of (rows, cols) pairs
        Shapes of the factors; row and column products must both equal
        ``n_samples``.
    regularizer : {"frobenius", "l1", "nuclear"}
        Penalty on the full Kronecker product.
    lam : float
        Penalty weight, >= 0.
    max_sweeps : int
        Maximum number of full passes over the factors. Zero returns the
        initialization with a single objective value.
    rel_tol : float
        Stop when the relative objective decrease over one sweep falls below
        this value. Pass ``-inf`` to force exactly ``max_sweeps`` sweeps.
    system_form : {"exact_sum", "paper_aggregate"}
        How per-feature normal equations are combined; see
        :func:`build_ridge_system`.
    fold_penalty : "auto", True, or False
        Whether the fixed factors' norms are folded into each block penalty
        so it matches the penalty on the full product. "auto" folds for
        frobenius and nuclear and keeps the raw ``lam`` for l1.
    zero_diagonal : "none", "all", "inner", or iterable of factor indices
        Factors whose diagonal entries are constrained to zero. Zeroing any
        factor diagonal suppresses the trivial identity self-representation.
    random_state : int or None
        Seed for the factor initialization.

    Returns
    -------
    FactorizationResult
        Factors, objective value at initialization plus one per sweep, and
        accumulated assembly/solve timings.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be 2-D (n_samples, n_features)")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    if regularizer not in REGULARIZERS:
        raise ValueError("unknown regularizer %r" % regularizer)
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    shape = _check_shape(shape, X.shape[0])
    constrained = _resolve_zero_diagonal(zero_diagonal, shape)
    fold = _resolve_fold(fold_penalty, regularizer)

    started = time.perf_counter()
    factors = initialize_factors(shape, X.shape[0], random_state, constrained)
    trace = [_sweep_objective(X, factors, lam, regularizer, fold)]
    assembly_time = 0.0
    solve_time = 0.0
    for _ in range(max_sweeps):
        for j in range(len(factors)):
            tic = time.perf_counter()
            gram, rhs = build_ridge_system(X, factors, j, system_form)
            assembly_time += time.perf_counter() - tic
            weight = effective_penalty_weight(factors, j, lam, regularizer, fold)
            tic = time.perf_counter()
            if regularizer == "frobenius":
                factors[j] = _ridge_from_system(
                    gram, rhs, weight, j in constrained
                )
            else:
                if fold and lam > 0.0 and weight == 0.0:
                    raise DegenerateFactorError(
                        "fixed factors have zero norm during sweep; "
                        "reinitialize the factor set"
                    )
                factors[j] = _prox_from_system(
                    gram, rhs, weight, regularizer, factors[j],
                    prox_steps, prox_tol, j in constrained,
                )
            solve_time += time.perf_counter() - tic
        value = _sweep_objective(X, factors, lam, regularizer, fold)
        if not np.isfinite(value):
            raise DivergenceError(
                "objective became non-finite after sweep %d" % len(trace)
            )
        previous = trace[-1]
        trace.append(value)
        decrease = (previous - value) / max(abs(previous), 1e-300)
        if decrease < rel_tol:
            break
    return FactorizationResult(
        factors=factors,
        objective_trace=trace,
        assembly_time=assembly_time,
        solve_time=solve_time,
        total_time=time.perf_counter() - started,
    )


def threshold_factors(factors, tau):
    """Zero out factor entries below ``tau`` times the factor's max magnitude.

    Entrywise products make this induce a corresponding truncation on the
    full Kronecker product. ``tau`` must lie in ``[0, 1)``.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1), got %r" % tau)
    factors = _check_factors(factors)
    out = []
    for f in factors:
        f = f.copy()
        peak = np.abs(f).max() if f.size else 0.0
        f[np.abs(f) < tau * peak] = 0.0
        out.append(f)
    return out
