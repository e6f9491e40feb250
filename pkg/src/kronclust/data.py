"""Dataset construction and I/O.

Union-of-subspaces synthetic data, IDX image files (MNIST layout), CSV
point files, unit normalization, and factor-shape planning with padding for
sample counts that do not factor evenly.
"""

import struct

import numpy as np

from .exceptions import DegenerateDataError, IdxFormatError, ShapeError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

# A factor dimension counts as balanced when it is within this multiple of
# the geometric mean dimension; keeps the factor solve cost near N^(3/k).
BALANCE_RATIO = 4.0


def _split_counts(total, parts):
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def make_union_of_subspaces(n_subspaces=5, subspace_dim=6, ambient_dim=9,
                            points_per_subspace=100, random_state=None):
    """Random points on the unit sphere drawn from a union of linear subspaces.

    Each subspace gets an orthonormal basis from a QR factorization of a
    Gaussian matrix; points are Gaussian combinations of the basis, scaled to
    unit length. Points are grouped by subspace, in order.

    Parameters
    ----------
    points_per_subspace : int or sequence of int
        Per-subspace point counts; an int replicates the count.

    Returns
    -------
    X : ndarray of shape (n_points, ambient_dim)
    labels : ndarray of int
    """
    if subspace_dim > ambient_dim:
        raise ShapeError(
            "subspace dimension %d exceeds ambient dimension %d"
            % (subspace_dim, ambient_dim)
        )
    if n_subspaces < 1 or subspace_dim < 1 or ambient_dim < 1:
        raise ShapeError("all dataset dimensions must be >= 1")
    if np.isscalar(points_per_subspace):
        counts = [int(points_per_subspace)] * n_subspaces
    else:
        counts = [int(c) for c in points_per_subspace]
        if len(counts) != n_subspaces:
            raise ShapeError("need one point count per subspace")
    if any(c < 1 for c in counts):
        raise ShapeError("each subspace needs at least one point")

    rng = np.random.default_rng(random_state)
    blocks = []
    labels = []
    for s, count in enumerate(counts):
        basis, _ = np.linalg.qr(rng.standard_normal((ambient_dim, subspace_dim)))
        points = basis @ rng.standard_normal((subspace_dim, count))
        norms = np.linalg.norm(points, axis=0)
        while np.any(norms < 1e-12):
            bad = norms < 1e-12
            points[:, bad] = basis @ rng.standard_normal((subspace_dim, int(bad.sum())))
            norms = np.linalg.norm(points, axis=0)
        blocks.append((points / norms).T)
        labels.extend([s] * count)
    return np.vstack(blocks), np.asarray(labels, dtype=int)


def make_synthetic_total(n_points, n_subspaces=5, subspace_dim=6, ambient_dim=9,
                         random_state=None):
    """Synthetic union-of-subspaces data with a fixed total point count."""
    counts = _split_counts(int(n_points), n_subspaces)
    return make_union_of_subspaces(
        n_subspaces, subspace_dim, ambient_dim, counts, random_state
    )


def normalize_points(X):
    """Scale every point (row) to unit Euclidean length.

    Raises DegenerateDataError listing the indices of zero points.
    """
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateDataError(
            "cannot normalize zero points at indices %s" % zero.tolist(),
            indices=zero.tolist(),
        )
    return X / norms[:, None]


def _read_exact(handle, count, offset, path):
    data = handle.read(count)
    if len(data) != count:
        raise IdxFormatError(
            "%s: truncated file, expected %d bytes at offset %d"
            % (path, count, offset),
            offset=offset,
        )
    return data


def load_idx_images(images_path, labels_path):
    """Load an IDX image/label file pair.

    Pixels are scaled to ``[0, 1]`` and each image is vectorized column-major,
    giving one row of length ``rows * cols`` per image.

    Returns
    -------
    X : ndarray of shape (n_images, rows * cols)
    labels : ndarray of int
    """
    with open(images_path, "rb") as fh:
        header = _read_exact(fh, 16, 0, images_path)
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(
                "%s: bad image magic 0x%08x at offset 0" % (images_path, magic),
                offset=0,
            )
        raw = _read_exact(fh, count * rows * cols, 16, images_path)
        if fh.read(1):
            raise IdxFormatError(
                "%s: trailing bytes after %d images at offset %d"
                % (images_path, count, 16 + count * rows * cols),
                offset=16 + count * rows * cols,
            )
    with open(labels_path, "rb") as fh:
        header = _read_exact(fh, 8, 0, labels_path)
        magic, label_count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(
                "%s: bad label magic 0x%08x at offset 0" % (labels_path, magic),
                offset=0,
            )
        label_raw = _read_exact(fh, label_count, 8, labels_path)
    if label_count != count:
        raise IdxFormatError(
            "image count %d does not match label count %d" % (count, label_count),
            offset=4,
        )
    images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows, cols)
    X = images.transpose(0, 2, 1).reshape(count, rows * cols) / 255.0
    labels = np.frombuffer(label_raw, dtype=np.uint8).astype(int)
    return X, labels


def save_idx_images(images_path, labels_path, X, labels, image_shape):
    """Write an IDX image/label pair; inverse of :func:`load_idx_images`.

    ``X`` holds column-major vectorized images with values in ``[0, 1]``;
    they are quantized back to 8-bit, so data loaded from 8-bit files round
    trips exactly.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    rows, cols = int(image_shape[0]), int(image_shape[1])
    count = X.shape[0]
    if X.shape[1] != rows * cols:
        raise ShapeError(
            "point length %d does not match image shape %d x %d"
            % (X.shape[1], rows, cols)
        )
    if labels.shape[0] != count:
        raise ShapeError("image count %d != label count %d" % (count, labels.shape[0]))
    pixels = np.rint(np.clip(X, 0.0, 1.0) * 255.0).astype(np.uint8)
    images = pixels.reshape(count, cols, rows).transpose(0, 2, 1)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, count, rows, cols))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, count))
        fh.write(labels.astype(np.uint8).tobytes())


def save_points_csv(path, X, labels=None):
    """Write points as CSV, one point per row, optional integer label last."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        for i in range(X.shape[0]):
            fields = ["%.17g" % v for v in X[i]]
            if labels is not None:
                fields.append("%d" % labels[i])
            fh.write(",".join(fields) + "\n")


def load_points_csv(path, labels="auto"):
    """Read a CSV point file, returning ``(X, labels_or_None)``.

    With ``labels="auto"`` the final column is treated as labels when all of
    its entries are nonnegative integers; pass True/False to force either
    reading.
    """
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if labels == "auto":
        last = data[:, -1]
        labels = data.shape[1] >= 2 and bool(
            np.all(last >= 0) and np.all(last == np.rint(last))
        )
    if labels:
        if data.shape[1] < 2:
            raise ShapeError("%s: cannot split labels from a single column" % path)
        return data[:, :-1], data[:, -1].astype(int)
    return data, None


def _factor_dims(n, k, lo, hi, prefer):
    if k == 1:
        return [n] if lo <= n <= hi else None
    divisors = [d for d in range(lo, min(hi, n) + 1) if n % d == 0]
    divisors.sort(key=prefer)
    for d in divisors:
        rest = _factor_dims(n // d, k - 1, lo, hi, prefer)
        if rest is not None:
            return [d] + rest
    return None


def plan_factor_shape(n_points, n_factors, random_state=None, split="balanced"):
    """Square factor dimensions for ``n_points``, padding when necessary.

    Finds the smallest ``n' >= n_points`` that factors into ``n_factors``
    integers, each within ``BALANCE_RATIO`` of ``n'^(1/k)``, and plans to pad
    by duplicating uniformly sampled existing points. Padded duplicates keep
    the clustering geometry intact and are meant to be excluded from scoring.

    ``split`` chooses among the admissible factorizations of ``n'``:
    "balanced" picks dimensions closest to ``n'^(1/k)`` (the canonical
    complexity setting), while "skewed" picks the smallest admissible leading
    dimensions, giving the trailing factors the most capacity. Skewed splits
    leave much more room for within-block self-expression and are the better
    default for the clustering pipeline.

    Returns
    -------
    shape : list of (dim, dim) pairs
    pad_indices : ndarray of int
        Source indices, one per padded duplicate (possibly empty).
    """
    n_points = int(n_points)
    n_factors = int(n_factors)
    if n_points < 1:
        raise ShapeError("need at least one point")
    if n_factors < 2:
        raise ShapeError("factor planning requires at least two factors")
    if split not in ("balanced", "skewed"):
        raise ValueError("split must be 'balanced' or 'skewed', got %r" % split)
    n_prime = n_points
    while True:
        target = n_prime ** (1.0 / n_factors)
        lo = max(1, int(np.ceil(target / BALANCE_RATIO)))
        hi = int(np.floor(target * BALANCE_RATIO))
        if split == "balanced":
            prefer = lambda d: (abs(d - target), d)
        else:
            prefer = lambda d: d
        dims = _factor_dims(n_prime, n_factors, lo, hi, prefer)
        if dims is not None:
            break
        n_prime += 1
    rng = np.random.default_rng(random_state)
    pad = rng.integers(0, n_points, size=n_prime - n_points)
    return [(d, d) for d in dims], pad


def pad_points(X, pad_indices):
    """Append duplicate rows selected by ``pad_indices``."""
    X = np.asarray(X, dtype=float)
    if len(pad_indices) == 0:
        return X
    return np.vstack([X, X[np.asarray(pad_indices, dtype=int)]])
