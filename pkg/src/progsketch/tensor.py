"""Dense order-3 tensors: unfolding, folding, mode products, slicing.

Tensors are plain float64 C-contiguous ``ndarray`` objects of shape
``(N1, N2, N3)``; index ``i3`` varies fastest.  Modes are numbered 1..3.

Unfolding convention
--------------------
mode 1: rows ``i1``, columns ``(i2, i3)`` with ``i3`` fastest
mode 2: rows ``i2``, columns ``(i1, i3)`` with ``i3`` fastest
mode 3: rows ``i3``, columns ``(i1, i2)`` with ``i2`` fastest
"""
import numpy as np

# axis order that brings the mode axis to the front and keeps the
# remaining axes in ascending order
_PERM = {1: (0, 1, 2), 2: (1, 0, 2), 3: (2, 0, 1)}
_INV_PERM = {k: tuple(np.argsort(p)) for k, p in _PERM.items()}


def as_tensor(data, dims=None):
    """Validate and return ``data`` as a finite float64 order-3 tensor.

    ``dims`` reshapes a flat buffer given in canonical order.
    """
    arr = np.asarray(data, dtype=np.float64)
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {dims}")
        if arr.size != dims[0] * dims[1] * dims[2]:
            raise ValueError(f"data length {arr.size} does not match dims {dims}")
        arr = arr.reshape(dims)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"expected a non-empty order-3 tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite entries")
    return np.ascontiguousarray(arr)


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def other_dims(dims, mode):
    """Dimensions of the two non-``mode`` axes, in unfolding column order."""
    _check_mode(mode)
    return tuple(d for ax, d in enumerate(dims) if ax != mode - 1)


def unfold(t, mode):
    """Mode-``mode`` matricization, shape ``(N_mode, prod(other dims))``."""
    _check_mode(mode)
    t = np.asarray(t)
    n = t.shape[mode - 1]
    return np.ascontiguousarray(np.transpose(t, _PERM[mode])).reshape(n, -1)


def fold(m, mode, dims):
    """Inverse of :func:`unfold`."""
    _check_mode(mode)
    m = np.asarray(m, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    lead = dims[mode - 1]
    rest = other_dims(dims, mode)
    if m.shape != (lead, rest[0] * rest[1]):
        raise ValueError(
            f"matrix shape {m.shape} inconsistent with dims {dims} for mode {mode}")
    return np.ascontiguousarray(
        np.transpose(m.reshape((lead,) + rest), _INV_PERM[mode]))


def mode_product(t, u, mode):
    """``t x_mode u``: contract axis ``mode`` of ``t`` with the columns of ``u``."""
    _check_mode(mode)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != t.shape[mode - 1]:
        raise ValueError(
            f"matrix with shape {u.shape} cannot act on mode {mode} of a "
            f"tensor with shape {t.shape}")
    out = np.tensordot(u, t, axes=(1, mode - 1))
    return np.ascontiguousarray(np.moveaxis(out, 0, mode - 1))


def multi_mode_product(t, mats, transpose=False):
    """Apply one matrix per mode; ``None`` entries skip that mode."""
    for mode, u in enumerate(mats, start=1):
        if u is None:
            continue
        t = mode_product(t, u.T if transpose else u, mode)
    return t


def slice_(t, mode, idx):
    """Order-2 slice with the ``mode`` index fixed to ``idx``.

    The result equals row ``idx`` of ``unfold(t, mode)`` reshaped to the
    two remaining dimensions.
    """
    _check_mode(mode)
    n = t.shape[mode - 1]
    if not 0 <= idx < n:
        raise IndexError(f"index {idx} out of range for mode {mode} of size {n}")
    return np.take(t, idx, axis=mode - 1)


def slices(t, mode, indices):
    """Stack of slices, shape ``(len(indices), *other_dims)``."""
    _check_mode(mode)
    indices = np.asarray(indices, dtype=np.intp)
    return np.moveaxis(np.take(t, indices, axis=mode - 1), mode - 1, 0)


def index_set(indices, size):
    """Validate a set of indices into an axis of length ``size``.

    Returns a strictly increasing ``intp`` array.
    """
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise IndexError(f"indices out of range [0, {size})")
    out = np.unique(idx)
    if out.size != idx.size:
        raise ValueError("index set contains duplicates")
    return out


def intersect(t, rows1, rows2, rows3):
    """Subtensor at the crossing of the three index sets."""
    sets = [index_set(r, n) for r, n in zip((rows1, rows2, rows3), t.shape)]
    if any(s.size == 0 for s in sets):
        raise ValueError("intersection needs a non-empty index set in every mode")
    return np.ascontiguousarray(t[np.ix_(*sets)])


def crossing_columns(dims, mode, rows):
    """Unfolding-column indices of the mode-``mode`` fibers that cross the
    intersection of ``rows`` (a triple of per-mode index sets).
    """
    _check_mode(mode)
    a, b = [np.asarray(rows[ax], dtype=np.intp) for ax in range(3) if ax != mode - 1]
    _, nb = other_dims(dims, mode)
    return (a[:, None] * nb + b[None, :]).ravel()


def frobenius_norm_sq(t):
    t = np.asarray(t)
    return float(np.vdot(t, t))
