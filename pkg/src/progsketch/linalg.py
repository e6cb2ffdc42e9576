"""Matrix kernels shared by the decompositions.

Thin wrappers over LAPACK (via numpy) that pin down sign conventions and
numerical-rank cutoffs so results are reproducible across runs.
"""
import numpy as np


def make_rng(seed=None):
    """Return a ``numpy.random.Generator``; generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gaussian_map(out_dim, in_dim, rng):
    """Dense Gaussian reduction map with entries ~ N(0, 1/out_dim)."""
    out_dim, in_dim = int(out_dim), int(in_dim)
    if not 1 <= out_dim <= in_dim:
        raise ValueError(f"need 1 <= out_dim <= in_dim, got ({out_dim}, {in_dim})")
    rng = make_rng(rng)
    return rng.standard_normal((out_dim, in_dim)) / np.sqrt(out_dim)


def _fix_signs(u):
    # first nonzero entry of every column made nonnegative
    nz = np.abs(u) > 0
    first = np.argmax(nz, axis=0)
    signs = np.sign(u[first, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def qr_thin(m):
    """Economy QR with a nonnegative diagonal in ``R``."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError(f"qr_thin needs a tall or square matrix, got shape {m.shape}")
    q, r = np.linalg.qr(m, mode="reduced")
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d, r * d[:, None]


def leading_left_singular_vectors(m, r):
    """Top-``r`` left singular vectors in descending singular-value order."""
    m = np.asarray(m, dtype=np.float64)
    r = int(r)
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"rank {r} out of range for matrix of shape {m.shape}")
    u, _, _ = np.linalg.svd(m, full_matrices=False)
    return _fix_signs(u[:, :r])


def singular_values_sq(m):
    """Squared singular values, descending."""
    s = np.linalg.svd(np.asarray(m, dtype=np.float64), compute_uv=False)
    return s * s


def pseudo_inverse(m, tol=None):
    """Moore-Penrose pseudoinverse by SVD.

    Singular values at or below ``tol * sigma_max`` are treated as zero.
    The default ``tol`` is ``1e-12 * max(rows, cols)``.
    """
    m = np.asarray(m, dtype=np.float64)
    rows, cols = m.shape
    if tol is None:
        tol = 1e-12 * max(rows, cols)
    if m.size == 0:
        return np.zeros((cols, rows))
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((cols, rows))
    keep = s > tol * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T
