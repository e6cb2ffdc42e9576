"""Truncated HOSVD, Tucker reconstruction and error diagnostics."""
from dataclasses import dataclass

import numpy as np

from .linalg import leading_left_singular_vectors, singular_values_sq
from .tensor import frobenius_norm_sq, multi_mode_product, unfold


@dataclass(frozen=True)
class TuckerDecomposition:
    """Core tensor plus one orthonormal-column factor per mode."""

    core: np.ndarray
    factors: tuple

    def __post_init__(self):
        if len(self.factors) != 3:
            raise ValueError("expected three factor matrices")
        for k, u in enumerate(self.factors):
            if u.ndim != 2 or u.shape[1] != self.core.shape[k]:
                raise ValueError(
                    f"factor {k + 1} with shape {u.shape} does not match core "
                    f"shape {self.core.shape}")

    @property
    def ranks(self):
        return tuple(self.core.shape)

    @property
    def dims(self):
        return tuple(u.shape[0] for u in self.factors)


def reconstruct(d):
    return multi_mode_product(d.core, d.factors)


def check_ranks(dims, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3:
        raise ValueError(f"expected three ranks, got {ranks}")
    total = dims[0] * dims[1] * dims[2]
    for k, (r, n) in enumerate(zip(ranks, dims)):
        if not 1 <= r <= min(n, total // n):
            raise ValueError(f"rank {r} out of range for mode {k + 1} of dims {dims}")
    return ranks


def hosvd(t, ranks):
    """Truncated higher-order SVD.

    Factors are the leading left singular vectors of each unfolding and the
    core is ``t`` projected onto them.
    """
    ranks = check_ranks(t.shape, ranks)
    factors = tuple(
        leading_left_singular_vectors(unfold(t, k), r)
        for k, r in zip((1, 2, 3), ranks))
    core = multi_mode_product(t, factors, transpose=True)
    return TuckerDecomposition(core, factors)


def relative_error(approx, reference):
    """Squared relative Frobenius error ``||approx - ref||^2 / ||ref||^2``."""
    approx = np.asarray(approx)
    reference = np.asarray(reference)
    if approx.shape != reference.shape:
        raise ValueError(f"shape mismatch: {approx.shape} vs {reference.shape}")
    denom = frobenius_norm_sq(reference)
    if denom == 0.0:
        raise ZeroDivisionError("reference tensor has zero norm")
    return frobenius_norm_sq(approx - reference) / denom


def scree(t, mode):
    """Residual spectral energy fraction of ``unfold(t, mode)`` beyond rank r.

    Entry ``r`` (for ``r = 0 .. min(rows, cols)``) is the share of the
    squared Frobenius norm carried by singular values ``r+1, r+2, ...``.
    """
    s2 = singular_values_sq(unfold(t, mode))
    total = s2.sum()
    out = np.zeros(s2.size + 1)
    if total == 0.0:
        out[0] = 1.0
        return out
    # tail sums, computed from the small end to keep them exact at the tail
    tail = np.cumsum(s2[::-1])[::-1] / total
    out[:-1] = tail
    out[0] = 1.0
    return np.minimum.accumulate(out)
