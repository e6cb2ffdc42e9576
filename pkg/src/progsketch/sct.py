"""SketchyCoreTucker: Tucker sketching from sampled slices and fibers.

Only the sampled columns of each unfolding (fibers) and the subtensor at
the crossing of the sampled rows (slices) enter the computation:

1. ``Y_k = A_(k)[:, cols_k] @ Omega_k.T`` with ``Omega_k`` of shape
   ``(k_k, m_k)``; ``Q_k`` is the orthonormal factor of ``Y_k``.
2. ``Z = A[rows_1, rows_2, rows_3] x_1 Phi_1 x_2 Phi_2 x_3 Phi_3`` with
   ``Phi_k`` of shape ``(s_k, n_k)``.
3. ``C = Z x_k pinv(Phi_k @ Q_k[rows_k])`` for every mode, then the
   rank-``r`` HOSVD of ``C`` is lifted back through ``Q_k``.
"""
from dataclasses import dataclass

import numpy as np

from .linalg import gaussian_map, make_rng, pseudo_inverse, qr_thin
from .tensor import crossing_columns, index_set, intersect, mode_product, other_dims, unfold
from .tucker import TuckerDecomposition, check_ranks, hosvd


class BudgetError(ValueError):
    """Sampling budget cannot satisfy ``r <= k <= s <= min(m, n)``."""


class SketchError(ArithmeticError):
    """A sketch is too degenerate to recover the core from."""


def _triple(x):
    t = tuple(int(v) for v in x)
    if len(t) != 3:
        raise ValueError(f"expected a triple, got {x!r}")
    return t


@dataclass(frozen=True)
class SketchBudget:
    r: tuple
    k: tuple
    s: tuple
    m: tuple
    n: tuple

    def __post_init__(self):
        for name in ("r", "k", "s", "m", "n"):
            object.__setattr__(self, name, _triple(getattr(self, name)))

    def validate(self, dims):
        for i in range(3):
            r, k, s, m, n = (self.r[i], self.k[i], self.s[i], self.m[i], self.n[i])
            a, b = other_dims(dims, i + 1)
            if not 1 <= r <= k <= s <= min(m, n):
                raise BudgetError(
                    f"mode {i + 1}: need 1 <= r <= k <= s <= min(m, n), got "
                    f"r={r} k={k} s={s} m={m} n={n}")
            if n > dims[i] or m > a * b:
                raise BudgetError(
                    f"mode {i + 1}: n={n}, m={m} exceed available rows/columns "
                    f"({dims[i]}, {a * b})")
        return self

    def column_ratios(self, dims):
        return tuple(m / np.prod(other_dims(dims, i + 1)) for i, m in enumerate(self.m))

    def row_ratios(self, dims):
        return tuple(n / d for n, d in zip(self.n, dims))


@dataclass(frozen=True)
class SampleLog:
    """Sampled column (fiber) and row (slice) index sets per mode."""

    cols: tuple
    rows: tuple
    entries_touched: int
    budget: SketchBudget = None

    def used_space_ratio(self, dims):
        return self.entries_touched / float(np.prod(dims))


def touched_mask(dims, rows, cols):
    """Boolean mask of all entries read through the given slices and fibers."""
    mask = np.zeros(dims, dtype=bool)
    mask[rows[0], :, :] = True
    mask[:, rows[1], :] = True
    mask[:, :, rows[2]] = True
    n1, n2, n3 = dims
    a, b = np.divmod(cols[0], n3)
    mask[:, a, b] = True
    a, b = np.divmod(cols[1], n3)
    mask[a, :, b] = True
    a, b = np.divmod(cols[2], n2)
    mask[a, b, :] = True
    return mask


def step3_schedule(ranks, n, m=None):
    """Sketch sizes ``k = r + (n - r) // 3`` and ``s = r + 2 (n - r) // 3``.

    When column counts ``m`` are given, ``s`` and ``k`` are capped so the
    budget chain still holds for thin fiber sets.
    """
    ranks, n = _triple(ranks), _triple(n)
    k = [r + (nn - r) // 3 for r, nn in zip(ranks, n)]
    s = [r + 2 * (nn - r) // 3 for r, nn in zip(ranks, n)]
    if m is not None:
        s = [min(si, mi) for si, mi in zip(s, _triple(m))]
        k = [min(ki, si) for ki, si in zip(k, s)]
    return tuple(k), tuple(s)


def _truncated_identity(rows, cols):
    return np.eye(rows, cols)


def sct(t, budget, rows=None, cols=None, rng=None, maps="gaussian",
        mode_order=(1, 2, 3)):
    """Rank-``budget.r`` Tucker approximation from sampled slices and fibers.

    Parameters
    ----------
    t : ndarray, shape (N1, N2, N3)
    budget : SketchBudget
    rows : triple of index arrays, optional
        Sampled row indices per unfolding (slices). Drawn uniformly without
        replacement when omitted.
    cols : triple of index arrays, ``"crossing"`` or None
        Sampled unfolding columns. ``"crossing"`` takes the fibers that
        cross the intersection of ``rows``; None draws uniformly.
    maps : {"gaussian", "identity"}
        ``"identity"`` uses ``Phi_k = I`` (requires ``s == n``) and the
        truncated identity ``[I 0]`` for ``Omega_k``.
    mode_order : permutation of (1, 2, 3)
        Order in which the per-mode sketches are built. Each mode draws from
        its own random stream, so the result does not depend on it.

    Returns
    -------
    (TuckerDecomposition, SampleLog)
    """
    dims = t.shape
    budget.validate(dims)
    rng = make_rng(rng)
    if rows is None:
        rows = tuple(np.sort(rng.choice(dims[i], budget.n[i], replace=False))
                     for i in range(3))
    rows = tuple(index_set(rows[i], dims[i]) for i in range(3))
    if isinstance(cols, str):
        if cols != "crossing":
            raise ValueError(f"unknown column rule {cols!r}")
        cols = tuple(crossing_columns(dims, i + 1, rows) for i in range(3))
    elif cols is None:
        cols = tuple(
            np.sort(rng.choice(int(np.prod(other_dims(dims, i + 1))), budget.m[i],
                               replace=False))
            for i in range(3))
    cols = tuple(index_set(cols[i], int(np.prod(other_dims(dims, i + 1))))
                 for i in range(3))

    for i in range(3):
        if rows[i].size != budget.n[i] or cols[i].size != budget.m[i]:
            raise BudgetError(
                f"mode {i + 1}: got {rows[i].size} rows / {cols[i].size} columns, "
                f"budget says n={budget.n[i]} m={budget.m[i]}")
    if maps not in ("gaussian", "identity"):
        raise ValueError(f"unknown map family {maps!r}")
    if maps == "identity" and budget.s != budget.n:
        raise BudgetError("identity maps need s == n")
    if sorted(mode_order) != [1, 2, 3]:
        raise ValueError(f"mode_order must permute (1, 2, 3), got {mode_order}")

    mode_rngs = [np.random.default_rng(seed)
                 for seed in rng.integers(0, 2**63, size=3)]

    q = [None] * 3
    phi = [None] * 3
    for mode in mode_order:
        i = mode - 1
        if maps == "identity":
            omega = _truncated_identity(budget.k[i], budget.m[i])
            phi[i] = np.eye(budget.n[i])
        else:
            omega = gaussian_map(budget.k[i], budget.m[i], mode_rngs[i])
            phi[i] = gaussian_map(budget.s[i], budget.n[i], mode_rngs[i])
        y = unfold(t, mode)[:, cols[i]] @ omega.T
        q[i], _ = qr_thin(y)

    core = intersect(t, *rows)
    for mode in mode_order:
        core = mode_product(core, phi[mode - 1], mode)
    for mode in mode_order:
        i = mode - 1
        proj = phi[i] @ q[i][rows[i], :]
        if proj.size == 0 or not np.any(proj):
            raise SketchError(f"mode {mode}: sketched factor block is zero")
        core = mode_product(core, pseudo_inverse(proj), mode)

    small = hosvd(core, budget.r)
    factors = tuple(qi @ w for qi, w in zip(q, small.factors))
    touched = int(touched_mask(dims, rows, cols).sum())
    log = SampleLog(cols=cols, rows=rows, entries_touched=touched, budget=budget)
    return TuckerDecomposition(small.core, factors), log


def crossing_budget(ranks, n):
    """Budget for sampled row counts ``n`` with intersection-crossing fibers."""
    n = _triple(n)
    m = (n[1] * n[2], n[0] * n[2], n[0] * n[1])
    k, s = step3_schedule(ranks, n, m)
    return SketchBudget(r=ranks, k=k, s=s, m=m, n=n)


def min_rows(ranks, dims):
    """Smallest per-mode row count that keeps ``k`` and ``s`` distinct."""
    return tuple(min(r + 3, d) for r, d in zip(ranks, dims))


def split_rows(p, total, lo, hi):
    """Split ``total`` rows across modes in proportion to ``p``.

    Starting from ``lo``, rows are handed out one at a time to the open mode
    with the largest ``p_k / (n_k + 1)`` (a divisor rule), and modes at
    ``hi`` are closed. The result approximates ``clip(lam * p, lo, hi)``,
    never gives a mode less than the floor of its proportional share when
    no bound binds, and is monotone: raising ``total`` never lowers a count.
    The target total is ``total`` clipped to ``[sum(lo), sum(hi)]``.
    """
    p = np.asarray(p, dtype=np.float64)
    n = np.array(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    target = int(np.clip(total, n.sum(), hi.sum()))
    for _ in range(target - int(n.sum())):
        prio = np.where(n < hi, p / (n + 1), -np.inf)
        if np.all(prio <= 0):
            # only zero-weight modes remain open
            prio = np.where(n < hi, 0.0, -np.inf) - n
        n[int(np.argmax(prio))] += 1
    return tuple(int(v) for v in n)


def check_allowance(ranks, n_allow):
    if n_allow < 3 * max(ranks) + 3:
        raise BudgetError(
            f"N_allow={n_allow} is below the minimum 3*max(r)+3={3 * max(ranks) + 3}")


def rsct_baseline(t, ranks, n_allow, rng=None):
    """SketchyCoreTucker with randomly generated per-mode row counts.

    Row counts come from a uniform Dirichlet split of ``n_allow``; rows are
    uniform without replacement and the columns are the fibers crossing the
    sampled intersection.
    """
    dims = t.shape
    ranks = check_ranks(dims, ranks)
    check_allowance(ranks, n_allow)
    rng = make_rng(rng)
    p = rng.dirichlet(np.ones(3))
    n = split_rows(p, n_allow, min_rows(ranks, dims), dims)
    rows = tuple(np.sort(rng.choice(dims[i], n[i], replace=False)) for i in range(3))
    return sct(t, crossing_budget(ranks, n), rows=rows, cols="crossing", rng=rng)
