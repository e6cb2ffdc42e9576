"""Progressive slice sampling driven by Thompson sampling over the modes.

Each round draws mode proportions from a Dirichlet posterior, samples new
slices (rows of the unfoldings) per mode, and updates the concentrations
from an entropy reward:

* ``psct`` rewards a mode by the entropy of the normalized SAD (sum of
  absolute differences) of its sampled slices and picks new slices with
  SAD-interpolated weights.
* ``psct_permute`` samples slices uniformly and rewards a mode by the
  entropy of the column variances of a sketched orthonormal basis, which
  does not depend on index order.

Both finish with a SketchyCoreTucker call on the sampled slices.
"""
from dataclasses import dataclass, field

import numpy as np

from .linalg import gaussian_map, make_rng, qr_thin
from .sct import (BudgetError, check_allowance, crossing_budget, min_rows, sct,
                  touched_mask)
from .tensor import crossing_columns, slices, unfold
from .tucker import check_ranks, reconstruct, relative_error

ALPHA_MIN = 1e-3


def sad_batch(t, mode, indices):
    """SAD of several mode-``mode`` slices at once."""
    s = slices(t, mode, indices)
    a, b = s.shape[1:]
    total = (np.abs(np.diff(s, axis=1)).sum(axis=(1, 2))
             + np.abs(np.diff(s, axis=2)).sum(axis=(1, 2)))
    return total / (a * b)


def sad(t, mode, idx):
    """Sum of absolute differences along both axes of one slice, divided
    by the slice size.
    """
    n = t.shape[mode - 1]
    if not 0 <= idx < n:
        raise IndexError(f"index {idx} out of range for mode {mode} of size {n}")
    return float(sad_batch(t, mode, [idx])[0])


def draw_ratios(alpha, rng):
    """One Dirichlet(alpha) draw via normalized Gamma variates.

    Gammas are generated in log space (``G(a) = G(a + 1) * U**(1/a)``) so
    concentrations near zero do not underflow to an all-zero draw.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.size == 0 or np.any(~(alpha > 0)):
        raise ValueError(f"concentrations must be positive, got {alpha}")
    rng = make_rng(rng)
    log_g = (np.log(rng.standard_gamma(alpha + 1.0))
             + np.log(rng.random(alpha.size)) / alpha)
    log_g -= log_g.max()
    g = np.exp(log_g)
    return g / g.sum()


def allocate(p, n_batch):
    """Per-mode sample counts ``floor(p_k * n_batch)``."""
    p = np.asarray(p, dtype=np.float64)
    return tuple(int(v) for v in np.floor(p * n_batch))


def weighted_sample(candidates, weights, n, rng):
    """Weighted sampling without replacement with exponential keys.

    Each candidate gets key ``log(u) / w``; the ``n`` largest keys win.
    Zero-weight candidates are picked only once positive weights run out,
    and a zero weight sum falls back to uniform sampling.
    """
    candidates = np.asarray(candidates, dtype=np.intp)
    weights = np.asarray(weights, dtype=np.float64)
    if n > candidates.size:
        raise ValueError(f"cannot draw {n} of {candidates.size} candidates")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    rng = make_rng(rng)
    u = rng.random(candidates.size)
    if n == 0:
        return candidates[:0]
    if weights.sum() <= 0:
        weights = np.ones_like(weights)
    with np.errstate(divide="ignore"):
        keys = np.where(weights > 0, np.log(u) / np.where(weights > 0, weights, 1.0),
                        -np.inf)
    order = np.lexsort((-u, -keys))
    return np.sort(candidates[order[:n]])


def entropy(values):
    """Shannon entropy (natural log) of ``values`` normalized to sum one.

    An all-zero vector has entropy 0.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("entropy of an empty vector")
    if np.any(v < 0):
        raise ValueError("entropy needs nonnegative values")
    total = v.sum()
    if total <= 0:
        return 0.0
    q = v / total
    q = q[q > 0]
    return float(max(-(q * np.log(q)).sum(), 0.0))


sad_entropy = entropy


@dataclass
class SamplerState:
    alpha: np.ndarray
    delta: list
    weights: list
    sad: list
    observed: list
    round: int = 0

    @classmethod
    def initial(cls, dims):
        return cls(
            alpha=np.ones(3),
            delta=[np.zeros(0, dtype=np.intp) for _ in dims],
            weights=[np.ones(n) for n in dims],
            sad=[np.zeros(n) for n in dims],
            observed=[np.zeros(n) for n in dims],
        )

    @property
    def omega_tilde(self):
        out = []
        for d, w in zip(self.delta, self.weights):
            mask = np.ones(w.size, dtype=bool)
            mask[d] = False
            out.append(np.flatnonzero(mask))
        return out

    @property
    def total(self):
        return sum(d.size for d in self.delta)

    def add(self, mode, new):
        i = mode - 1
        self.delta[i] = np.union1d(self.delta[i], new)
        self.weights[i][self.delta[i]] = 0.0


def update_weights(state, mode, new_idx, new_sad):
    """Fold fresh SAD observations into the sampling weights of ``mode``.

    SAD at unsampled indices is linearly interpolated from every index
    sampled so far (constant beyond the outermost samples); sampled indices
    get weight zero and the rest are normalized to sum one.
    """
    i = mode - 1
    new_idx = np.asarray(new_idx, dtype=np.intp)
    if new_idx.size:
        state.observed[i][new_idx] = new_sad
        state.delta[i] = np.union1d(state.delta[i], new_idx)
    sampled = state.delta[i]
    n = state.weights[i].size
    est = np.zeros(n)
    if sampled.size:
        est = np.interp(np.arange(n), sampled, state.observed[i][sampled])
        est[sampled] = 0.0
    state.sad[i] = est
    w = est.copy()
    free = np.ones(n, dtype=bool)
    free[sampled] = False
    if free.any():
        total = w[free].sum()
        if total > 0:
            w /= total
        else:
            w[free] = 1.0 / free.sum()
    state.weights[i] = w
    return state


def interim_sketch_size(rank, n_sampled):
    return max(rank + (n_sampled - rank) // 3, rank + 1)


def latent_variance_entropy(t, delta, mode, interim_k, rng):
    """Entropy of the column variances of a sketched basis for mode ``mode``.

    The fibers crossing the sampled intersection are compressed to
    ``interim_k`` columns by a Gaussian map and orthonormalized; the
    variance of each basis column over its ``N_k`` entries forms the
    distribution whose entropy is returned.
    """
    dims = t.shape
    if any(len(d) == 0 for d in delta):
        raise ValueError("every mode needs a sampled slice before sketching")
    cols = crossing_columns(dims, mode, delta)
    if cols.size == 0:
        raise ValueError("no fibers cross the sampled intersection")
    n = dims[mode - 1]
    k = int(min(interim_k, cols.size, n))
    if k <= 1 or n < 2:
        return 0.0
    y = unfold(t, mode)[:, cols] @ gaussian_map(k, cols.size, rng).T
    if not np.any(y):
        return 0.0
    q, _ = qr_thin(y)
    return entropy(q.var(axis=0, ddof=1))


@dataclass
class RoundRecord:
    round: int
    p: tuple
    allocated: tuple
    entropy: tuple
    cumulative: int
    entries_touched: int
    err: float = None
    topup: bool = False


@dataclass
class ProgressTrace:
    rounds: list = field(default_factory=list)

    @property
    def topup_rows(self):
        return sum(sum(r.allocated) for r in self.rounds if r.topup)

    def as_rows(self):
        rows = []
        for r in self.rounds:
            h = [("" if v is None else v) for v in r.entropy]
            rows.append([r.round, *r.p, *r.allocated, *h, r.cumulative,
                         r.entries_touched, "" if r.err is None else r.err,
                         int(r.topup)])
        return rows

    header = ["round", "p1", "p2", "p3", "n1", "n2", "n3", "h1", "h2", "h3",
              "cumulative", "entries_touched", "err", "topup"]


def _interim_err(t, ranks, delta, rng):
    n = tuple(d.size for d in delta)
    if any(nk < rk for nk, rk in zip(n, ranks)):
        return None
    d, _ = sct(t, crossing_budget(ranks, n), rows=delta, cols="crossing", rng=rng)
    return relative_error(reconstruct(d), t)


def _run(t, ranks, n_allow, n_batch, rng, trace, reward, evaluate):
    dims = t.shape
    ranks = check_ranks(dims, ranks)
    check_allowance(ranks, n_allow)
    if n_batch < 3:
        raise BudgetError(f"N_batch must be at least 3, got {n_batch}")
    rng = make_rng(rng)
    eval_rng = np.random.default_rng(rng.integers(0, 2**63))
    state = SamplerState.initial(dims)
    log = ProgressTrace()

    def record(p, alloc, h, topup=False):
        if not trace:
            return
        err = _interim_err(t, ranks, state.delta, eval_rng) if evaluate else None
        touched = int(touched_mask(dims, state.delta, [np.zeros(0, np.intp)] * 3).sum())
        log.rounds.append(RoundRecord(
            round=state.round, p=tuple(float(v) for v in p), allocated=alloc,
            entropy=h, cumulative=state.total, entries_touched=touched,
            err=err, topup=topup))

    while state.total <= n_allow:
        free = state.omega_tilde
        active = np.array([f.size > 0 for f in free])
        if not active.any():
            break
        p = np.zeros(3)
        p[active] = draw_ratios(state.alpha[active], rng)
        alloc = [min(a, f.size) for a, f in zip(allocate(p, n_batch), free)]
        new = []
        for i in range(3):
            if reward == "variance":
                picked = np.sort(rng.choice(free[i], alloc[i], replace=False))
            else:
                picked = weighted_sample(free[i], state.weights[i][free[i]], alloc[i], rng)
            new.append(picked)
        h = [None, None, None]
        if reward == "variance":
            for i in range(3):
                state.add(i + 1, new[i])
            if all(d.size for d in state.delta):
                for i in range(3):
                    if not active[i]:
                        continue
                    k = interim_sketch_size(ranks[i], state.delta[i].size)
                    h[i] = latent_variance_entropy(t, state.delta, i + 1, k, rng)
                    state.alpha[i] = max(h[i], ALPHA_MIN)
        else:
            for i in range(3):
                if new[i].size == 0:
                    continue
                if reward == "sad":
                    vals = sad_batch(t, i + 1, new[i])
                else:
                    vals = np.ones(new[i].size)
                update_weights(state, i + 1, new[i], vals)
                # one observation says nothing about how SAD is spread
                if state.delta[i].size > 1:
                    h[i] = sad_entropy(state.observed[i][state.delta[i]])
                    state.alpha[i] = max(h[i], ALPHA_MIN)
        state.round += 1
        record(p, tuple(alloc), tuple(h))

    # the final sketch needs k < s < n in every mode
    lo = min_rows(ranks, dims)
    short = [max(lo[i] - state.delta[i].size, 0) for i in range(3)]
    if any(short):
        free = state.omega_tilde
        for i in range(3):
            if short[i]:
                state.add(i + 1, rng.choice(free[i], short[i], replace=False))
        state.round += 1
        record((0.0, 0.0, 0.0), tuple(short), (None, None, None), topup=True)

    n = tuple(d.size for d in state.delta)
    decomp, sample_log = sct(t, crossing_budget(ranks, n), rows=state.delta,
                             cols="crossing", rng=rng)
    return decomp, sample_log, log


def psct(t, ranks, n_allow, n_batch, rng=None, trace=False, reward="sad",
         evaluate=False):
    """Progressive SketchyCoreTucker.

    Rounds continue until more than ``n_allow`` slices are sampled in total.
    ``reward="constant"`` swaps SAD for a constant reward, which reduces the
    slice choice to uniform sampling. ``evaluate`` records the error of an
    interim sketch after every round in the trace.

    Returns ``(TuckerDecomposition, SampleLog, ProgressTrace)``.
    """
    if reward not in ("sad", "constant"):
        raise ValueError(f"unknown reward {reward!r}")
    return _run(t, ranks, n_allow, n_batch, rng, trace, reward, evaluate)


def psct_permute(t, ranks, n_allow, n_batch, rng=None, trace=False, evaluate=False):
    """Permutation-agnostic progressive SketchyCoreTucker.

    Same loop as :func:`psct` with uniform slice selection and a latent
    variance entropy reward.
    """
    return _run(t, ranks, n_allow, n_batch, rng, trace, "variance", evaluate)
