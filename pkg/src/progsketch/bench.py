"""Synthetic tensors and the trial protocol for comparing the samplers."""
import time
from dataclasses import dataclass

import numpy as np

from .linalg import make_rng, qr_thin
from .progressive import psct, psct_permute
from .sct import BudgetError, SketchError, rsct_baseline
from .tensor import frobenius_norm_sq, multi_mode_product
from .tucker import check_ranks, reconstruct, relative_error

METHODS = ("rsct", "psct", "psct-permute")
KINDS = ("exact-lowrank", "lowrank-plus-noise", "structured-field")
_METHOD_IDS = {m: i for i, m in enumerate(METHODS)}
_BLOCK_RANK = 3


@dataclass(frozen=True)
class SyntheticSpec:
    dims: tuple
    kind: str = "exact-lowrank"
    ranks: tuple = (2, 2, 2)
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        check_ranks(tuple(self.dims), self.ranks)


def _lowrank(dims, ranks, rng):
    core = rng.standard_normal(ranks)
    factors = [qr_thin(rng.standard_normal((n, r)))[0] for n, r in zip(dims, ranks)]
    return multi_mode_product(core, factors)


def _structured(dims, rng):
    # smooth separable background: a few low-frequency sinusoid products
    grids = [np.arange(n) / n for n in dims]
    bg = np.zeros(dims)
    for amp, freq in ((1.0, 0.5), (0.6, 1.0), (0.35, 1.5)):
        vecs = [np.sin(2 * np.pi * freq * g + rng.uniform(0, 2 * np.pi)) for g in grids]
        bg += amp * np.einsum("i,j,k->ijk", *vecs)
    # localized high-variation block, at most 10% of every index range
    width = [max(1, n // 10) for n in dims]
    start = [int(rng.integers(0, n - w + 1)) for n, w in zip(dims, width)]
    region = tuple(slice(s, s + w) for s, w in zip(start, width))
    # rough (white-noise) factors, low multilinear rank inside the block
    inner = [min(_BLOCK_RANK, w) for w in width]
    block = multi_mode_product(
        rng.standard_normal(inner),
        [rng.standard_normal((w, r)) for w, r in zip(width, inner)])
    scale = np.sqrt(frobenius_norm_sq(bg) / frobenius_norm_sq(block))
    out = bg.copy()
    out[region] += scale * block
    return out


def generate(spec):
    """Draw the synthetic tensor described by ``spec``."""
    dims = tuple(int(d) for d in spec.dims)
    ranks = check_ranks(dims, spec.ranks)
    rng = make_rng(spec.seed)
    if spec.kind == "structured-field":
        signal = _structured(dims, rng)
    else:
        signal = _lowrank(dims, ranks, rng)
    if spec.kind == "exact-lowrank" or spec.noise_level == 0:
        return signal
    noise = rng.standard_normal(dims)
    noise *= spec.noise_level * np.sqrt(frobenius_norm_sq(signal) / frobenius_norm_sq(noise))
    return signal + noise


@dataclass
class LearningCurveRecord:
    method: str
    trial: int
    n_allow: int
    err: float
    used_space_ratio: float
    wall_time: float
    decomposition: object = None

    fields = ("method", "trial", "n_allow", "err", "used_space_ratio", "wall_time")

    def as_row(self):
        return [getattr(self, f) for f in self.fields]


def trial_seed(master, method, trial):
    """Reproducible stream for one (method, trial).

    The budget is deliberately left out: a trial replays the same draws at
    every budget, so a larger budget extends the smaller run and used space
    grows with ``n_allow``.
    """
    return np.random.SeedSequence([int(master), _METHOD_IDS[method], int(trial)])


def run_method(t, method, ranks, n_allow, n_batch, rng):
    """Run one sampler; returns ``(TuckerDecomposition, SampleLog)``."""
    if method == "rsct":
        return rsct_baseline(t, ranks, n_allow, rng)
    if method == "psct":
        return psct(t, ranks, n_allow, n_batch, rng)[:2]
    if method == "psct-permute":
        return psct_permute(t, ranks, n_allow, n_batch, rng)[:2]
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _timed_trial(t, method, ranks, n_allow, n_batch, seed, repeats=1):
    times = []
    for _ in range(repeats):
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        decomp, log = run_method(t, method, ranks, n_allow, n_batch, rng)
        times.append(time.perf_counter() - start)
    err = relative_error(reconstruct(decomp), t)
    ratio = log.used_space_ratio(t.shape)
    return decomp, err, ratio, float(np.median(times))


def learning_curve(t, ranks, budgets, methods=METHODS, trials=30, seed=0,
                   n_batch=10, keep=False, skipped=None):
    """Error against sample budget, one record per (method, budget, trial).

    Budgets a method cannot run are skipped; when ``skipped`` is a list the
    ``(method, n_allow, trial, reason)`` tuples are appended to it.
    ``keep`` stores each decomposition on its record.
    """
    budgets = [int(b) for b in budgets]
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ValueError("budgets must be strictly increasing")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    records = []
    for method in methods:
        for n_allow in budgets:
            for trial in range(trials):
                ss = trial_seed(seed, method, trial)
                try:
                    decomp, err, ratio, elapsed = _timed_trial(
                        t, method, ranks, n_allow, n_batch, ss)
                except (BudgetError, SketchError) as exc:
                    if skipped is not None:
                        skipped.append((method, n_allow, trial, str(exc)))
                    continue
                records.append(LearningCurveRecord(
                    method=method, trial=trial, n_allow=n_allow, err=err,
                    used_space_ratio=ratio, wall_time=elapsed,
                    decomposition=decomp if keep else None))
    return records


QUANTILES = (0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0)


def comparison_table(t, ranks, n_allow, methods=METHODS, trials=100, seed=0,
                     n_batch=10, repeats=3):
    """Per-method error and time summary over repeated trials.

    Each trial is timed ``repeats`` times with the same seed and the median
    is kept. Quantiles are returned for violin-style plots.
    """
    summary = {}
    for method in methods:
        errs, times = [], []
        for trial in range(trials):
            ss = trial_seed(seed, method, trial)
            _, err, _, elapsed = _timed_trial(t, method, ranks, n_allow, n_batch,
                                              ss, repeats=repeats)
            errs.append(err)
            times.append(elapsed)
        errs = np.array(errs)
        times = np.array(times)
        summary[method] = {
            "mean_err": float(errs.mean()),
            "mean_time": float(times.mean()),
            "err_quantiles": dict(zip(QUANTILES, np.quantile(errs, QUANTILES).tolist())),
            "time_quantiles": dict(zip(QUANTILES, np.quantile(times, QUANTILES).tolist())),
            "errs": errs.tolist(),
        }
    return summary


def median_curve(records):
    """``{method: [(n_allow, median err, median used space ratio), ...]}``."""
    groups = {}
    for r in records:
        groups.setdefault(r.method, {}).setdefault(r.n_allow, []).append(r)
    out = {}
    for method, by_budget in groups.items():
        out[method] = [
            (b, float(np.median([r.err for r in rs])),
             float(np.median([r.used_space_ratio for r in rs])))
            for b, rs in sorted(by_budget.items())]
    return out


def space_to_target(records, target_err=0.1):
    """Smallest used-space ratio at which each method's median error meets
    ``target_err``. Methods that never get there are left out.
    """
    out = {}
    for method, curve in median_curve(records).items():
        hits = [ratio for _, err, ratio in curve if err <= target_err]
        if hits:
            out[method] = min(hits)
    return out
