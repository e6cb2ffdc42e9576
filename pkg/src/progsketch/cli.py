"""Command-line entry point: ``progsketch <command> ...``.

Exit codes: 0 success, 2 usage error, 3 validation error (rank or budget
infeasible), 4 I/O error. Failures print one ``error: <kind>: <reason>``
line to stderr.
"""
import argparse
import csv
import json
import sys

from . import bench, io
from .progressive import psct, psct_permute
from .sct import rsct_baseline
from .tucker import hosvd, reconstruct, relative_error, scree

EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _triple(text):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N1,N2,N3 integers, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    return vals


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _methods(text):
    out = [m for m in text.split(",") if m]
    bad = [m for m in out if m not in bench.METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {bad}; choose from {','.join(bench.METHODS)}")
    return out


def build_parser():
    p = _Parser(prog="progsketch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic tensor file")
    g.add_argument("--kind", choices=bench.KINDS, default="exact-lowrank")
    g.add_argument("--dims", type=_triple, required=True)
    g.add_argument("--ranks", type=_triple, required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("scree", help="residual spectral energy of one unfolding")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--mode", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--out", required=True)

    h = sub.add_parser("hosvd", help="truncated HOSVD error and metadata")
    h.add_argument("--in", dest="inp", required=True)
    h.add_argument("--ranks", type=_triple, required=True)
    h.add_argument("--out-json", required=True)

    for name in bench.METHODS:
        m = sub.add_parser(name, help=f"run {name} once")
        m.add_argument("--in", dest="inp", required=True)
        m.add_argument("--ranks", type=_triple, required=True)
        m.add_argument("--n-allow", type=int, required=True)
        m.add_argument("--n-batch", type=int, default=10)
        m.add_argument("--seed", type=int, default=0)
        m.add_argument("--out-json", required=True)
        if name != "rsct":
            m.add_argument("--trace-csv")

    b = sub.add_parser("bench", help="learning curves over budgets and trials")
    b.add_argument("--in", dest="inp", required=True)
    b.add_argument("--ranks", type=_triple, required=True)
    b.add_argument("--budgets", type=_int_list, required=True)
    b.add_argument("--methods", type=_methods, default=list(bench.METHODS))
    b.add_argument("--trials", type=int, default=30)
    b.add_argument("--n-batch", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out-csv", required=True)

    t = sub.add_parser("table", help="error/time summary at one budget")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--ranks", type=_triple, required=True)
    t.add_argument("--n-allow", type=int, required=True)
    t.add_argument("--methods", type=_methods, default=list(bench.METHODS))
    t.add_argument("--trials", type=int, default=100)
    t.add_argument("--n-batch", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out-json", required=True)

    sp = sub.add_parser("space", help="used-space ratio needed to reach an error target")
    sp.add_argument("--in-csv", required=True)
    sp.add_argument("--target", type=float, default=0.1)
    sp.add_argument("--out-json")
    return p


def _cmd_gen(a):
    spec = bench.SyntheticSpec(dims=a.dims, kind=a.kind, ranks=a.ranks,
                               noise_level=a.noise, seed=a.seed)
    io.write_tensor(bench.generate(spec), a.out)


def _cmd_scree(a):
    values = scree(io.read_tensor(a.inp), a.mode)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "scree"])
        for r, v in enumerate(values):
            w.writerow([r, repr(float(v))])


def _cmd_hosvd(a):
    t = io.read_tensor(a.inp)
    d = hosvd(t, a.ranks)
    err = relative_error(reconstruct(d), t)
    io.write_json(io.decomposition_metadata("hosvd", t, d, err, None), a.out_json)


def _cmd_method(a):
    t = io.read_tensor(a.inp)
    trace = None
    if a.command == "rsct":
        d, log = rsct_baseline(t, a.ranks, a.n_allow, a.seed)
        extra = {"n_allow": a.n_allow}
    else:
        run = psct if a.command == "psct" else psct_permute
        d, log, trace = run(t, a.ranks, a.n_allow, a.n_batch, a.seed,
                            trace=a.trace_csv is not None)
        extra = {"n_allow": a.n_allow, "n_batch": a.n_batch}
        if trace is not None and a.trace_csv:
            extra["rounds"] = len(trace.rounds)
            extra["topup_rows"] = trace.topup_rows
    err = relative_error(reconstruct(d), t)
    io.write_json(io.decomposition_metadata(a.command, t, d, err, a.seed, log, **extra),
                  a.out_json)
    if a.command != "rsct" and a.trace_csv:
        io.write_trace_csv(trace, a.trace_csv)


def _cmd_bench(a):
    t = io.read_tensor(a.inp)
    skipped = []
    records = bench.learning_curve(t, a.ranks, a.budgets, a.methods, a.trials, a.seed,
                                   n_batch=a.n_batch, skipped=skipped)
    for method, n_allow, trial, reason in skipped:
        print(f"skipped: {method} n_allow={n_allow} trial={trial}: {reason}",
              file=sys.stderr)
    io.write_records_csv(records, a.out_csv)


def _cmd_table(a):
    t = io.read_tensor(a.inp)
    summary = bench.comparison_table(t, a.ranks, a.n_allow, a.methods, a.trials,
                                     a.seed, n_batch=a.n_batch)
    for v in summary.values():
        v["err_quantiles"] = {str(q): x for q, x in v["err_quantiles"].items()}
        v["time_quantiles"] = {str(q): x for q, x in v["time_quantiles"].items()}
    io.write_json(summary, a.out_json)


def _cmd_space(a):
    records = io.read_records_csv(a.in_csv)
    result = bench.space_to_target(records, a.target)
    for method in sorted({r.method for r in records}):
        ratio = result.get(method)
        print(f"{method}\t{'unreached' if ratio is None else repr(ratio)}")
    if a.out_json:
        io.write_json({"target": a.target, "space_to_target": result}, a.out_json)


_COMMANDS = {"gen": _cmd_gen, "scree": _cmd_scree, "hosvd": _cmd_hosvd,
             "bench": _cmd_bench, "table": _cmd_table, "space": _cmd_space,
             **{m: _cmd_method for m in bench.METHODS}}


def _fail(code, kind, exc):
    msg = " ".join(str(exc).split())
    print(f"error: {kind}: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    try:
        _COMMANDS[args.command](args)
    except io.TensorFormatError as exc:
        return _fail(EXIT_IO, "io", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except (ValueError, ArithmeticError, IndexError) as exc:
        return _fail(EXIT_VALIDATION, "validation", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
