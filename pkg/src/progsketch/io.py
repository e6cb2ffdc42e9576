"""Tensor files and result serialization.

Tensor file layout: one line of JSON header terminated by ``\\n``, then
the payload as little-endian float64 values in canonical order (``i3``
fastest)::

    {"dims": [N1, N2, N3], "dtype": "f64", "order": "i3-fastest", "version": 1}
"""
import csv
import json

import numpy as np

from .bench import LearningCurveRecord
from .tensor import as_tensor

HEADER_KEYS = {"dims", "dtype", "order", "version"}


class TensorFormatError(ValueError):
    pass


def write_tensor(t, path):
    t = as_tensor(t)
    header = {"dims": list(t.shape), "dtype": "f64", "order": "i3-fastest", "version": 1}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii") + b"\n")
        fh.write(t.astype("<f8", copy=False).tobytes(order="C"))


def read_tensor(path):
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"malformed header: {exc}") from None
    if not isinstance(header, dict) or not HEADER_KEYS <= header.keys():
        raise TensorFormatError(f"header must contain {sorted(HEADER_KEYS)}")
    if header["dtype"] != "f64" or header["order"] != "i3-fastest" or header["version"] != 1:
        raise TensorFormatError(
            f"unsupported dtype/order/version: {header['dtype']}/{header['order']}/"
            f"{header['version']}")
    dims = header["dims"]
    if (not isinstance(dims, list) or len(dims) != 3
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise TensorFormatError(f"dims must be three positive integers, got {dims!r}")
    expected = 8 * dims[0] * dims[1] * dims[2]
    if len(payload) != expected:
        raise TensorFormatError(
            f"payload length mismatch: expected {expected} bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype="<f8")
    if not np.all(np.isfinite(data)):
        raise TensorFormatError("payload contains non-finite values")
    return as_tensor(data.astype(np.float64), dims)


def _fmt(v):
    if isinstance(v, float):
        return repr(float(v))  # shortest repr that round-trips exactly
    return str(v)


def write_records_csv(records, path_or_file):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LearningCurveRecord.fields)
        for r in records:
            w.writerow([_fmt(v) for v in r.as_row()])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def read_records_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(LearningCurveRecord.fields):
            raise TensorFormatError(f"unexpected CSV header {reader.fieldnames}")
        return [LearningCurveRecord(
            method=row["method"], trial=int(row["trial"]), n_allow=int(row["n_allow"]),
            err=float(row["err"]), used_space_ratio=float(row["used_space_ratio"]),
            wall_time=float(row["wall_time"])) for row in reader]


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace.header)
        for row in trace.as_rows():
            w.writerow([_fmt(v) for v in row])


def decomposition_metadata(method, t, decomp, err, seed, log=None, **extra):
    meta = {
        "method": method,
        "dims": list(t.shape),
        "ranks": list(decomp.ranks),
        "err": err,
        "seed": seed,
    }
    if log is not None:
        b = log.budget
        meta["budgets"] = {"r": list(b.r), "k": list(b.k), "s": list(b.s),
                           "m": list(b.m), "n": list(b.n)}
        meta["entries_touched"] = log.entries_touched
        meta["used_space_ratio"] = log.used_space_ratio(t.shape)
        meta["rows"] = [r.tolist() for r in log.rows]
    meta.update(extra)
    return meta


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
