import csv
import json
import struct

import numpy as np
import pytest

from progsketch import io
from progsketch.bench import LearningCurveRecord
from progsketch.cli import main


def test_tensor_round_trip_bit_exact(tmp_path):
    t = np.random.default_rng(0).standard_normal((4, 3, 2)) * 1e-300
    t[0, 0, 0] = np.nextafter(1.0, 2.0)
    io.write_tensor(t, tmp_path / "a.tns")
    back = io.read_tensor(tmp_path / "a.tns")
    assert back.tobytes() == t.tobytes()


def test_truncated_payload(tmp_path):
    path = tmp_path / "a.tns"
    io.write_tensor(np.ones((2, 2, 2)), path)
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(io.TensorFormatError, match="length mismatch"):
        io.read_tensor(path)


def test_hand_built_file(tmp_path, t222):
    header = b'{"dims": [2, 2, 2], "dtype": "f64", "order": "i3-fastest", "version": 1}\n'
    payload = struct.pack("<8d", *range(1, 9))
    path = tmp_path / "h.tns"
    path.write_bytes(header + payload)
    np.testing.assert_array_equal(io.read_tensor(path), t222)


@pytest.mark.parametrize("header", [
    b"not json\n",
    b'{"dims": [2, 2], "dtype": "f64", "order": "i3-fastest", "version": 1}\n',
    b'{"dims": [2, 2, 2], "dtype": "f32", "order": "i3-fastest", "version": 1}\n',
    b'{"dims": [2, 2, 2]}\n',
])
def test_malformed_headers(tmp_path, header):
    path = tmp_path / "bad.tns"
    path.write_bytes(header + b"\0" * 64)
    with pytest.raises(io.TensorFormatError):
        io.read_tensor(path)


def test_nonfinite_payload(tmp_path):
    header = b'{"dims": [1, 1, 2], "dtype": "f64", "order": "i3-fastest", "version": 1}\n'
    path = tmp_path / "nan.tns"
    path.write_bytes(header + struct.pack("<2d", 1.0, float("inf")))
    with pytest.raises(io.TensorFormatError, match="non-finite"):
        io.read_tensor(path)


def test_records_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    recs = [LearningCurveRecord("psct", i, 30, float(rng.random() / 3), float(rng.random()),
                                float(rng.random() * 1e-3)) for i in range(5)]
    io.write_records_csv(recs, tmp_path / "r.csv")
    back = io.read_records_csv(tmp_path / "r.csv")
    assert [r.as_row() for r in back] == [r.as_row() for r in recs]
    with open(tmp_path / "r.csv") as fh:
        assert next(csv.reader(fh)) == ["method", "trial", "n_allow", "err",
                                        "used_space_ratio", "wall_time"]


@pytest.fixture
def lowrank_file(tmp_path):
    path = tmp_path / "t.tns"
    assert main(["gen", "--kind", "exact-lowrank", "--dims", "16,14,12", "--ranks", "2,3,2",
                 "--seed", "1", "--out", str(path)]) == 0
    return path


def test_gen_then_hosvd(tmp_path, lowrank_file):
    out = tmp_path / "h.json"
    assert main(["hosvd", "--in", str(lowrank_file), "--ranks", "2,3,2",
                 "--out-json", str(out)]) == 0
    meta = json.loads(out.read_text())
    assert meta["err"] <= 1e-12 and meta["dims"] == [16, 14, 12]


def test_psct_cli_deterministic(tmp_path, lowrank_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.json"
        assert main(["psct", "--in", str(lowrank_file), "--ranks", "2,3,2", "--n-allow", "20",
                     "--n-batch", "5", "--seed", "7", "--out-json", str(out),
                     "--trace-csv", str(tmp_path / f"{name}.csv")]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    meta = json.loads(outs[0])
    assert meta["err"] <= 1e-6 and meta["entries_touched"] <= 16 * 14 * 12
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = list(csv.reader(open(tmp_path / "a.csv")))
    assert rows[0][:4] == ["round", "p1", "p2", "p3"] and len(rows) - 1 == meta["rounds"]


@pytest.mark.parametrize("method", ["rsct", "psct-permute"])
def test_other_methods_cli(tmp_path, lowrank_file, method):
    out = tmp_path / "m.json"
    assert main([method, "--in", str(lowrank_file), "--ranks", "2,3,2", "--n-allow", "25",
                 "--seed", "3", "--out-json", str(out)]) == 0
    meta = json.loads(out.read_text())
    assert meta["method"] == method and sum(meta["budgets"]["n"]) >= 25


def test_bench_and_space_cli(tmp_path, lowrank_file, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--in", str(lowrank_file), "--ranks", "2,3,2", "--budgets",
                 "15,20,30", "--methods", "rsct,psct", "--trials", "5", "--seed", "0",
                 "--out-csv", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 31
    space = tmp_path / "s.json"
    assert main(["space", "--in-csv", str(out), "--target", "0.1",
                 "--out-json", str(space)]) == 0
    result = json.loads(space.read_text())["space_to_target"]
    assert set(result) == {"rsct", "psct"}
    assert "psct\t" in capsys.readouterr().out


def test_scree_and_table_cli(tmp_path, lowrank_file):
    out = tmp_path / "s.csv"
    assert main(["scree", "--in", str(lowrank_file), "--mode", "2", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["r", "scree"] and float(rows[1][1]) == 1.0
    assert abs(float(rows[4][1])) < 1e-12
    table = tmp_path / "t.json"
    assert main(["table", "--in", str(lowrank_file), "--ranks", "2,3,2", "--n-allow", "20",
                 "--trials", "3", "--out-json", str(table)]) == 0
    assert set(json.loads(table.read_text())) == {"rsct", "psct", "psct-permute"}


def test_exit_codes(tmp_path, lowrank_file, capsys):
    assert main(["psct", "--in", str(lowrank_file)]) == 2
    assert main(["bench", "--in", str(lowrank_file), "--ranks", "2,3,2", "--budgets", "20",
                 "--methods", "nope", "--out-csv", "x"]) == 2
    assert main(["psct", "--in", str(lowrank_file), "--ranks", "2,3,2", "--n-allow", "3",
                 "--out-json", str(tmp_path / "x.json")]) == 3
    assert main(["hosvd", "--in", str(lowrank_file), "--ranks", "20,3,2",
                 "--out-json", str(tmp_path / "x.json")]) == 3
    assert main(["hosvd", "--in", str(tmp_path / "missing.tns"), "--ranks", "2,2,2",
                 "--out-json", str(tmp_path / "x.json")]) == 4
    bad = tmp_path / "bad.tns"
    bad.write_bytes(b"garbage\n")
    assert main(["hosvd", "--in", str(bad), "--ranks", "2,2,2",
                 "--out-json", str(tmp_path / "x.json")]) == 4
    err_lines = [ln for ln in capsys.readouterr().err.splitlines() if ln.startswith("error:")]
    assert len(err_lines) == 6
    assert err_lines[0].startswith("error: usage:")
    assert err_lines[2].startswith("error: validation:")
    assert err_lines[4].startswith("error: io:")
