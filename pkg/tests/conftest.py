import numpy as np
import pytest

from progsketch.linalg import qr_thin


@pytest.fixture
def t222():
    """2x2x2 tensor with entry (i1, i2, i3) = 4*i1 + 2*i2 + i3 + 1."""
    return np.arange(1, 9, dtype=float).reshape(2, 2, 2)


def lowrank(dims, ranks, seed=0):
    rng = np.random.default_rng(seed)
    core = rng.standard_normal(ranks)
    fs = [qr_thin(rng.standard_normal((n, r)))[0] for n, r in zip(dims, ranks)]
    return np.einsum("abc,ia,jb,kc->ijk", core, *fs)


@pytest.fixture
def make_lowrank():
    return lowrank


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in name and rep.when == "call":
                label = name.split("::")[-1][len("test_"):]
                lines.append((label, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, verdict in sorted(lines, key=lambda x: int(x[0].split("_")[1])):
            terminalreporter.write_line(f"{verdict}  {label}")
