"""Shared fixtures; expensive reference runs are computed once per session."""
import time

import numpy as np
import pytest

from decaykit.evolution import TimeGrid, lifetime, survival_decomposed, survival_line, survival_oracle
from decaykit.spectral import FlatCutoff

FLAT = FlatCutoff(gamma=1.0, Lambda=10.0)
FLAT_EA = 1.0


@pytest.fixture(scope="session")
def flat():
    return FLAT


@pytest.fixture(scope="session")
def flat_triangle():
    """Line, decomposed and N=4096 oracle amplitudes for the flat band at lam=0.1."""
    lam = 0.1
    grid = TimeGrid.linear(0.0, 10 * lifetime(FLAT, FLAT_EA, lam), 401)
    out = {"grid": grid, "lam": lam, "seconds": {}}
    for name, fn in [
        ("line", lambda: survival_line(FLAT, FLAT_EA, lam, grid)),
        ("decomposed", lambda: survival_decomposed(FLAT, FLAT_EA, lam, grid)),
        ("oracle", lambda: survival_oracle(FLAT, FLAT_EA, lam, 4096, grid)),
    ]:
        start = time.perf_counter()
        out[name] = fn()
        out["seconds"][name] = time.perf_counter() - start
    return out


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


ACCEPTANCE = {}


def record_criterion(cid, ok, detail):
    """Store the outcome of acceptance criterion `cid` for the terminal summary."""
    ACCEPTANCE[cid] = (bool(ok), detail)
    print(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
