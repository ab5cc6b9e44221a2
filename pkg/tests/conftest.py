"""Shared, session-cached objects: building an AbsorptionGF or a DP solve takes
about a second, so each walk is built once per test session."""
from functools import lru_cache

import pytest

from qwalk import fixtures
from qwalk.genfun import absorption_gf
from qwalk.oracle import dp_absorption


@lru_cache(maxsize=None)
def agf_for(name: str, start=(1, 1)):
    return absorption_gf(fixtures.FIXTURES[name](start))


@lru_cache(maxsize=None)
def dp_for(name: str, start=(1, 1), N: int = 400):
    return dp_absorption(fixtures.FIXTURES[name](start), N, error_bound=False)


@lru_cache(maxsize=None)
def random_batch(n: int, seed: int, start=(1, 1)):
    return tuple(fixtures.random_walks(n, seed=seed, start=start))


@pytest.fixture(scope="session")
def w1_agf():
    return agf_for("W1")


# --- acceptance report ---------------------------------------------------------
# test_acceptance.py records one line per criterion here; the lines are printed
# at the end of the run whether or not the criterion passed.
ACCEPTANCE: dict[int, str] = {}


def record(n: int, title: str, ok: bool, detail: str, seconds: float) -> bool:
    ACCEPTANCE[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d} {title}: {detail} ({seconds:.1f} s)"
    print(ACCEPTANCE[n])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
