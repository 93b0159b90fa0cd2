import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lapsewick.geometry import Grid, flat_spec, random_spec

settings.register_profile(
    "lapsewick",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lapsewick")


@pytest.fixture
def grid1():
    return Grid(1, 8, 16)


@pytest.fixture
def grid2():
    return Grid(2, 6, 6)


@pytest.fixture
def random_triple1(grid1):
    return random_spec(1, seed=3).on(grid1)


@pytest.fixture
def random_triple2(grid2):
    return random_spec(2, seed=5).on(grid2)


@pytest.fixture
def flat_triple1(grid1):
    return flat_spec(1).on(grid1)


def point_triple(N, shift, g, signature=-1):
    """Single-point triple from plain numbers."""
    from lapsewick.geometry import AdmTriple

    return AdmTriple(np.array([N], dtype=float), np.array([shift], dtype=float), np.array([g], dtype=float), signature)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion and return the verdict."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
