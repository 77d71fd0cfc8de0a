import numpy as np
import pytest

from dynsamp.core import CirculantOperator, SamplingPattern
from dynsamp.experiments import (
    FIVE_TAP_D,
    FIVE_TAP_OMEGA,
    decreasing_filter,
    five_tap_filter,
)


@pytest.fixture
def five_tap():
    """Growing operator on Z_18 with its non-uniform sampling set."""
    A = CirculantOperator(five_tap_filter())
    return A, SamplingPattern.from_one_based(FIVE_TAP_OMEGA, FIVE_TAP_D)


@pytest.fixture
def decreasing15():
    return CirculantOperator(decreasing_filter(15))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_filter(rng, d):
    from dynsamp.core import RealSymmetricFilter, symmetrize

    return RealSymmetricFilter(symmetrize(rng.standard_normal(d)))


ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; all lines print at the end of the run."""

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
