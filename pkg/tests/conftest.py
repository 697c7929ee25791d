from pathlib import Path

import numpy as np
import pytest

from gec_combine.counting import CountMatrix, ErrorTypeIndex
from gec_combine.m2 import read_m2

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def reference():
    return read_m2(DATA / "ref.m2")


@pytest.fixture
def sys_a():
    return read_m2(DATA / "sys_a.m2")


@pytest.fixture
def sys_b():
    return read_m2(DATA / "sys_b.m2")


def random_counts(rng, m, n, high=20):
    """Count matrix with integer entries drawn uniformly from [0, high]."""
    draw = lambda: rng.integers(0, high + 1, size=(m, n))
    return CountMatrix(draw(), draw(), draw(), tuple(f"s{i}" for i in range(m)),
                       ErrorTypeIndex(tuple(f"T{j:02d}" for j in range(n))))


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
