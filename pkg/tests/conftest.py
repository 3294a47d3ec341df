import numpy as np
import pytest

from revpref.core import Dataset


@pytest.fixture
def violating():
    """Two observations whose bundles sit on the wrong budgets."""
    return Dataset.from_arrays([[10, 1], [1, 10]], [[10, 1], [1, 10]])


@pytest.fixture
def swapped():
    return Dataset.from_arrays([[1, 10], [10, 1]], [[10, 1], [1, 10]])


@pytest.fixture
def cobb_douglas_pair():
    """Cobb-Douglas demand with alpha=(1/2, 1/2) and income 2."""
    return Dataset.from_arrays([[1, 1], [0.5, 1]], [[1, 1], [2, 1]])


@pytest.fixture
def single():
    return Dataset.from_arrays([[1, 1]], [[1, 1]])


def random_dataset(rng, n, m, low=0.1, high=10.0):
    q = np.exp(rng.uniform(np.log(low), np.log(high), size=(n, m)))
    p = np.exp(rng.uniform(np.log(low), np.log(high), size=(n, m)))
    return Dataset.from_arrays(q, p)


def acceptance_suite(count=200, seed=2010):
    """Seeded random datasets: n in [2, 7], m in [2, 5], log-uniform on [0.1, 10]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n, m = int(rng.integers(2, 8)), int(rng.integers(2, 6))
        out.append(random_dataset(rng, n, m))
    return out


_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, title = mark.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number, (True, title))
    _CRITERIA[number] = (prev[0] and ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
