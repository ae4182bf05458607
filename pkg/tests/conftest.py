import numpy as np
import pytest

from flexkrylov.linop import DiagonalOperator


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_diagonals(rng, n, count, lo=0.2, hi=5.0):
    """A fixed sequence of random positive diagonal operators."""
    return [DiagonalOperator(rng.uniform(lo, hi, n)) for _ in range(count)]


def hessenberg(rng, k):
    """Random (k+1) x k upper Hessenberg matrix with a safely nonzero subdiagonal."""
    m = np.triu(rng.standard_normal((k + 1, k)), -1)
    idx = np.arange(k)
    m[idx + 1, idx] = rng.uniform(0.5, 2.0, k)
    return m


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Usage: ``criterion(n, ok, detail)``.  The line is printed immediately and
    repeated in the terminal summary so that it survives output capture.
    """

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
