import numpy as np
import pytest

from exrouter.verify import random_graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_graph(rng):
    def make(N, density=0.6):
        return random_graph(rng, N, density)

    return make


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line; the summary is printed at the end of the run."""

    def log(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
