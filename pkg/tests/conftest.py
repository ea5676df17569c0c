import pytest

from critset.grid import Grid, GridFunction
from critset.nonlinearity import softplus


@pytest.fixture(scope="session")
def grid():
    return Grid(2048)


@pytest.fixture(scope="session")
def zero(grid):
    return GridFunction.zero(grid)


@pytest.fixture(scope="session")
def sin_t(grid):
    return GridFunction.sine([1.0], grid)


@pytest.fixture(scope="session")
def convex():
    """Softplus with f' ranging over (-12, 3): crosses -1, -4, -9."""
    return softplus(-12.0, 3.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
