import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tentlab.grid import Grid
from tentlab.operator import CoefficientField, EllipticOperator
from tentlab.tent import TimeGrid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid64():
    return Grid(1, 64)


@pytest.fixture(scope="session")
def op64(grid64):
    return EllipticOperator(grid64)


@pytest.fixture(scope="session")
def op64_perturbed(grid64):
    return EllipticOperator(grid64, CoefficientField.perturbed(grid64))


@pytest.fixture(scope="session")
def times64(grid64):
    return TimeGrid.default(grid64, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
