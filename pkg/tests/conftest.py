import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from poscone.algebra import HermitianElement, TracialAlgebra

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def m2():
    return TracialAlgebra.matrix(2)


@pytest.fixture
def two_block():
    return TracialAlgebra.from_blocks([(3, 0.6), (2, 0.4)])


@pytest.fixture
def pauli(m2):
    sx = HermitianElement(m2, [np.array([[0.0, 1.0], [1.0, 0.0]])])
    sy = HermitianElement(m2, [np.array([[0.0, -1j], [1j, 0.0]])])
    sz = HermitianElement(m2, [np.diag([1.0, -1.0])])
    return sx, sy, sz
