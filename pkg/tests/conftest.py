import numpy as np
import pytest

from complcharge.cubature import build_cylinder
from complcharge.kernel import KernelSpec
from complcharge.operator import assemble
from complcharge.spectral import decompose

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def cylinder():
    """The acceptance cubature: N = 3 * 8 * 6 = 144 nodes."""
    return build_cylinder(1.0, 1.0, 3, 8, 6)


@pytest.fixture(scope="session")
def gauss_spec():
    return KernelSpec("smooth_gaussian", sigma=0.5, d=1.2)


@pytest.fixture(scope="session")
def coulomb_spec():
    return KernelSpec("coulomb_z", epsilon=0.1, d=1.2)


@pytest.fixture(scope="session")
def gauss_op(cylinder, gauss_spec):
    return assemble(cylinder, gauss_spec)


@pytest.fixture(scope="session")
def gauss_es(gauss_op):
    return decompose(gauss_op, solver="jacobi")


@pytest.fixture(scope="session")
def coulomb_op(cylinder, coulomb_spec):
    return assemble(cylinder, coulomb_spec)


@pytest.fixture(scope="session")
def coulomb_es(coulomb_op):
    return decompose(coulomb_op, solver="jacobi")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
