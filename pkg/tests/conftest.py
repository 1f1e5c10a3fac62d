import numpy as np
import pytest

from waveatom import geometry
from waveatom.kernels import assemble_combined, assemble_double, assemble_single


@pytest.fixture(scope="session")
def kite():
    return geometry.make_kite()


@pytest.fixture(scope="session")
def circle():
    return geometry.make_ellipse(1.0, 1.0)


@pytest.fixture(scope="session")
def kite_kernels(kite):
    """Single, double and combined kernels for the kite at k=32, N=256."""
    single = assemble_single(kite, 32, 256)
    double = assemble_double(kite, 32, 256)
    return {
        "single": single,
        "double": double,
        "combined": assemble_combined(kite, 32, 256, single=single, double=double),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    """Log one acceptance line; the terminal summary repeats them in order."""
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: str(item[0])):
            terminalreporter.write_line(line)
