import numpy as np
import pytest

from electromech.model import derive
from electromech.presets import base_params

_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Collects ``(number, ok, detail)`` lines printed at the end of the run."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def base():
    return derive(base_params())


@pytest.fixture(scope="session")
def squeeze_point():
    """Stable operating point with strong output squeezing."""
    return base_params(P=4e-12, f_d=7.5e9 - 0.1e6, T_a=0.01, T_b=0.01, T_c=2.0)


@pytest.fixture(scope="session")
def entangled_point():
    """Stable, entangled operating point without the qubit-mediated coupling."""
    return base_params(P=1e-6, f_d=7.5e9 - 10e6, T_a=0.05, T_c=0.01, g_b=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
