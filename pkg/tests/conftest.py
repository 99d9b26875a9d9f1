import sys
import numpy as np
import pytest

from lres import canonical_system as cs

RS_SEED = 7


@pytest.fixture(scope="session")
def fs():
    return cs.free_system()


@pytest.fixture(scope="session")
def rs():
    return cs.random_system(RS_SEED)


@pytest.fixture(params=["fs", "rs"])
def system(request, fs, rs):
    return {"fs": fs, "rs": rs}[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rotation(theta):
    """``exp(-J theta)`` for the canonical 2x2 ``J``: a rotation by ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
