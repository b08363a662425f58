import numpy as np
import pytest

from wgmlab import geometry
from wgmlab.modes import decay_fit, mode_sweep
from wgmlab.potential import effective_potential

SWEEP = list(range(20, 101, 10))
OMEGA = (1.4, 1.5)


@pytest.fixture(scope="session")
def annulus():
    return geometry.build_annulus(0.5, 1.0, 1.5, 1.0, 4.0)


@pytest.fixture(scope="session")
def pot(annulus):
    return effective_potential(annulus)


@pytest.fixture(scope="session")
def disk():
    return geometry.build_disk(1.5, 1.0, 1.0, 4.0)


@pytest.fixture(scope="session")
def flat():
    """``R = 1`` on ``[0, 1]`` with no coefficient jump: the Dirichlet Laplacian."""
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))
    prof = geometry.closed_form_profile(one, zero, 0.0, 1.0, False)
    return geometry.build_surface(prof, 0.5, 1.0, 1.0)


@pytest.fixture(scope="session")
def sweep(annulus):
    return mode_sweep(annulus, SWEEP)


@pytest.fixture(scope="session")
def fit(annulus, sweep):
    return decay_fit(annulus, SWEEP, OMEGA, modes=sweep)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
