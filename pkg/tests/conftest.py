import numpy as np
import pytest

from cvteleport import _accel
from cvteleport.conditioning import SubtractionEvent, subtract_photons
from cvteleport.states import normalize, odd_cat_state, two_mode_squeezed_vacuum
from cvteleport.teleport import averaged_density_matrix, default_outcome_grid

Q_REF = 0.8178
ALPHA_REF = 1.5j
R_REF = 0.15
DIM = 64

BACKENDS = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    monkeypatch.setenv(_accel.BACKEND_ENV, request.param)
    return request.param


@pytest.fixture(scope="session")
def rng_seed():
    return 12345


@pytest.fixture(scope="session")
def cat():
    return odd_cat_state(ALPHA_REF, DIM)


@pytest.fixture(scope="session")
def tmsv():
    return two_mode_squeezed_vacuum(Q_REF, DIM)


@pytest.fixture(scope="session")
def reference_event():
    return SubtractionEvent.symmetric(1, R_REF)


@pytest.fixture(scope="session")
def subtracted(tmsv, reference_event):
    state, prob = subtract_photons(tmsv, reference_event)
    return normalize(state), prob


@pytest.fixture(scope="session")
def rho_tmsv(cat, tmsv):
    return averaged_density_matrix(cat, normalize(tmsv), default_outcome_grid())


@pytest.fixture(scope="session")
def rho_subtracted(cat, subtracted):
    return averaged_density_matrix(cat, subtracted[0], default_outcome_grid())


def random_states(dim, count, seed, support=10):
    from cvteleport.states import random_state

    rng = np.random.default_rng(seed)
    return [random_state(dim, support, rng) for _ in range(count)]


# acceptance lines collected by tests/test_acceptance.py and echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
