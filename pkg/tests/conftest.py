import warnings

import numpy as np
import pytest
from hypothesis import settings

from mhproj.model import dgp_from_roots, named_dgp
from mhproj.simulate import RngStream, simulate_var

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by the acceptance suite
CRITERIA = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, detail=""):
        CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def table1_params():
    return dgp_from_roots(named_dgp("stationary"))


@pytest.fixture(scope="session")
def i1_params():
    return dgp_from_roots(named_dgp("i1"))


@pytest.fixture(scope="session")
def stationary_panel(table1_params):
    return simulate_var(table1_params, 400, RngStream(7))


@pytest.fixture(autouse=True)
def _quiet_augmentation_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="h\\^2/T")
        yield


def random_stable_var(rng, k=2, p=2, radius=0.8):
    """Random stable VAR coefficients with spectral radius ``radius``."""
    from mhproj.model import VarParams, spectral_radius

    phi = rng.normal(size=(p, k, k))
    prm = VarParams(phi, np.eye(k))
    phi = phi * (radius / spectral_radius(prm)) ** np.arange(1, p + 1)[:, None, None]
    a = rng.normal(size=(k, k))
    return VarParams(phi, a @ a.T + k * np.eye(k))
