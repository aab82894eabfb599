import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from entropic_sdot import Atoms, make_density, solve_unregularized

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def uniform():
    return make_density("uniform", low=-1.0, high=1.0)


@pytest.fixture(scope="session")
def gaussian():
    return make_density("gaussian", mean=0.0, sigma=1.0)


@pytest.fixture(scope="session")
def two_atoms():
    return Atoms.uniform([[-1.0], [1.0]])


@pytest.fixture(scope="session")
def skewed_atoms():
    return Atoms(np.array([[-1.0], [1.0]]), np.array([0.25, 0.75]))


@pytest.fixture(scope="session")
def symmetric_dual(uniform, two_atoms):
    return solve_unregularized(uniform, two_atoms)


@pytest.fixture(scope="session")
def skewed_dual(uniform, skewed_atoms):
    return solve_unregularized(uniform, skewed_atoms)


@pytest.fixture(scope="session")
def gaussian_dual(gaussian, two_atoms):
    return solve_unregularized(gaussian, two_atoms)


@pytest.fixture(scope="session")
def square():
    return make_density("uniform2d", polygon=[[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture(scope="session")
def square_dual(square):
    return solve_unregularized(square, Atoms.uniform([[0.25, 0.5], [0.75, 0.5]]))


@pytest.fixture(scope="session")
def random_dual():
    rng = np.random.default_rng(7)
    y = np.sort(rng.uniform(-2.0, 2.0, 4)).reshape(-1, 1)
    w = rng.uniform(0.5, 1.0, 4)
    return solve_unregularized(make_density("gaussian", mean=0.3, sigma=1.0), Atoms(y, w / w.sum()))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
