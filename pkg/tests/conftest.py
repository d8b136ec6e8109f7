import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def w_euclid():
    from minspec.model_manifold import euclidean
    return euclidean(60.0)


@pytest.fixture(scope="session")
def plane_profile():
    from minspec.growth import default_r_grid, volume_profile
    from minspec.immersions import catalog
    chart = catalog("plane", 50.0)
    return volume_profile(chart, default_r_grid(0.0, 50.0, extra=[2, 5, 10, 20]))


@pytest.fixture(scope="session")
def catenoid_profile():
    from minspec.growth import default_r_grid, volume_profile
    from minspec.immersions import catalog
    chart = catalog("catenoid", 50.0)
    return volume_profile(chart, default_r_grid(1.0, 50.0, extra=[2, 5, 10, 20]))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
