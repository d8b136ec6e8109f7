import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from minspec.growth import (EmptyTailError, GrowthProfile, default_r_grid, growth_exponents,
                            tail_window, theta, volume_profile)
from minspec.immersions import catalog

# independent 1-d quadrature of the catenoid (c = 1) area, frozen
CATENOID_VOLUME = {2: 20.94568354247109, 5: 137.64813246659904, 10: 589.0999906379423,
                   20: 2448.5185430245597, 50: 15600.729671352288}
# helicoid area int_{-r}^{r} 2 sqrt(r^2 - v^2) sqrt(1 + v^2) dv, frozen
HELICOID_VOLUME = {5: 191.78570016702676, 10: 1397.20930022822}


def test_plane_volume(plane_profile):
    for r in (2, 5, 10, 20, 50):
        assert plane_profile.volume_at(r) == pytest.approx(math.pi * r * r, rel=1e-3)
    np.testing.assert_allclose(plane_profile.theta, 1.0, rtol=1e-3)


def test_catenoid_volume_and_density(catenoid_profile):
    for r, v in CATENOID_VOLUME.items():
        assert catenoid_profile.volume_at(r) == pytest.approx(v, rel=1e-3)
    assert 1.9 <= catenoid_profile.theta[-1] <= 2.1
    assert catenoid_profile.empty.sum() == 0


def test_helicoid_volume():
    chart = catalog("helicoid", 10.0)
    prof = volume_profile(chart, default_r_grid(0.0, 10.0, 40, extra=[5.0]))
    for r, v in HELICOID_VOLUME.items():
        assert prof.volume_at(r) == pytest.approx(v, rel=1e-3)


def test_synthetic_exponents_exact():
    r = np.linspace(1, 50, 200)
    prof = GrowthProfile.synthetic(r, lambda r: 0.3 * r * r)
    ex = growth_exponents(prof)
    assert ex.beta_tail == pytest.approx(0.3, abs=1e-15)
    np.testing.assert_allclose(ex.mu_sequence, 0.3 * r, rtol=1e-14)


def test_empty_tail_rejected():
    r = np.linspace(1, 5, 10)
    prof = GrowthProfile.from_volumes(r, np.zeros(10), 2)
    with pytest.raises(EmptyTailError):
        growth_exponents(prof)


def test_profile_rejects_unsorted():
    with pytest.raises(ValueError):
        GrowthProfile(np.array([1.0, 0.5]), np.array([0.0, 0.0]), 2)


@given(st.floats(0.01, 0.5))
def test_tail_window_size(frac):
    prof = GrowthProfile.synthetic(np.linspace(1, 10, 40), lambda r: r)
    idx = tail_window(prof, frac)
    assert idx[-1] == 39 and len(idx) == max(1, math.ceil(frac * 40))


@given(st.floats(0.5, 3.0), st.integers(1, 4))
def test_density_of_power_law(a, m):
    # vol = a * vol(B^m(r)) has constant density a
    from minspec.growth import euclidean_ball_volume
    r = np.linspace(1, 10, 20)
    prof = GrowthProfile.from_volumes(r, a * euclidean_ball_volume(m, r), m)
    np.testing.assert_allclose(theta(prof), a, rtol=1e-12)


def test_default_grid():
    g = default_r_grid(1.0, 50.0, extra=[2.0, 5.0])
    assert g[0] == pytest.approx(1.1) and g[-1] == 50.0
    assert 2.0 in g and 5.0 in g and np.all(np.diff(g) > 0)
    with pytest.raises(ValueError):
        default_r_grid(1.0, 1.05)
