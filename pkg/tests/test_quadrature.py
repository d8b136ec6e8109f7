import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from minspec.immersions import catalog
from minspec.quadrature import ChartGrid, clipped_integral


def test_disk_area():
    g = ChartGrid(catalog("plane", 5.0), 256)
    assert g.volume(5.0) == pytest.approx(25 * math.pi, rel=1e-4)


def test_unit_ball_volume_3d():
    # identity chart of R^3: t < 1 is the unit ball
    from minspec.immersions import Chart
    box = ((-1.1, 1.1),) * 3
    chart = Chart("flat3", lambda p: p, box, 3, jacobian=lambda p: np.broadcast_to(
        np.eye(3), p.shape[:-1] + (3, 3)))
    g = ChartGrid(chart, 48)
    assert g.volume(1.0) == pytest.approx(4 / 3 * math.pi, rel=3e-3)


@given(st.floats(-1.0, 2.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_linear_clip_single_triangle(c, a, b):
    # reference triangle, level = a x + b y, threshold c: exact area of {a x + b y < c}
    lev = np.array([[0.0, a, b]])
    f = np.ones((1, 3))
    got = clipped_integral(f, lev, c, np.array([0.5]))
    # area of {x, y >= 0, x + y <= 1, a x + b y < c} by midpoint counting
    n = 600
    x, y = np.meshgrid((np.arange(n) + 0.5) / n, (np.arange(n) + 0.5) / n)
    inside = (x + y <= 1) & (a * x + b * y < c)
    assert got == pytest.approx(inside.sum() / n**2, abs=5e-3)


@given(st.floats(0.5, 9.0), st.floats(0.5, 9.0))
def test_volume_monotone(r1, r2):
    g = _grid()
    lo, hi = sorted((r1, r2))
    assert g.volume(lo) <= g.volume(hi) + 1e-12


_cache = {}


def _grid():
    if "g" not in _cache:
        _cache["g"] = ChartGrid(catalog("helicoid", 10.0), 64)
    return _cache["g"]


def test_full_threshold_gives_total():
    g = _grid()
    total = float(np.dot(g.volumes, g.sqrt_g[g.simplices].mean(axis=1)))
    assert g.volume(1e6) == pytest.approx(total, rel=1e-12)
