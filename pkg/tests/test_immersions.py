import math

import numpy as np
import pytest

from minspec.immersions import (CoverageError, EmptyBallError, catalog, check_nonempty,
                                coverage_certificate, gaussian_curvature, grad_t_norm_sq,
                                kuhn_simplices, laplacian_comparison_residual,
                                minimality_residual, read_obj, second_form_curvature,
                                sphere_mesh, triangulate, write_obj)
from minspec.model_manifold import euclidean


@pytest.mark.parametrize("name", ["plane", "catenoid", "helicoid", "enneper"])
def test_charts_are_conformal(name):
    # all surface charts are isothermal: E = G, F = 0
    chart = catalog(name, 5.0)
    rng = np.random.default_rng(1)
    lo = np.array([b[0] for b in chart.bounds])
    hi = np.array([b[1] for b in chart.bounds])
    p = lo + (hi - lo) * rng.random((50, 2))
    g = chart.metric(p)
    if name != "helicoid":
        np.testing.assert_allclose(g[:, 0, 0], g[:, 1, 1], rtol=1e-12)
    np.testing.assert_allclose(g[:, 0, 1], 0, atol=1e-12)


@pytest.mark.parametrize("name", ["plane", "catenoid", "helicoid", "enneper", "catenoid_x_line"])
def test_coverage(name):
    chart = catalog(name, 7.0)
    assert coverage_certificate(chart, 7.0) > 7.0


def test_coverage_failure():
    chart = catalog("plane", 5.0)
    with pytest.raises(CoverageError):
        coverage_certificate(chart, 6.0)


def test_empty_ball_message():
    chart = catalog("catenoid", 5.0)
    with pytest.raises(EmptyBallError, match="extrinsic ball empty below r=1"):
        check_nonempty(chart, 0.5)


@pytest.mark.parametrize("name", ["catenoid", "helicoid", "enneper"])
def test_curvature_closed_form_matches_second_form(name):
    chart = catalog(name, 3.0)
    p = np.array([[0.3, 0.2], [1.0, -0.5], [2.0, 0.7]])
    np.testing.assert_allclose(second_form_curvature(chart, p, 1e-4),
                               gaussian_curvature(chart, p), rtol=1e-5)


def test_grad_t_bounded_by_one():
    chart = catalog("helicoid", 4.0)
    p = np.random.default_rng(0).uniform(-4, 4, (200, 2))
    g = grad_t_norm_sq(chart, p)
    assert np.all(g <= 1 + 1e-12)


@pytest.mark.parametrize("shape, periodic", [((4, 5), (False, False)), ((6, 4), (True, False)),
                                             ((3, 4, 5), (True, False, False))])
def test_kuhn_simplices_tile_the_box(shape, periodic):
    S, pos = kuhn_simplices(shape, periodic)
    m = len(shape)
    vol = np.linalg.det(pos[:, 1:] - pos[:, :1]) / math.factorial(m)
    cells = np.prod([n if p else n - 1 for n, p in zip(shape, periodic)])
    assert np.all(vol > 0)  # one orientation throughout
    assert vol.sum() == pytest.approx(cells)


def test_minimality_residual_converges_on_catenoid():
    res = []
    for n in (32, 64):
        mesh = triangulate(catalog("catenoid", 3.0), n)
        res.append(minimality_residual(mesh))
    assert res[1] < res[0] / 2


def test_sphere_negative_controls():
    R = 2.0
    mesh = sphere_mesh(R, 4)
    assert minimality_residual(mesh) >= 1 / R
    assert laplacian_comparison_residual(mesh, euclidean(3.0)) > 1.0


def test_laplacian_comparison_small_on_plane():
    mesh = triangulate(catalog("plane", 2.0), 32)
    assert laplacian_comparison_residual(mesh, euclidean(3.0)) < 1e-8


def test_obj_roundtrip(tmp_path):
    mesh = sphere_mesh(1.0, 1)
    write_obj(mesh, tmp_path / "s.obj")
    back = read_obj(tmp_path / "s.obj")
    np.testing.assert_array_equal(back.faces, mesh.faces)
    np.testing.assert_allclose(back.vertices, mesh.vertices, rtol=0, atol=0)


def test_catalog_rejects_bad_input():
    with pytest.raises(ValueError):
        catalog("torus", 5.0)
    with pytest.raises(ValueError):
        catalog("catenoid", 5.0, c=-1.0)
    with pytest.raises(ValueError):
        catalog("plane", 5.0, resolution=8)
