"""Masked quadrature over extrinsic balls on a simplicial parameter grid.

The parameter box of a chart is split into Kuhn simplices (triangles for
surfaces, tetrahedra for 3-manifolds). Integrands and the extrinsic distance
``t`` are sampled at the nodes and interpolated linearly on each simplex; the
sub-level set ``{t < r}`` of the interpolated distance is clipped exactly, so
ball integrals are piecewise polynomial and continuously differentiable in
``r``. That smoothness is what makes co-area derivatives by centred
differences usable.
"""
from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .immersions import Chart, axis_nodes, kuhn_simplices

#: Shift applied to every radius so that exact critical values of ``t`` are avoided.
RADIUS_JITTER = 1e-9


def _corner(f, lev, apex, others):
    """Integral fraction of the corner simplex cut at vertex ``apex``.

    Works on sorted per-simplex arrays. Returns ``(fraction, mean value)``.
    """
    la = lev[:, apex]
    fa = f[:, apex]
    frac = np.ones_like(la)
    acc = fa.copy()
    for j in others:
        s = la / (la - lev[:, j])
        frac *= s
        acc += fa + s * (f[:, j] - fa)
    return frac, acc / (len(others) + 1)


def _tet_volume(P):
    # P: (K, 4, 3) reference coordinates
    d = P[:, 1:] - P[:, :1]
    return np.abs(np.linalg.det(d))


def _wedge(f, lev):
    """Integral fraction of ``{lev < 0}`` when vertices 0, 1 are inside and 2, 3 outside."""
    K = len(lev)
    e = np.eye(3)
    ref = np.zeros((K, 4, 3))
    ref[:, 1], ref[:, 2], ref[:, 3] = e[0], e[1], e[2]

    def cut(i, j):
        s = lev[:, i] / (lev[:, i] - lev[:, j])
        x = ref[:, i] + s[:, None] * (ref[:, j] - ref[:, i])
        v = f[:, i] + s * (f[:, j] - f[:, i])
        return x, v

    A0, fA0 = ref[:, 0], f[:, 0]
    B0, fB0 = ref[:, 1], f[:, 1]
    A1, fA1 = cut(0, 2)
    A2, fA2 = cut(0, 3)
    B1, fB1 = cut(1, 2)
    B2, fB2 = cut(1, 3)
    total = np.zeros(K)
    for pts, vals in (((A0, A1, A2, B2), (fA0, fA1, fA2, fB2)),
                      ((A0, A1, B1, B2), (fA0, fA1, fB1, fB2)),
                      ((A0, B0, B1, B2), (fA0, fB0, fB1, fB2))):
        vol = _tet_volume(np.stack(pts, axis=1))
        total += vol * sum(vals) / 4
    return total


def clipped_integral(values, levels, threshold, volumes) -> float:
    """``sum_S int_S [lin(levels) < threshold] lin(values)`` over simplices.

    ``values`` and ``levels`` are per-simplex vertex samples ``(S, m+1)``,
    ``volumes`` the simplex measures. Exact for linear data with ``m <= 3``.
    """
    lev = levels - threshold
    inside = lev < 0
    k = inside.sum(axis=1)
    m = levels.shape[1] - 1
    full = k == m + 1
    total = float(np.dot(volumes[full], values[full].mean(axis=1)))
    cut = (k > 0) & ~full
    if not cut.any():
        return total
    lev, f, vol, k = lev[cut], values[cut], volumes[cut], k[cut]
    order = np.argsort(lev, axis=1)
    lev = np.take_along_axis(lev, order, 1)
    f = np.take_along_axis(f, order, 1)

    sel = k == 1
    if sel.any():
        frac, mean = _corner(f[sel], lev[sel], 0, range(1, m + 1))
        total += float(np.dot(vol[sel], frac * mean))
    sel = (k == m) & (m > 1)
    if sel.any():
        frac, mean = _corner(f[sel], lev[sel], m, range(m))
        total += float(np.dot(vol[sel], f[sel].mean(axis=1) - frac * mean))
    if m == 3:
        sel = k == 2
        if sel.any():
            total += float(np.dot(vol[sel], _wedge(f[sel], lev[sel])))
    elif m > 3:
        raise NotImplementedError("clipping implemented for simplices of dimension <= 3")
    return total


class ChartGrid:
    """Node samples and Kuhn simplices of a chart at a given resolution.

    Node arrays: ``points`` (parameters), ``xi``, ``t``, ``sqrt_g`` (volume
    density) and ``radial`` = ``t^2 |grad t|^2``.
    """

    def __init__(self, chart: Chart, resolution: int | None = None):
        self.chart = chart
        self.resolution = int(resolution or chart.resolution)
        axes = axis_nodes(chart, self.resolution)
        self.axes = axes
        self.shape = tuple(len(a) for a in axes)
        P = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, chart.m)
        self.points = P
        self.xi = chart(P)
        self.t = np.linalg.norm(self.xi, axis=1)
        J = chart.jac(P)
        g = np.einsum("kia,kib->kab", J, J)
        self.sqrt_g = np.sqrt(np.linalg.det(g))
        b = np.einsum("kia,ki->ka", J, self.xi)
        self.radial = np.einsum("ka,ka->k", b, np.linalg.solve(g, b[..., None])[..., 0])
        self.simplices, pos = kuhn_simplices(self.shape, chart.periodic)
        steps = np.array([a[1] - a[0] for a in axes])
        lows = np.array([a[0] for a in axes])
        self.vertex_params = lows + pos * steps  # unwrapped across periodic seams
        d = self.vertex_params[:, 1:] - self.vertex_params[:, :1]
        self.volumes = np.abs(np.linalg.det(d)) / math.factorial(chart.m)
        self._levels = self.t[self.simplices]

    @property
    def m(self) -> int:
        return self.chart.m

    @cached_property
    def grad_t_sq(self) -> np.ndarray:
        """``|grad t|^2`` at the nodes; 0 where ``t = 0``."""
        safe = np.where(self.t > 0, self.t, 1.0)
        return np.where(self.t > 0, self.radial / safe**2, 0.0)

    def integrate(self, f, r: float, weighted: bool = True) -> float:
        """``int_{t < r} f dmu`` with ``f`` given at the nodes.

        With ``weighted=False`` the integrand is taken as already including the
        volume density.
        """
        f = np.asarray(f, dtype=float)
        if f.ndim == 0:
            f = np.full(len(self.t), float(f))
        if weighted:
            f = f * self.sqrt_g
        return clipped_integral(f[self.simplices], self._levels, r + RADIUS_JITTER, self.volumes)

    def volume(self, r: float) -> float:
        return self.integrate(1.0, r)

    def integrate_many(self, f, radii) -> np.ndarray:
        f = np.asarray(f, dtype=float) * self.sqrt_g
        vals = f[self.simplices]
        return np.array([clipped_integral(vals, self._levels, r + RADIUS_JITTER, self.volumes)
                         for r in radii])

    def inside(self, r: float) -> np.ndarray:
        return self.t < r + RADIUS_JITTER
