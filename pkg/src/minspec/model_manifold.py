"""Rotationally symmetric model manifolds.

A model manifold carries the metric ``d rho^2 + h(rho)^2 d theta^2`` where the
warping function ``h`` solves ``h'' = G h`` with ``h(0) = 0``, ``h'(0) = 1``.
``G`` is the negative of the radial sectional curvature, so ``G = 0`` gives
Euclidean space, ``G = 1`` hyperbolic space and ``G = -1`` the round sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

DEFAULT_STEP = 1e-3
#: Max relative error of the fixed-step RK4 solver against closed forms on
#: [0, 10] at the default step.
SOLVER_TOLERANCE = 1e-8
SOLVER_ORDER = 4


class RangeError(ValueError):
    """Raised when a radius lies outside the solved range of a warping function."""


@dataclass(frozen=True)
class CurvatureProfile:
    """The function ``G``.

    ``kind`` is one of ``"zero"``, ``"constant"`` or ``"table"``. Tables hold
    samples ``(s, G(s))`` on ``s >= 0`` and are linearly interpolated; they
    carry no information about the behaviour past their last abscissa.
    """

    kind: str
    value: float = 0.0
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)

    @classmethod
    def zero(cls) -> "CurvatureProfile":
        return cls("zero", 0.0)

    @classmethod
    def constant(cls, c: float) -> "CurvatureProfile":
        if not math.isfinite(c):
            raise ValueError(f"curvature constant must be finite, got {c!r}")
        if c == 0.0:
            return cls.zero()
        return cls("constant", float(c))

    @classmethod
    def from_table(cls, s, g) -> "CurvatureProfile":
        s = np.asarray(s, dtype=float)
        g = np.asarray(g, dtype=float)
        if s.ndim != 1 or s.shape != g.shape or s.size < 2:
            raise ValueError("curvature table needs matching 1-d arrays of length >= 2")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(g))):
            raise ValueError("curvature table contains non-finite samples")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ValueError("curvature table abscissae must start at 0 and increase")
        return cls("table", 0.0, (s, g))

    @property
    def tag(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "constant":
            return f"constant:{self.value:.17g}"
        return "table"

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))  # G is even
        if self.kind == "table":
            xs, gs = self.table
            if np.any(s > xs[-1] * (1 + 1e-12)):
                raise RangeError(f"curvature table only covers s <= {xs[-1]}")
            return np.interp(s, xs, gs)
        return np.full_like(s, self.value)


def _as_profile(G) -> CurvatureProfile:
    if isinstance(G, CurvatureProfile):
        return G
    if isinstance(G, str):
        named = {"zero": 0.0, "euclidean": 0.0, "hyperbolic": 1.0, "sphere": -1.0}
        if G in named:
            return CurvatureProfile.constant(named[G])
        raise ValueError(f"unknown curvature tag {G!r}")
    return CurvatureProfile.constant(float(G))


@dataclass(frozen=True)
class WarpingFunction:
    """Sampled solution of ``h'' = G h`` with Cauchy data ``(0, 1)``.

    ``h_grid`` has rows ``(s, h(s), h'(s))``. Values between samples come from
    the cubic Hermite interpolant of these rows. ``blowdown_radius`` is the
    first positive zero of ``h`` when the solve ran into it; the samples then
    stop there.
    """

    curvature: CurvatureProfile
    h_grid: np.ndarray
    r_max_solved: float
    blowdown_radius: float | None = None
    truncated: bool = False

    def __post_init__(self):
        s, h, dh = self.h_grid.T
        object.__setattr__(self, "_spline", CubicHermiteSpline(s, h, dh))
        # cumulative trapezoid of h, the primitive phi on the grid
        cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(s) * (h[1:] + h[:-1]))])
        object.__setattr__(self, "_phi_grid", cum)

    @property
    def s(self) -> np.ndarray:
        return self.h_grid[:, 0]

    @property
    def is_euclidean(self) -> bool:
        return self.curvature.kind == "zero"

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        hi = self.r_max_solved
        if np.any(r < 0) or np.any(r > hi * (1 + 1e-12)):
            raise RangeError(f"radius outside solved range [0, {hi}]")
        return np.minimum(r, hi)

    def h(self, r):
        r = self._check(r)
        return self._spline(r)

    def dh(self, r):
        r = self._check(r)
        return self._spline(r, 1)

    def h_over_r(self, r):
        """``h(r)/r`` with its limit ``h'(0) = 1`` at the origin."""
        r = np.asarray(r, dtype=float)
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, self.h(r) / safe, 1.0)

    def phi(self, t):
        """``phi(t) = int_0^t h(s) ds`` by trapezoid on the sample grid."""
        t = self._check(t)
        s = self.s
        k = np.clip(np.searchsorted(s, t, side="right") - 1, 0, len(s) - 1)
        hk = self.h_grid[k, 1]
        return self._phi_grid[k] + 0.5 * (t - s[k]) * (hk + self._spline(t))

    def to_dict(self) -> dict:
        return {
            "G_tag": self.curvature.tag,
            "h_grid": self.h_grid.tolist(),
            "r_max": self.r_max_solved,
            "blowdown": self.blowdown_radius,
        }


def _rk4(G: CurvatureProfile, r_max: float, step: float):
    n = max(1, int(math.ceil(r_max / step - 1e-9)))
    s = np.linspace(0.0, r_max, n + 1)
    dt = s[1] - s[0]
    # G on the whole half-step lattice at once
    half = np.linspace(0.0, r_max, 2 * n + 1)
    g = G(half)
    if not np.all(np.isfinite(g)):
        raise ValueError("curvature profile has non-finite samples on [0, r_max]")
    out = np.empty((n + 1, 3))
    out[:, 0] = s
    h, p = 0.0, 1.0
    out[0, 1:] = h, p
    for i in range(n):
        g0, gm, g1 = g[2 * i], g[2 * i + 1], g[2 * i + 2]
        k1h, k1p = p, g0 * h
        k2h, k2p = p + 0.5 * dt * k1p, gm * (h + 0.5 * dt * k1h)
        k3h, k3p = p + 0.5 * dt * k2p, gm * (h + 0.5 * dt * k2h)
        k4h, k4p = p + dt * k3p, g1 * (h + dt * k3h)
        h += dt / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h)
        p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        out[i + 1, 1:] = h, p
    return out


def solve_warping(G="zero", r_max: float = 10.0, step: float = DEFAULT_STEP) -> WarpingFunction:
    """Integrate ``h'' = G h`` on ``[0, r_max]`` with classical RK4.

    ``G`` may be a :class:`CurvatureProfile`, a number (constant profile) or
    one of the names ``"euclidean"``, ``"hyperbolic"``, ``"sphere"``.

    If ``h`` returns to zero inside the range the result is truncated at the
    zero ``R_h`` (located by bisection on the Hermite interpolant, well below
    ``step * 1e-3``) and ``truncated`` is set.
    """
    if not (r_max > 0 and math.isfinite(r_max)):
        raise ValueError(f"r_max must be positive and finite, got {r_max!r}")
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"step must be positive and finite, got {step!r}")
    G = _as_profile(G)
    grid = _rk4(G, r_max, step)
    h = grid[:, 1]
    crossing = np.nonzero(h[1:] <= 0.0)[0]
    if crossing.size == 0:
        return WarpingFunction(G, grid, float(grid[-1, 0]))

    k = crossing[0]  # zero lies in (s[k], s[k+1]]
    spline = CubicHermiteSpline(grid[:, 0], grid[:, 1], grid[:, 2])
    lo, hi = grid[k, 0], grid[k + 1, 0]
    tol = min(step * 1e-3, 4 * np.spacing(hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if spline(mid) > 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    kept = grid[: k + 1]
    if root - kept[-1, 0] < 1e-12:
        kept = kept[:-1]
    last = np.array([[root, 0.0, float(spline(root, 1))]])
    grid = np.vstack([kept, last])
    return WarpingFunction(G, grid, root, blowdown_radius=root, truncated=True)


@dataclass(frozen=True)
class CompletenessResult:
    complete: bool | None
    diagnostic: str

    def __bool__(self):
        return bool(self.complete)


def completeness_check(G) -> CompletenessResult:
    """Decide the sufficient completeness criterion on the negative part of ``G``.

    The criterion asks that ``G_-`` be integrable on the half line and that
    ``int_t^inf G_-(s) ds <= 1/(4t)`` for every ``t > 0``. Only closed-form
    profiles can be decided; tables give ``complete=None``.
    """
    G = _as_profile(G)
    if G.kind == "table":
        return CompletenessResult(None, "undecidable: tabulated G has no tail information")
    c = G.value
    if c >= 0:
        return CompletenessResult(True, "G_- vanishes identically")
    # constant negative part |c| on the half line
    return CompletenessResult(
        False, f"G_- = {-c:g} is not integrable on R+ (tail integral diverges)"
    )


def sphere_volume(n: int) -> float:
    """Volume of the unit ``(n-1)``-sphere in R^n (``2 pi^{n/2} / Gamma(n/2)``)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(w: WarpingFunction, n: int, r: float) -> float:
    """Volume of the geodesic ball of radius ``r`` about the pole of the n-dimensional model."""
    if n < 2:
        raise ValueError("dimension n must be >= 2")
    if w.blowdown_radius is not None and r >= w.blowdown_radius:
        raise RangeError(f"r={r} is not below the blowdown radius {w.blowdown_radius}")
    if not r > 0:
        raise ValueError("radius must be positive")
    r = float(w._check(r))
    s = w.s
    k = int(np.searchsorted(s, r, side="right"))
    xs = np.append(s[:k], r)
    f = w.h(xs) ** (n - 1)
    return sphere_volume(n) * float(np.sum(0.5 * np.diff(xs) * (f[1:] + f[:-1])))


def phi(w: WarpingFunction, t):
    """``int_0^t h(s) ds``; see :meth:`WarpingFunction.phi`."""
    return w.phi(t)


def euclidean(r_max: float, step: float = DEFAULT_STEP) -> WarpingFunction:
    """Warping function of Euclidean space, ``h(s) = s``."""
    return solve_warping(CurvatureProfile.zero(), r_max, step)
