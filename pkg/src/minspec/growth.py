"""Volume growth of extrinsic balls and finite-range growth exponents.

``omega_m`` below is the volume of the unit ``(m-1)``-sphere, so the Euclidean
m-ball of radius ``r`` has volume ``omega_m / m * r**m``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from .immersions import Chart, CoverageError, check_nonempty
from .model_manifold import sphere_volume
from .quadrature import ChartGrid

log = logging.getLogger(__name__)

DEFAULT_TAIL_FRACTION = 0.25
DEFAULT_POINTS = 200


class EmptyTailError(ValueError):
    pass


def euclidean_ball_volume(m: int, r):
    """Volume of the Euclidean m-ball of radius ``r`` (``omega_m r^m / m``)."""
    return sphere_volume(m) / m * np.asarray(r, dtype=float) ** m


def default_r_grid(min_t: float, r_max: float, n: int = DEFAULT_POINTS, extra=()) -> np.ndarray:
    """Geometric then linear radii from ``min_t + 0.1`` to ``r_max``.

    The geometric half ends at a fifth of the range; ``extra`` radii inside the
    range are merged in.
    """
    r0 = min_t + 0.1
    if not r_max > r0:
        raise ValueError(f"r_max={r_max} must exceed min t + 0.1 = {r0}")
    r_mid = r0 + 0.2 * (r_max - r0)
    n_geo = n // 2
    geo = np.geomspace(r0, r_mid, n_geo, endpoint=False)
    lin = np.linspace(r_mid, r_max, n - n_geo)
    grid = np.concatenate([geo, lin])
    extra = [float(x) for x in extra if r0 <= x <= r_max]
    return np.unique(np.concatenate([grid, extra]))


class BandedGrids:
    """Chart grids cut for a ladder of radii ``r_top, r_top/2, r_top/4, ...``.

    Each ball integral is taken on the smallest band that contains it so the
    relative resolution stays roughly constant across scales. Charts without a
    ``sizer`` get a single band.
    """

    def __init__(self, chart: Chart, r_top: float, r_min: float, resolution: int | None = None):
        self.chart = chart
        self.resolution = resolution or chart.resolution
        tops = [float(r_top)]
        if chart.sizer is not None:
            while tops[-1] / 2 >= r_min and tops[-1] / 2 > chart.min_t:
                tops.append(tops[-1] / 2)
        self.tops = np.array(tops[::-1])
        self._grids: dict[int, ChartGrid] = {}

    def grid(self, k: int) -> ChartGrid:
        if k not in self._grids:
            chart = self.chart.restricted(self.tops[k])
            self._grids[k] = ChartGrid(chart, self.resolution)
        return self._grids[k]

    def band_of(self, r: float) -> int:
        k = int(np.searchsorted(self.tops, r * (1 - 1e-12)))
        if k >= len(self.tops):
            raise CoverageError(f"radius {r} beyond the covered radius {self.tops[-1]}")
        return k

    def integrate(self, f, radii) -> np.ndarray:
        """``int_{t<r} f dmu`` for each radius; ``f(grid)`` returns node values."""
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        out = np.empty(len(radii))
        bands = np.array([self.band_of(r) for r in radii])
        for k in np.unique(bands):
            sel = np.nonzero(bands == k)[0]
            g = self.grid(k)
            out[sel] = g.integrate_many(f(g), radii[sel])
        return out

    def integrate_total(self, f, R: float) -> float:
        """``int_{t<R} f dmu`` summed shell by shell over the bands."""
        total, lo = 0.0, None
        for k, top in enumerate(self.tops):
            hi = min(top, R)
            g = self.grid(k)
            vals = f(g)
            inner = g.integrate(vals, lo) if lo is not None else 0.0
            total += g.integrate(vals, hi) - inner
            if top >= R:
                break
            lo = hi
        return total


@dataclass
class GrowthProfile:
    """Sampled ``vol(Omega_r)`` with derived density and exponents.

    ``log_volumes`` is the primary record so synthetic profiles with
    super-exponential growth do not overflow; ``volumes`` may then be ``inf``.
    Entries with an empty ball carry ``volume = 0`` and ``empty = True``.
    """

    r_grid: np.ndarray
    log_volumes: np.ndarray
    m: int
    min_t: float = 0.0
    surface: dict = field(default_factory=dict)
    dvol_dr: np.ndarray | None = None
    empty: np.ndarray | None = None
    bands: BandedGrids | None = field(default=None, repr=False, compare=False)
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.log_volumes = np.asarray(self.log_volumes, dtype=float)
        if self.r_grid.ndim != 1 or self.r_grid.shape != self.log_volumes.shape:
            raise ValueError("r_grid and volumes must be matching 1-d arrays")
        if np.any(np.diff(self.r_grid) <= 0):
            raise ValueError("r_grid must be strictly increasing")
        if self.empty is None:
            self.empty = ~np.isfinite(self.log_volumes) & (self.log_volumes < 0)
        if self.dvol_dr is None:
            with np.errstate(over="ignore", invalid="ignore"):
                self.dvol_dr = np.gradient(self.volumes, self.r_grid) if len(self.r_grid) > 2 \
                    else np.full(len(self.r_grid), np.nan)

    @classmethod
    def from_volumes(cls, r_grid, volumes, m: int, **kw) -> "GrowthProfile":
        volumes = np.asarray(volumes, dtype=float)
        if np.any(volumes < 0) or not np.all(np.isfinite(volumes)):
            raise ValueError("volumes must be finite and non-negative")
        with np.errstate(divide="ignore"):
            logv = np.log(volumes)
        return cls(r_grid, logv, m, empty=volumes == 0, **kw)

    @classmethod
    def synthetic(cls, r_grid, log_volume, m: int = 2) -> "GrowthProfile":
        """Profile with ``log vol(Omega_r) = log_volume(r)`` given in closed form."""
        r = np.asarray(r_grid, dtype=float)
        return cls(r, np.asarray(log_volume(r), dtype=float), m, surface={"tag": "synthetic"})

    @property
    def volumes(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_volumes)

    @property
    def theta(self) -> np.ndarray:
        return theta(self)

    def onset_exponent(self) -> float:
        """Exponent ``p`` of the power law ``vol ~ (r - min_t)^p`` fitted to the first two radii."""
        ok = np.nonzero(~self.empty)[0]
        if len(ok) < 2:
            return 1.0
        i, j = ok[0], ok[1]
        x0, x1 = self.r_grid[i] - self.min_t, self.r_grid[j] - self.min_t
        return float((self.log_volumes[j] - self.log_volumes[i]) / np.log(x1 / x0))

    def volume_at(self, r):
        """Volume at ``r``.

        Monotone cubic (PCHIP) interpolation of ``log vol`` between radii; below
        the first non-empty radius the fitted onset power law takes over, so the
        volume tends to 0 at ``min_t``.
        """
        r = np.asarray(r, dtype=float)
        rg = self.r_grid
        if np.any(r > rg[-1] * (1 + 1e-12)):
            raise ValueError(f"radius beyond profile range {rg[-1]}")
        ok = ~self.empty
        if not ok.any():
            return np.zeros_like(r) if r.ndim else 0.0
        if self._interp is None:
            if ok.sum() >= 2:
                self._interp = PchipInterpolator(rg[ok], self.log_volumes[ok])
            else:
                self._interp = lambda x: np.full_like(np.asarray(x, float), self.log_volumes[ok][0])
        r0 = rg[ok][0]
        logv0 = self.log_volumes[ok][0]
        p = self.onset_exponent()
        lo = np.maximum(r - self.min_t, 0.0) / (r0 - self.min_t)
        with np.errstate(divide="ignore", over="ignore"):
            below = np.where(lo > 0, np.exp(logv0 + p * np.log(np.where(lo > 0, lo, 1.0))), 0.0)
            above = np.exp(self._interp(np.clip(r, r0, rg[-1])))
        out = np.where(r < r0, below, above)
        return float(out) if out.ndim == 0 else out

    def to_rows(self):
        mu, beta = growth_sequences(self)
        th = self.theta
        return [
            {"r": float(r), "vol": float(v), "dvol_dr": float(d), "theta": float(t),
             "mu_hat": float(a), "beta_hat": float(b)}
            for r, v, d, t, a, b in zip(self.r_grid, self.volumes, self.dvol_dr, th, mu, beta)
        ]


def volume_profile(surface: Chart, r_grid=None, resolution: int | None = None,
                   banded: bool = True) -> GrowthProfile:
    """``vol(Omega_r)`` on ``r_grid`` by masked quadrature of ``sqrt(det g)``."""
    if r_grid is None:
        r_grid = default_r_grid(surface.min_t, surface.radius or 10.0)
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r_grid) <= 0):
        raise ValueError("r_grid must be strictly increasing")
    r_max = float(r_grid[-1])
    check_nonempty(surface, r_max)
    if surface.sizer is None and surface.radius is not None and r_max > surface.radius:
        raise CoverageError(f"chart covers radius {surface.radius}, profile needs {r_max}")
    bands = BandedGrids(surface, r_max, float(r_grid[0]), resolution) if banded \
        else BandedGrids(_single(surface), r_max, r_max, resolution)
    empty = r_grid <= surface.min_t
    vols = np.zeros(len(r_grid))
    if (~empty).any():
        vols[~empty] = bands.integrate(lambda g: np.ones(len(g.t)), r_grid[~empty])
    empty |= vols <= 0
    if empty.any():
        log.info("%d leading radii have empty extrinsic balls", int(empty.sum()))
    prof = GrowthProfile.from_volumes(r_grid, vols, surface.m, min_t=surface.min_t,
                                      surface=surface.surface_id)
    prof.empty = empty
    prof.bands = bands  # reused by integrals that need the same discretization
    return prof


def _single(chart: Chart) -> Chart:
    return replace(chart, sizer=None)


def theta(profile: GrowthProfile) -> np.ndarray:
    """Density ``vol(Omega_r) / vol(B^m(r))``."""
    logb = np.log(euclidean_ball_volume(profile.m, profile.r_grid))
    with np.errstate(over="ignore"):
        return np.exp(profile.log_volumes - logb)


def growth_sequences(profile: GrowthProfile):
    """Per-radius ``mu_hat = log vol / r`` and ``beta_hat = log vol / r^2``."""
    r = profile.r_grid
    with np.errstate(invalid="ignore"):
        mu = profile.log_volumes / r
        beta = profile.log_volumes / r**2
    return mu, beta


def tail_window(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> np.ndarray:
    """Indices of the last ``tail_fraction`` of the grid (at least one point)."""
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")
    n = len(profile.r_grid)
    k = max(1, int(np.ceil(tail_fraction * n)))
    return np.arange(n - k, n)


def tail_min(values, profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    idx = tail_window(profile, tail_fraction)
    if np.any(profile.empty[idx]) or not np.all(np.isfinite(profile.log_volumes[idx])):
        raise EmptyTailError("empty or zero volumes inside the tail window")
    return float(np.min(np.asarray(values)[idx]))


@dataclass(frozen=True)
class GrowthExponents:
    mu_sequence: np.ndarray
    beta_sequence: np.ndarray
    mu_tail: float
    beta_tail: float


def growth_exponents(profile: GrowthProfile,
                     tail_fraction: float = DEFAULT_TAIL_FRACTION) -> GrowthExponents:
    """Sequences of ``mu_hat``, ``beta_hat`` and their tail minima.

    The tail minimum over the last ``tail_fraction`` of the grid stands in for
    the liminf, which no finite sample determines.
    """
    mu, beta = growth_sequences(profile)
    return GrowthExponents(mu, beta, tail_min(mu, profile, tail_fraction),
                           tail_min(beta, profile, tail_fraction))
