"""Upper bounds for the bottom of the essential spectrum and their cross-checks.

Every bound is evaluated on finite data: liminfs become minima over the last
``tail_fraction`` of the radius grid. The discrete eigenvalue
``lambda_1(Omega_r)`` approaches ``inf sigma(M) <= inf sigma_ess(M)`` from
above and is compared against each bound.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, gammaln

from .growth import (DEFAULT_TAIL_FRACTION, BandedGrids, GrowthProfile, growth_exponents,
                     tail_window)
from .immersions import Chart, gaussian_curvature
from .model_manifold import WarpingFunction, ball_volume, completeness_check

SCHEMA = "bound_report/v1"
#: Exponents at or below this value count as zero on a finite radius range.
ZERO_EXPONENT = 5e-3
DEFAULT_ALPHA = 0.5
#: Fraction of the reach proxy allowed as tube radius.
REACH_FRACTION = 0.1
REACH_SAMPLES = 1500


class IncompleteModelError(ValueError):
    pass


class NotEmbeddedError(ValueError):
    pass


# --- growth based bounds ---------------------------------------------------------

def theorem1_bound(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """``m * liminf log vol(Omega_r) / r^2``, the liminf read as a tail minimum.

    Negative when the tail volumes are below 1; the sign is not clipped.
    """
    return profile.m * growth_exponents(profile, tail_fraction).beta_tail


def ins_bound(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """``(liminf log vol(Omega_r) / r)^2 / 4`` with the same tail convention."""
    mu = growth_exponents(profile, tail_fraction).mu_tail
    return 0.25 * mu * mu


def exponential_rate(r, log_v, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Least-squares slope of ``log V`` against ``r`` on the tail of the grid.

    The slope converges to the exponential growth rate much faster than
    ``log V(r) / r``, which carries an ``O(1/r)`` offset from the prefactor.
    """
    r = np.asarray(r, dtype=float)
    k = max(2, int(np.ceil(tail_fraction * len(r))))
    slope, _ = np.polyfit(r[-k:], np.asarray(log_v, dtype=float)[-k:], 1)
    return float(slope)


@dataclass(frozen=True)
class BrooksBound:
    mu: float
    value: float
    r: np.ndarray
    log_volume: np.ndarray


def brooks_intrinsic_bound(w: WarpingFunction, n: int, r_min: float = 1.0, points: int = 200,
                           tail_fraction: float = DEFAULT_TAIL_FRACTION) -> BrooksBound:
    """``mu^2 / 4`` for geodesic balls of the n-dimensional model manifold of ``w``."""
    verdict = completeness_check(w.curvature)
    if verdict.complete is not True:
        raise IncompleteModelError(f"model manifold not known to be complete: {verdict.diagnostic}")
    r = np.linspace(r_min, w.r_max_solved, points)
    logv = np.log([ball_volume(w, n, x) for x in r])
    mu = max(exponential_rate(r, logv, tail_fraction), 0.0)
    return BrooksBound(mu, 0.25 * mu * mu, r, logv)


@dataclass(frozen=True)
class ExponentCheck:
    sequence: np.ndarray
    tail: float
    implied_bound: float
    vanishes: bool
    trivial: bool = False


def corollary1_check(profile: GrowthProfile, tail_fraction: float = DEFAULT_TAIL_FRACTION,
                     zero: float = ZERO_EXPONENT) -> ExponentCheck:
    """Tail of ``log Theta(r) / r^2`` and the implied bound ``m`` times it."""
    with np.errstate(divide="ignore", invalid="ignore"):
        seq = np.log(profile.theta) / profile.r_grid**2
    idx = tail_window(profile, tail_fraction)
    tail = float(np.min(seq[idx]))
    return ExponentCheck(seq, tail, profile.m * tail, bool(tail <= zero))


# --- curvature ----------------------------------------------------------------

def kappa_profile(surface: Chart, r_grid, resolution: int = 128) -> np.ndarray:
    """``inf K`` over the nodes of ``Omega_r`` for each radius (non-increasing)."""
    if surface.m != 2 or surface.n != 3:
        raise ValueError("kappa needs a surface in R^3")
    r_grid = np.asarray(r_grid, dtype=float)
    bands = BandedGrids(surface, float(r_grid[-1]), float(r_grid[0]), resolution)
    out = np.empty(len(r_grid))
    cache = {}
    for i, r in enumerate(r_grid):
        k = bands.band_of(r)
        if k not in cache:
            g = bands.grid(k)
            cache[k] = (g.t, gaussian_curvature(g.chart, g.points))
        t, K = cache[k]
        inside = t < r
        out[i] = float(np.min(K[inside])) if inside.any() else np.nan
    # balls are nested, so a point seen at a smaller radius belongs to every larger one
    ok = np.isfinite(out)
    out[ok] = np.minimum.accumulate(out[ok])
    return out


def reach_proxy(surface: Chart, r: float, samples: int = REACH_SAMPLES,
                resolution: int = 128) -> float:
    """Lower estimate of the normal injectivity radius of ``Omega_r``.

    Minimum of the local bound ``1 / max |k_i|`` (``|k_i| = sqrt(-K)`` on a
    minimal surface) and of ``|y - x|^2 / (2 |<y - x, N_x>|)`` over sampled pairs,
    the radius of the largest normal ball at ``x`` that misses ``y``.
    """
    from .quadrature import ChartGrid

    g = ChartGrid(surface.restricted(r), resolution)
    inside = g.t < r
    K = gaussian_curvature(g.chart, g.points[inside])
    kmax = float(np.sqrt(max(-K.min(), 0.0)))
    local = 1.0 / kmax if kmax > 0 else np.inf
    P = g.points[inside]
    step = max(1, len(P) // samples)
    P = P[::step]
    X = g.chart(P)
    J = g.chart.jac(P)
    N = np.cross(J[..., 0], J[..., 1])
    N /= np.linalg.norm(N, axis=1, keepdims=True)
    D = X[None, :, :] - X[:, None, :]
    dist2 = np.einsum("ijk,ijk->ij", D, D)
    normal = np.abs(np.einsum("ijk,ik->ij", D, N))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(normal > 1e-12 * (1 + dist2), dist2 / (2 * normal), np.inf)
    # neighbouring samples only see the local curvature, already accounted for
    q[dist2 < (4 * r / math.sqrt(len(P))) ** 2] = np.inf
    return float(min(local, q.min()))


@dataclass(frozen=True)
class TubularRow:
    r: float
    kappa: float
    epsilon: float
    volume: float
    curvature_integral: float
    tube_lhs: float
    tube_rhs: float
    volume_bound: float
    tube_ok: bool
    volume_ok: bool


@dataclass(frozen=True)
class Corollary2Result:
    exponent: ExponentCheck
    rows: list
    reach: float

    @property
    def passed(self) -> bool:
        return all(row.tube_ok and row.volume_ok for row in self.rows)


def corollary2_bound(surface: Chart, profile: GrowthProfile, alpha: float = DEFAULT_ALPHA,
                     r_sample=None, tail_fraction: float = DEFAULT_TAIL_FRACTION,
                     resolution: int = 128) -> Corollary2Result:
    """Curvature exponent and the tube-volume argument at sampled radii.

    The tube radius is ``min(-3 alpha / kappa, 0.1 * reach)`` so that the
    two-term tube formula stays valid. The volume bound quoted for each radius
    is the one obtained with the uncapped ``epsilon = -3 alpha / kappa``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not surface.embedded:
        raise NotEmbeddedError(f"{surface.name} is not embedded; the tube argument needs embedding")
    kap = kappa_profile(surface, profile.r_grid, resolution)
    idx = tail_window(profile, tail_fraction)
    if np.all(kap[idx] == 0):
        exp = ExponentCheck(np.full(len(kap), -np.inf), -np.inf, 0.0, True, trivial=True)
        return Corollary2Result(exp, [], np.inf)
    with np.errstate(divide="ignore"):
        seq = np.log(np.abs(kap)) / profile.r_grid**2
    tail = float(np.min(seq[idx]))
    exp = ExponentCheck(seq, tail, profile.m * tail, bool(tail <= ZERO_EXPONENT))
    if r_sample is None:
        r_sample = profile.r_grid[np.linspace(len(profile.r_grid) // 4, len(profile.r_grid) - 1, 5)
                                  .astype(int)]
    from .quadrature import ChartGrid

    rows = []
    reach = np.inf
    for r in np.atleast_1d(r_sample):
        r = float(r)
        kappa = float(np.interp(r, profile.r_grid, kap))
        if not kappa < 0:
            continue
        reach = min(reach, reach_proxy(surface, r, resolution=resolution))
        eps = min(-3 * alpha / kappa, REACH_FRACTION * reach)
        g = ChartGrid(surface.restricted(r), resolution)
        vol = profile.volume_at(r)
        Kint = g.integrate(gaussian_curvature(g.chart, g.points), r)
        lhs = 2 * eps * vol + 2 * eps**2 / 3 * Kint
        rhs = 4 * math.pi / 3 * (eps + r) ** 3
        vbound = 4 * math.pi / (18 * alpha * (1 - alpha)) * (r - 3 * alpha / kappa) ** 3 * (-kappa)
        rows.append(TubularRow(r, kappa, eps, vol, Kint, lhs, rhs, vbound,
                               bool(lhs <= rhs), bool(vol <= vbound)))
    return Corollary2Result(exp, rows, float(reach))


# --- Gaussian moment -----------------------------------------------------------

@dataclass(frozen=True)
class GaussianMoment:
    sigma: float
    moment: float | None
    covered: float
    tail: float | None
    upper_sum: float
    finite: bool | None
    cor3_bound: float
    proof_ratio: float

    @property
    def proof_ok(self) -> bool:
        return self.proof_ratio <= 1.0


def _power_tail(profile: GrowthProfile, sigma: float, tail_fraction: float):
    """Extrapolated ``int_R^inf e^{-sigma s^2} dV`` with ``V = A s^p`` fitted on the tail.

    Returns ``None`` when the tail grows like ``e^{sigma r^2}`` or faster.
    """
    idx = tail_window(profile, tail_fraction)
    r, logv = profile.r_grid[idx], profile.log_volumes[idx]
    R = float(profile.r_grid[-1])
    if len(idx) >= 2:
        rate = np.polyfit(r**2, logv, 1)[0]
        if rate >= sigma:
            return None
        p = float(np.polyfit(np.log(r), logv, 1)[0])
    else:
        p = profile.m
    if not p > 0:
        return 0.0
    logA = float(profile.log_volumes[-1]) - p * math.log(R)
    a = p / 2
    # A p int_R^inf s^{p-1} e^{-sigma s^2} ds = A (p/2) sigma^{-p/2} Gamma(p/2, sigma R^2)
    return float(math.exp(logA + math.log(a) - a * math.log(sigma) + gammaln(a))
                 * gammaincc(a, sigma * R * R))


def gaussian_moment(surface: Chart | None, sigma: float, profile: GrowthProfile,
                    tail_fraction: float = DEFAULT_TAIL_FRACTION) -> GaussianMoment:
    """``int_M e^{-sigma t^2}``: quadrature over the profile range plus a fitted tail.

    Without a chart (or shared bands) the covered part is the right-endpoint
    Stieltjes sum over the profile grid, a lower bound. ``upper_sum`` is the left-endpoint Stieltjes sum,
    which over-estimates the covered part. ``finite`` is ``None`` when the
    measured growth cannot decide convergence.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r = profile.r_grid
    # Stieltjes sums of e^{-sigma s^2} dV in log space, so fast-growing profiles do not overflow
    logv = np.where(profile.empty, -np.inf, profile.log_volumes)
    prev = np.concatenate([[-np.inf], logv[:-1]])
    with np.errstate(invalid="ignore", over="ignore"):
        log_dv = logv + np.log1p(-np.exp(np.minimum(prev - logv, 0.0)))
    log_dv = np.where(np.isfinite(logv), log_dv, -np.inf)
    left = np.concatenate([[profile.min_t], r[:-1]])
    upper = float(np.sum(np.exp(log_dv - sigma * left**2)))
    R = float(r[-1])
    if profile.bands is not None:
        covered = profile.bands.integrate_total(lambda g: np.exp(-sigma * g.t**2), R)
    elif surface is not None:
        bands = BandedGrids(surface, R, float(r[0]))
        covered = bands.integrate_total(lambda g: np.exp(-sigma * g.t**2), R)
    else:
        # right endpoints: a lower bound for the covered moment
        covered = float(np.sum(np.exp(log_dv - sigma * r**2)))
    tail = _power_tail(profile, sigma, tail_fraction)
    finite = None if tail is None else True
    moment = None if tail is None else covered + tail
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = np.where(profile.empty, 0.0,
                         np.exp(profile.log_volumes - sigma * r**2 - math.log(covered)))
    return GaussianMoment(float(sigma), moment, float(covered), tail, upper, finite,
                          profile.m * float(sigma), float(np.max(ratio)))


# --- report ---------------------------------------------------------------------

@dataclass
class Flag:
    name: str
    passed: bool
    slack: float
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "slack": _num(self.slack),
                "detail": self.detail}


@dataclass
class BoundReport:
    surface: dict
    m: int
    n: int | None
    theorem1: float
    ins: float
    brooks_intrinsic: float | None = None
    cor1_theta_exponent: float | None = None
    cor2_kappa_exponent: float | None = None
    cor2_status: str = "not run"
    cor3: list = field(default_factory=list)
    oracle_lambda1_tail: float | None = None
    epsilon_discretization: float = 0.0
    epsilon_finite_r: float = 0.0
    lambda1: list = field(default_factory=list)
    consistency_flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def epsilon_total(self) -> float:
        return self.epsilon_discretization + self.epsilon_finite_r

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.consistency_flags)

    def add_flag(self, name, passed, slack, detail=""):
        self.consistency_flags.append(Flag(name, bool(passed), float(slack), detail))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "surface": self.surface,
            "m": self.m,
            "n": self.n,
            "theorem1": _num(self.theorem1),
            "ins": _num(self.ins),
            "brooks_intrinsic": _num(self.brooks_intrinsic),
            "cor1_theta_exponent": _num(self.cor1_theta_exponent),
            "cor2_kappa_exponent": _num(self.cor2_kappa_exponent),
            "cor2_status": self.cor2_status,
            "cor3": [{k: _num(v) if not isinstance(v, (bool, str)) or v is None else v
                      for k, v in row.items()} for row in self.cor3],
            "oracle_lambda1_tail": _num(self.oracle_lambda1_tail),
            "epsilon": {"discretization": _num(self.epsilon_discretization),
                        "finite_r": _num(self.epsilon_finite_r),
                        "total": _num(self.epsilon_total)},
            "lambda1": self.lambda1,
            "consistency_flags": [f.to_dict() for f in self.consistency_flags],
            "passed": self.passed,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def summary_row(self) -> dict:
        return {"surface": self.surface.get("tag", ""), "m": self.m,
                "theorem1": _num(self.theorem1), "ins": _num(self.ins),
                "lambda1_tail": _num(self.oracle_lambda1_tail),
                "epsilon_total": _num(self.epsilon_total), "passed": self.passed}


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x
