"""First Dirichlet eigenvalue of extrinsic balls, the independent spectral oracle.

Two discretizations are available. On a chart, piecewise-linear elements on
the Kuhn simplices of the parameter grid carry the pulled-back metric, and
nodes just outside the ball are moved onto the level set ``t = r`` so the
discrete domain follows the curved boundary. On a triangle mesh the
cotangent stiffness and barycentric mass are used with plain node
elimination.

``lambda_1(Omega_r)`` decreases to ``inf sigma(M)`` as ``r`` grows. That limit
bounds ``inf sigma(M)``, which is never larger than the bottom of the
essential spectrum, so comparing it against essential-spectrum bounds only
ever errs on the safe side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .immersions import Chart, EmptyBallError, TriangleMesh, check_nonempty
from .quadrature import ChartGrid

DEFAULT_TOL = 1e-8
MAX_ITER = 10_000
MIN_INTERIOR = 10
#: Cells per axis used by the eigenvalue oracle when none is given.
DEFAULT_RESOLUTION = {2: 128, 3: 32}


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteOperator:
    stiffness: sparse.csr_matrix
    mass: np.ndarray
    interior_index: np.ndarray
    r: float
    resolution: int
    row_sum_defect: float
    symmetry_defect: float
    source: str = "chart"

    @property
    def size(self) -> int:
        return len(self.interior_index)

    def rayleigh(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ (self.stiffness @ x)) / float(np.sum(self.mass * x * x))


def _newton_to_level(chart: Chart, P, r, steps=4):
    """Move parameter points onto ``t = r`` along the metric gradient of ``t``."""
    Q = P.copy()
    for _ in range(steps):
        x = chart(Q)
        t = np.linalg.norm(x, axis=-1)
        J = chart.jac(Q)
        g = np.einsum("kia,kib->kab", J, J)
        b = np.einsum("kia,ki->ka", J, x) / t[:, None]
        d = np.linalg.solve(g, b[..., None])[..., 0]
        Q = Q - ((t - r) / np.einsum("ka,ka->k", b, d))[:, None] * d
    ok = np.abs(np.linalg.norm(chart(Q), axis=-1) - r) < 1e-8 * max(r, 1.0)
    return Q, ok


def _signed_volumes(VP):
    return np.linalg.det(VP[:, 1:] - VP[:, :1])


def _assemble_chart(surface: Chart, r: float, resolution: int | None, snap: bool):
    check_nonempty(surface, r)
    chart = surface.restricted(r)
    res = resolution or DEFAULT_RESOLUTION.get(chart.m, 64)
    grid = ChartGrid(chart, res)
    m = chart.m
    inside = grid.t < r
    S = grid.simplices
    keep = inside[S].any(axis=1)
    S = S[keep]
    VP = grid.vertex_params[keep].copy()
    if snap:
        N = len(grid.t)
        outer = np.unique(S[~inside[S]])
        Q, ok = _newton_to_level(chart, grid.points[outer], r)
        disp = np.zeros((N, m))
        cell = np.array([a[1] - a[0] for a in grid.axes])
        small = np.all(np.abs(Q - grid.points[outer]) <= 2 * cell, axis=1)
        moving = outer[ok & small]
        disp[moving] = (Q - grid.points[outer])[ok & small]
        base = _signed_volumes(VP)
        for _ in range(20):
            trial = VP + disp[S]
            vol = _signed_volumes(trial)
            bad = np.sign(vol) != np.sign(base)
            bad |= np.abs(vol) < 1e-6 * np.abs(base)
            if not bad.any():
                break
            disp[S[bad]] = 0.0
        VP = VP + disp[S]
    D = VP[:, 1:] - VP[:, :1]  # rows are edge vectors
    vol = np.abs(np.linalg.det(D)) / math.factorial(m)
    centroid = VP.mean(axis=1)
    J = chart.jac(centroid)
    g = np.einsum("kia,kib->kab", J, J)
    sqrt_g = np.sqrt(np.linalg.det(g))
    Dinv = np.linalg.inv(D)  # column a is the parameter gradient of barycentric a+1
    grads = np.concatenate([-Dinv.sum(axis=2, keepdims=True), Dinv], axis=2).transpose(0, 2, 1)
    local = np.einsum("kia,kab,kjb->kij", grads, np.linalg.inv(g), grads) * (vol * sqrt_g)[:, None, None]
    N = len(grid.t)
    rows = np.repeat(S, m + 1, axis=1).ravel()
    cols = np.tile(S, (1, m + 1)).ravel()
    K = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(N, N)).tocsr()
    mass = np.bincount(S.ravel(), np.repeat(vol * sqrt_g / (m + 1), m + 1), minlength=N)
    return K, mass, np.nonzero(inside)[0], res


def _assemble_mesh(mesh: TriangleMesh, r: float):
    K, mass = mesh.cotan_laplacian()
    t = np.linalg.norm(mesh.vertices, axis=1)
    inside = (t < r) & ~mesh.boundary_vertices()
    return K, mass, np.nonzero(inside)[0], int(round(math.sqrt(len(mesh.faces) / 2)))


def assemble(surface, r: float, resolution: int | None = None, snap: bool = True) -> DiscreteOperator:
    """Dirichlet stiffness and lumped mass on ``Omega_r``; nodes with ``t >= r`` are eliminated."""
    if isinstance(surface, TriangleMesh):
        K, mass, idx, res = _assemble_mesh(surface, r)
        source = "mesh"
    else:
        K, mass, idx, res = _assemble_chart(surface, r, resolution, snap)
        source = "chart"
    if len(idx) < MIN_INTERIOR:
        raise EmptyBallError(f"Omega_r has {len(idx)} interior nodes at r={r}, need {MIN_INTERIOR}")
    row = np.abs(np.asarray(K.sum(axis=1)).ravel())
    scale = max(float(np.abs(K).max()), 1e-300)
    row_defect = float(row.max() / scale)
    sym_defect = float(abs(K - K.T).max() / scale) if K.nnz else 0.0
    Ki = K[idx][:, idx].tocsr()
    return DiscreteOperator(Ki, mass[idx], idx, float(r), res, row_defect, sym_defect, source)


@dataclass(frozen=True)
class Lambda1:
    value: float
    residual: float
    vector: np.ndarray

    def __float__(self):
        return self.value


def start_vector(op: DiscreteOperator, seed: int | None = None) -> np.ndarray:
    """Mass-normalised constant, or a seeded positive random vector."""
    if seed is None:
        v = np.ones(op.size)
    else:
        v = 0.5 + np.random.default_rng(seed).random(op.size)
    return v / math.sqrt(float(np.sum(op.mass * v * v)))


def solve_lambda1(op: DiscreteOperator, tol: float = DEFAULT_TOL, maxiter: int = MAX_ITER,
                  seed: int | None = None) -> Lambda1:
    """Smallest eigenvalue of ``K x = lambda M x`` by shift-invert Lanczos about 0.

    The start vector is fixed by ``seed`` (constant when ``None``), so repeated
    runs agree bit for bit.
    """
    K = op.stiffness
    M = sparse.diags(op.mass)
    v0 = start_vector(op, seed)
    try:
        vals, vecs = eigsh(K, k=1, M=M, sigma=0.0, which="LM", v0=v0, tol=tol, maxiter=maxiter)
    except ArpackNoConvergence as exc:  # pragma: no cover - depends on ARPACK internals
        raise NumericalError(f"eigensolver did not converge at r={op.r}: {exc}") from exc
    lam = float(vals[0])
    x = vecs[:, 0]
    if x.sum() < 0:
        x = -x
    res = float(np.linalg.norm(K @ x - lam * op.mass * x) / max(np.linalg.norm(lam * op.mass * x), 1e-300))
    if not np.isfinite(lam) or res > 1e-6:
        raise NumericalError(f"eigenpair residual {res:.3g} at r={op.r}")
    return Lambda1(lam, res, x)


def dirichlet_lambda1(op: DiscreteOperator, tol: float = DEFAULT_TOL) -> float:
    """First Dirichlet eigenvalue of the assembled pencil."""
    return solve_lambda1(op, tol).value


@dataclass(frozen=True)
class SpectrumEstimate:
    r: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    resolution: int

    @property
    def tail(self) -> float:
        return float(self.values[-1])

    def monotone(self, noise: float = 0.01) -> bool:
        return bool(np.all(self.values[1:] <= self.values[:-1] * (1 + noise)))

    def to_json(self):
        return [{"r": float(r), "value": float(v), "resolution": self.resolution,
                 "residual": float(e)} for r, v, e in zip(self.r, self.values, self.residuals)]


def spectrum_bottom_estimate(surface, r_list, resolution: int | None = None,
                             tol: float = DEFAULT_TOL, seed: int | None = None) -> SpectrumEstimate:
    """``lambda_1(Omega_r)`` along increasing radii; the last value is the tail estimate."""
    r_list = np.asarray(r_list, dtype=float)
    if np.any(np.diff(r_list) <= 0):
        raise ValueError("r_list must be increasing")
    vals, resid, res = [], [], None
    for r in r_list:
        op = assemble(surface, r, resolution)
        sol = solve_lambda1(op, tol, seed=seed)
        vals.append(sol.value)
        resid.append(sol.residual)
        res = op.resolution
    return SpectrumEstimate(r_list, np.array(vals), np.array(resid), res)
