"""Catalog of exact proper minimal immersions and their discrete proxies.

Surfaces are given by a :class:`Chart` (an analytic parametrization over a
rectangle, some axes possibly periodic) and, for two-dimensional surfaces in
R^3, by a :class:`TriangleMesh` obtained from the chart. The mesh path carries
the cotangent Laplacian used for the minimality and Laplacian-comparison
residuals.

The catenoid and catenoid x R do not pass through the origin; their smallest
extrinsic distance ``min_t`` equals the neck scale and every radius used on
them must exceed it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.optimize import brentq

SURFACES = ("plane", "catenoid", "helicoid", "enneper", "catenoid_x_line")
#: Relative margin between the requested radius and the chart boundary.
COVERAGE_MARGIN = 0.05
AREA_EPSILON = 1e-14
#: Cells per parameter axis used when no resolution is given.
DEFAULT_RESOLUTION = {2: 256, 3: 40}


class EmptyBallError(ValueError):
    """The extrinsic ball of the requested radius contains no point of the surface."""


class CoverageError(ValueError):
    """The chart does not contain the whole extrinsic ball."""


class DegenerateMeshError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """A parametrization ``xi`` of (part of) an immersed m-manifold in R^n.

    ``bounds`` is the parameter rectangle, one ``(a, b)`` pair per axis.
    ``jacobian`` returns the ``n x m`` differential; when it is ``None`` central
    differences with stencil ``1e-5 * (b - a)`` are used. ``sizer`` maps a
    radius to bounds whose image contains the extrinsic ball of that radius;
    catalog charts carry one so they can be re-cut for a given radius.
    """

    name: str
    map: Callable[[np.ndarray], np.ndarray]
    bounds: tuple[tuple[float, float], ...]
    n: int
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    periodic: tuple[bool, ...] = ()
    min_t: float = 0.0
    params: dict = field(default_factory=dict)
    resolution: int = 64
    radius: float | None = None
    gaussian_curvature: Callable[[np.ndarray], np.ndarray] | None = None
    embedded: bool = True
    sizer: Callable[[float], tuple] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * len(self.bounds))
        if len(self.periodic) != len(self.bounds):
            raise ValueError("periodic flags must match the number of parameter axes")

    @property
    def m(self) -> int:
        return len(self.bounds)

    @property
    def surface_id(self) -> dict:
        return {"tag": self.name, **self.params}

    def __call__(self, p) -> np.ndarray:
        return self.map(np.asarray(p, dtype=float))

    def jac(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.jacobian is not None:
            return self.jacobian(p)
        cols = []
        for a, (lo, hi) in enumerate(self.bounds):
            d = 1e-5 * (hi - lo)
            e = np.zeros(self.m)
            e[a] = d
            cols.append((self.map(p + e) - self.map(p - e)) / (2 * d))
        return np.stack(cols, axis=-1)

    def metric(self, p) -> np.ndarray:
        J = self.jac(p)
        return np.einsum("...ia,...ib->...ab", J, J)

    def restricted(self, r: float) -> "Chart":
        """The same surface cut to a domain sized for radius ``r``."""
        if self.sizer is None:
            return self
        check_nonempty(self, r)
        return replace(self, bounds=self.sizer(r), radius=float(r))

    def with_resolution(self, resolution: int) -> "Chart":
        return replace(self, resolution=int(resolution))


def check_nonempty(chart: Chart, r: float) -> None:
    if not r > chart.min_t:
        raise EmptyBallError(f"extrinsic ball empty below r={chart.min_t:g}")


# --- closed-form catalog -----------------------------------------------------

def _square(r):
    R = (1 + COVERAGE_MARGIN) * r
    return ((-R, R), (-R, R))


def _plane():
    def f(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack([u, v, np.zeros_like(u)], axis=-1)

    def jac(p):
        J = np.zeros(p.shape[:-1] + (3, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        return J

    return dict(map=f, jacobian=jac, n=3, min_t=0.0, sizer=_square,
                gaussian_curvature=lambda p: np.zeros(p.shape[:-1]))


def _catenoid(c):
    def f(p):
        u, v = p[..., 0], p[..., 1]
        ch = np.cosh(v)
        return c * np.stack([ch * np.cos(u), ch * np.sin(u), v], axis=-1)

    def jac(p):
        u, v = p[..., 0], p[..., 1]
        ch, sh = np.cosh(v), np.sinh(v)
        J = np.zeros(p.shape[:-1] + (3, 2))
        J[..., 0, 0] = -ch * np.sin(u)
        J[..., 1, 0] = ch * np.cos(u)
        J[..., 0, 1] = sh * np.cos(u)
        J[..., 1, 1] = sh * np.sin(u)
        J[..., 2, 1] = 1.0
        return c * J

    def sizer(r):
        V = math.acosh(max(1.0, (1 + COVERAGE_MARGIN) * r / c))
        return ((0.0, 2 * math.pi), (-V, V))

    return dict(map=f, jacobian=jac, n=3, min_t=c, sizer=sizer, periodic=(True, False),
                gaussian_curvature=lambda p: -1.0 / (c * c * np.cosh(p[..., 1]) ** 4))


def _helicoid():
    def f(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack([v * np.cos(u), v * np.sin(u), u], axis=-1)

    def jac(p):
        u, v = p[..., 0], p[..., 1]
        J = np.zeros(p.shape[:-1] + (3, 2))
        J[..., 0, 0] = -v * np.sin(u)
        J[..., 1, 0] = v * np.cos(u)
        J[..., 2, 0] = 1.0
        J[..., 0, 1] = np.cos(u)
        J[..., 1, 1] = np.sin(u)
        return J

    return dict(map=f, jacobian=jac, n=3, min_t=0.0, sizer=_square,
                gaussian_curvature=lambda p: -1.0 / (1 + p[..., 1] ** 2) ** 2)


def _enneper_radius(r):
    # |xi|^2 >= rho^2 + rho^4/3 + rho^6/9 on the circle of chart radius rho
    target = ((1 + COVERAGE_MARGIN) * r) ** 2
    return brentq(lambda R: R**2 + R**4 / 3 + R**6 / 9 - target, 0.0, max(1.0, 2 * r))


def _enneper():
    def f(p):
        u, v = p[..., 0], p[..., 1]
        return np.stack(
            [u - u**3 / 3 + u * v**2, -v + v**3 / 3 - u**2 * v, u**2 - v**2], axis=-1
        )

    def jac(p):
        u, v = p[..., 0], p[..., 1]
        J = np.empty(p.shape[:-1] + (3, 2))
        J[..., 0, 0] = 1 - u**2 + v**2
        J[..., 1, 0] = -2 * u * v
        J[..., 2, 0] = 2 * u
        J[..., 0, 1] = 2 * u * v
        J[..., 1, 1] = -1 + v**2 - u**2
        J[..., 2, 1] = -2 * v
        return J

    def sizer(r):
        R = _enneper_radius(r)
        return ((-R, R), (-R, R))

    return dict(map=f, jacobian=jac, n=3, min_t=0.0, sizer=sizer, embedded=False,
                gaussian_curvature=lambda p: -4.0 / (1 + p[..., 0] ** 2 + p[..., 1] ** 2) ** 4)


def _catenoid_x_line(c):
    # the neck coordinate is s = sinh v, in which t grows about linearly; uniform
    # cells in v would be far too coarse where cosh v (and the volume) is large
    def f(p):
        u, s, w = p[..., 0], p[..., 1], p[..., 2]
        ch = np.sqrt(1 + s * s)
        return np.stack([c * ch * np.cos(u), c * ch * np.sin(u), c * np.arcsinh(s), w], axis=-1)

    def jac(p):
        u, s = p[..., 0], p[..., 1]
        ch = np.sqrt(1 + s * s)
        J = np.zeros(p.shape[:-1] + (4, 3))
        J[..., 0, 0] = -c * ch * np.sin(u)
        J[..., 1, 0] = c * ch * np.cos(u)
        J[..., 0, 1] = c * s / ch * np.cos(u)
        J[..., 1, 1] = c * s / ch * np.sin(u)
        J[..., 2, 1] = c / ch
        J[..., 3, 2] = 1.0
        return J

    def sizer(r):
        R = (1 + COVERAGE_MARGIN) * r
        S = math.sqrt(max(0.0, (R / c) ** 2 - 1))
        return ((0.0, 2 * math.pi), (-S, S), (-R, R))

    return dict(map=f, jacobian=jac, n=4, min_t=c, sizer=sizer,
                periodic=(True, False, False), embedded=True)


def catalog(surface: str, r_max: float, resolution: int | None = None, **params) -> Chart:
    """Chart of a catalog surface whose domain covers the extrinsic ball ``{t < r_max}``.

    ``surface`` is one of :data:`SURFACES`. The catenoid family takes a neck
    scale ``c`` (default 1).
    """
    if resolution is not None and resolution < 16:
        raise ValueError("resolution must be >= 16")
    if surface == "plane":
        spec = _plane()
    elif surface == "catenoid":
        params = {"c": float(params.get("c", 1.0))}
        spec = _catenoid(params["c"])
    elif surface == "helicoid":
        spec = _helicoid()
    elif surface == "enneper":
        spec = _enneper()
    elif surface == "catenoid_x_line":
        params = {"c": float(params.get("c", 1.0))}
        spec = _catenoid_x_line(params["c"])
    else:
        raise ValueError(f"unknown surface {surface!r}; choose from {', '.join(SURFACES)}")
    if "c" in params and not params["c"] > 0:
        raise ValueError("neck scale c must be positive")
    sizer = spec.pop("sizer")
    m = 3 if surface == "catenoid_x_line" else 2
    chart = Chart(name=surface, bounds=((0, 1),) * m, params=params,
                  resolution=resolution or DEFAULT_RESOLUTION[m], sizer=sizer, **spec)
    chart = chart.restricted(r_max)
    coverage_certificate(chart, r_max)
    return chart


def coverage_certificate(chart: Chart, r: float, samples: int = 257) -> float:
    """Check that ``t > r`` on every non-periodic face of the parameter box.

    Returns the smallest boundary value of ``t``; raises :class:`CoverageError`
    otherwise.
    """
    lows = np.array([b[0] for b in chart.bounds])
    highs = np.array([b[1] for b in chart.bounds])
    axes = [np.linspace(lo, hi, samples) for lo, hi in chart.bounds]
    best = np.inf
    for a in range(chart.m):
        if chart.periodic[a]:
            continue
        for end in (lows[a], highs[a]):
            grids = [axes[b] if b != a else np.array([end]) for b in range(chart.m)]
            if chart.m == 3:
                grids = [g if len(g) == 1 else g[:: max(1, samples // 64)] for g in grids]
            P = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, chart.m)
            best = min(best, float(np.min(np.linalg.norm(chart(P), axis=-1))))
    if not best > r:
        raise CoverageError(f"chart boundary reaches t={best:.6g} <= r={r:g}")
    return best


def extrinsic_distance(chart: Chart, p) -> np.ndarray:
    """``t = |xi(p)|``."""
    return np.linalg.norm(chart(p), axis=-1)


def grad_t_norm_sq(chart: Chart, p) -> np.ndarray:
    """``|grad t|^2 = g^{ab} d_a t d_b t`` in chart coordinates.

    This is the squared length of the tangential part of the unit radial
    vector, hence lies in ``[0, 1]``.
    """
    p = np.asarray(p, dtype=float)
    x = chart(p)
    t = np.linalg.norm(x, axis=-1)
    if np.any(t == 0):
        raise ValueError("grad t is undefined where t = 0")
    return radial_energy(chart, p) / t**2


def radial_energy(chart: Chart, p) -> np.ndarray:
    """``|grad(t^2/2)|^2 = t^2 |grad t|^2``, smooth everywhere."""
    p = np.asarray(p, dtype=float)
    x = chart(p)
    J = chart.jac(p)
    g = np.einsum("...ia,...ib->...ab", J, J)
    b = np.einsum("...ia,...i->...a", J, x)
    return np.einsum("...a,...a->...", b, np.linalg.solve(g, b[..., None])[..., 0])


def gaussian_curvature(chart: Chart, p, h: float | None = None) -> np.ndarray:
    """Gaussian curvature of a surface chart in R^3.

    Uses the closed form when the chart has one, otherwise ``(LN - M^2)/det g``
    with second derivatives from central differences of step ``h``.
    """
    p = np.asarray(p, dtype=float)
    if chart.m != 2 or chart.n != 3:
        raise ValueError("Gaussian curvature needs a 2-dimensional chart in R^3")
    if chart.gaussian_curvature is not None and h is None:
        return chart.gaussian_curvature(p)
    return second_form_curvature(chart, p, h or 1e-4)


def second_form_curvature(chart: Chart, p, h: float = 1e-4) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    e = np.eye(2) * h
    J = chart.jac(p)
    N = np.cross(J[..., 0], J[..., 1])
    N /= np.linalg.norm(N, axis=-1, keepdims=True)
    f0 = chart(p)

    def d2(a, b):
        if a == b:
            return (chart(p + e[a]) - 2 * f0 + chart(p - e[a])) / h**2
        return (chart(p + e[a] + e[b]) - chart(p + e[a] - e[b])
                - chart(p - e[a] + e[b]) + chart(p - e[a] - e[b])) / (4 * h * h)

    L = np.sum(d2(0, 0) * N, -1)
    M = np.sum(d2(0, 1) * N, -1)
    Nn = np.sum(d2(1, 1) * N, -1)
    g = np.einsum("...ia,...ib->...ab", J, J)
    return (L * Nn - M**2) / np.linalg.det(g)


# --- parameter grids -----------------------------------------------------------

def axis_nodes(chart: Chart, resolution: int | None = None):
    """Per-axis node coordinates; periodic axes omit the duplicated endpoint."""
    res = resolution or chart.resolution
    out = []
    for (lo, hi), per in zip(chart.bounds, chart.periodic):
        out.append(np.linspace(lo, hi, res, endpoint=False) if per else np.linspace(lo, hi, res + 1))
    return out


def _parity(perm) -> int:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return inversions % 2


def kuhn_simplices(shape, periodic):
    """Kuhn subdivision of a structured grid of nodes into simplices.

    Returns ``(simplices, offsets)``: node indices ``(S, m+1)`` and the integer
    unwrapped grid position of each simplex vertex ``(S, m+1, m)``, needed to
    place vertices across a periodic seam.
    """
    m = len(shape)
    cells = [n if per else n - 1 for n, per in zip(shape, periodic)]
    base = np.stack(np.meshgrid(*[np.arange(c) for c in cells], indexing="ij"), -1).reshape(-1, m)
    simplices, positions = [], []
    for perm in itertools.permutations(range(m)):
        verts = [base.copy()]
        cur = base.copy()
        for ax in perm:
            cur = cur.copy()
            cur[:, ax] += 1
            verts.append(cur)
        pos = np.stack(verts, axis=1)  # (C, m+1, m)
        if _parity(perm):
            pos = pos[:, list(range(m - 1)) + [m, m - 1]]  # keep orientation consistent
        wrapped = pos % np.array(shape)
        idx = np.ravel_multi_index(tuple(wrapped[..., a] for a in range(m)), shape)
        simplices.append(idx)
        positions.append(pos)
    return np.concatenate(simplices), np.concatenate(positions)


# --- triangle meshes -----------------------------------------------------------

@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray
    name: str = "mesh"

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        F = np.asarray(self.faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != 3 or F.ndim != 2 or F.shape[1] != 3:
            raise ValueError("mesh needs (N, 3) vertices and (F, 3) faces")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "faces", F)

    @property
    def face_areas(self) -> np.ndarray:
        P = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]), axis=1)

    @property
    def vertex_areas(self) -> np.ndarray:
        """Barycentric areas: one third of the incident face areas."""
        return np.bincount(self.faces.ravel(), np.repeat(self.face_areas / 3, 3),
                           minlength=len(self.vertices))

    @property
    def area(self) -> float:
        return float(self.face_areas.sum())

    def edges(self):
        """Unique undirected edges and the number of faces on each."""
        E = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(E, axis=0, return_counts=True)

    def boundary_vertices(self) -> np.ndarray:
        E, count = self.edges()
        mask = np.zeros(len(self.vertices), bool)
        mask[E[count == 1].ravel()] = True
        return mask

    def validate(self) -> None:
        bad = np.nonzero(self.face_areas <= AREA_EPSILON)[0]
        if bad.size:
            raise DegenerateMeshError(f"{bad.size} degenerate faces, first {bad[:5].tolist()}")
        _, count = self.edges()
        if np.any(count > 2):
            raise DegenerateMeshError("mesh is not edge-manifold")

    def cotan_laplacian(self):
        """Cotangent stiffness ``L`` (positive semi-definite) and lumped mass.

        ``-L u / mass`` approximates the Laplace-Beltrami operator at vertices.
        """
        V, F = self.vertices, self.faces
        N = len(V)
        P = V[F]
        rows, cols, vals = [], [], []
        area2 = 2 * self.face_areas
        for k in range(3):
            i, j, o = (k + 1) % 3, (k + 2) % 3, k
            a = P[:, i] - P[:, o]
            b = P[:, j] - P[:, o]
            cot = np.sum(a * b, axis=1) / area2
            rows += [F[:, i], F[:, j]]
            cols += [F[:, j], F[:, i]]
            vals += [-0.5 * cot, -0.5 * cot]
        W = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(N, N)).tocsr()
        L = W - sparse.diags(np.asarray(W.sum(axis=1)).ravel())
        return L.tocsr(), self.vertex_areas

    def laplace(self, f) -> np.ndarray:
        """Discrete Laplace-Beltrami of vertex data ``f`` (``(N,)`` or ``(N, k)``)."""
        L, mass = self.cotan_laplacian()
        out = -(L @ f)
        return out / (mass if np.ndim(f) == 1 else mass[:, None])


def triangulate(chart: Chart, resolution: int | None = None) -> TriangleMesh:
    """Structured triangulation of a 2-d chart in R^3, periodic axes stitched."""
    if chart.m != 2 or chart.n != 3:
        raise ValueError("triangulate needs a 2-dimensional chart in R^3")
    res = resolution or chart.resolution
    if res < 2:
        raise ValueError("resolution must be >= 2")
    axes = axis_nodes(chart, res)
    shape = tuple(len(a) for a in axes)
    P = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 2)
    faces, _ = kuhn_simplices(shape, chart.periodic)
    mesh = TriangleMesh(chart(P), faces, name=chart.name)
    areas = mesh.face_areas
    bad = np.nonzero(areas <= AREA_EPSILON)[0]
    if bad.size:
        where = P[faces[bad[:5], 0]].tolist()
        raise DegenerateMeshError(f"{bad.size} degenerate faces near parameters {where}")
    mesh.validate()
    return mesh


def sphere_mesh(R: float = 1.0, subdivisions: int = 4) -> TriangleMesh:
    """Icosphere of radius ``R`` centred at the origin (negative control)."""
    phi = (1 + 5**0.5) / 2
    V = np.array([(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
                  (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
                  (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)], float)
    F = np.array([(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
                  (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
                  (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
                  (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)])
    V = list(V / np.linalg.norm(V, axis=1, keepdims=True))
    for _ in range(subdivisions):
        cache = {}
        new = []

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                x = V[a] + V[b]
                V.append(x / np.linalg.norm(x))
                cache[key] = len(V) - 1
            return cache[key]

        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        F = np.array(new)
    return TriangleMesh(R * np.array(V), F, name="sphere")


def _interior_mask(mesh: TriangleMesh) -> np.ndarray:
    interior = ~mesh.boundary_vertices()
    if not interior.any():
        raise ValueError("mesh has no interior vertices")
    return interior


def minimality_residual(mesh: TriangleMesh) -> float:
    """Largest discrete mean-curvature vector ``|Delta xi|`` over interior vertices.

    Vanishes under refinement for minimal surfaces; equals about ``2/R`` on a
    sphere of radius ``R``.
    """
    interior = _interior_mask(mesh)
    H = mesh.laplace(mesh.vertices)
    return float(np.max(np.linalg.norm(H[interior], axis=1)))


def laplacian_comparison_residual(mesh: TriangleMesh, w, m: int = 2) -> float:
    """``max |Delta(phi o t) - m h'(t)|`` over interior vertices with ``t > 0``.

    For minimal immersions in Euclidean space (``h(s) = s``) the smooth identity
    ``Delta |xi|^2/2 = m`` makes this vanish.
    """
    interior = _interior_mask(mesh)
    t = np.linalg.norm(mesh.vertices, axis=1)
    lap = mesh.laplace(w.phi(t))
    keep = interior & (t > 0)
    return float(np.max(np.abs(lap[keep] - m * w.dh(t[keep]))))


# --- ASCII export ------------------------------------------------------------

def write_obj(mesh: TriangleMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {mesh.name}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.faces + 1:
            fh.write(f"f {a} {b} {c}\n")


def read_obj(path) -> TriangleMesh:
    V, F, name = [], [], "mesh"
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "#" and len(parts) > 1 and name == "mesh":
                name = parts[1]
            elif parts[0] == "v":
                V.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                F.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return TriangleMesh(np.array(V), np.array(F), name=name)
