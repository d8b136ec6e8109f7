"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from minspec import test_functions as tf
from minspec.bounds import (corollary2_bound, gaussian_moment, ins_bound, kappa_profile,
                            theorem1_bound)
from minspec.growth import GrowthProfile, default_r_grid, growth_sequences, volume_profile
from minspec.immersions import (EmptyBallError, SURFACES, catalog, laplacian_comparison_residual,
                                minimality_residual, sphere_mesh)
from minspec.model_manifold import euclidean, solve_warping
from minspec.spectrum import assemble, dirichlet_lambda1
from minspec.verify import verify_surface

J01_SQ = 5.783185962946783  # first zero of J_0, squared
RADII = (2.0, 5.0, 10.0, 20.0, 50.0)


def report(n, ok, detail, elapsed=None, budget=None):
    timing = "" if elapsed is None else f" [{elapsed:.1f}s of {budget:g}s]"
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}{timing}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_model_manifold_solver():
    t0 = time.perf_counter()
    errs = {}
    for G, exact in ((0, lambda s: s), (1, np.sinh), (-1, np.sin)):
        w = solve_warping(G, 10.0)
        s = w.s[1:]
        if w.blowdown_radius is not None:
            s = s[s < w.blowdown_radius]  # h vanishes at the blowdown radius itself
        errs[G] = float(np.max(np.abs(w.h(s) - exact(s)) / np.abs(exact(s))))
    dt = time.perf_counter() - t0
    ok = max(errs.values()) < 1e-8 and dt < 1.0
    assert report(1, ok, "max rel err " + ", ".join(f"G={g}: {e:.2e}" for g, e in errs.items()),
                  dt, 1)


def test_criterion_2_plane_closed_forms():
    t0 = time.perf_counter()
    radii = (1.0, 2.0, 5.0, 10.0, 20.0)
    chart = catalog("plane", 20.0)
    prof = volume_profile(chart, default_r_grid(0.0, 20.0, extra=radii))
    w = euclidean(25.0)
    worst = {"vol": 0.0, "F": 0.0, "R": 0.0, "bound": 0.0, "flux": 0.0}
    for r in radii:
        worst["vol"] = max(worst["vol"], abs(prof.volume_at(r) / (math.pi * r * r) - 1))
        F, _ = tf.F_functional(prof, w, r)
        worst["F"] = max(worst["F"], abs(F / (math.pi * r**6 / 24) - 1))
        R = tf.rayleigh_quotient(chart, w, r).rayleigh
        worst["R"] = max(worst["R"], abs(R * r * r / 6 - 1))
        worst["bound"] = max(worst["bound"], abs(tf.rayleigh_bound(prof, w, r) * r * r / 6 - 1))
        fc = tf.flux_check(chart, w, r, profile=prof)
        worst["flux"] = max(worst["flux"], abs(fc.lhs / (2 * math.pi * r) - 1),
                            abs(fc.rhs / (2 * math.pi * r) - 1))
    dt = time.perf_counter() - t0
    tol = {"vol": 1e-3, "F": 5e-3, "R": 5e-3, "bound": 5e-3, "flux": 5e-3}
    ok = all(worst[k] < tol[k] for k in tol) and dt < 10
    assert report(2, ok, "worst rel err " + ", ".join(f"{k}={v:.1e}" for k, v in worst.items()),
                  dt, 10)


def test_criterion_3_eigenvalue_oracle():
    t0 = time.perf_counter()
    lam1 = dirichlet_lambda1(assemble(catalog("plane", 1.0), 1.0, 128))
    scaled = []
    for r in (1.0, 2.0, 5.0, 10.0):
        scaled.append(dirichlet_lambda1(assemble(catalog("plane", r), r, 128)) * r * r)
    spread = (max(scaled) - min(scaled)) / min(scaled)
    dt = time.perf_counter() - t0
    err = abs(lam1 / J01_SQ - 1)
    ok = err < 1e-2 and spread < 1e-2 and dt < 60
    assert report(3, ok, f"unit disk rel err {err:.1e}, lambda r^2 spread {spread:.1e}", dt, 60)


def test_criterion_4_inequality_suites():
    t0 = time.perf_counter()
    slack = 0.02
    worst, failures = {}, []
    w = euclidean(55.0)
    for name in ("catenoid", "helicoid", "enneper"):
        chart = catalog(name, 50.0)
        prof = volume_profile(chart, default_r_grid(chart.min_t, 50.0, extra=RADII))
        gm = gaussian_moment(chart, 0.1, prof)
        checks = {"cor3_proof": gm.proof_ratio - 1}
        for r in RADII:
            fc = tf.flux_check(chart, w, r, profile=prof)
            R = tf.rayleigh_quotient(chart, w, r).rayleigh
            b = tf.rayleigh_bound(prof, w, r)
            F, _ = tf.F_functional(prof, w, r)
            for key, excess in (("flux", fc.lhs / fc.rhs - 1), ("chain", R / b - 1),
                                ("F", F / (prof.volume_at(r) * r**4 / 8) - 1)):
                checks[key] = max(checks.get(key, -np.inf), excess)
        for key, excess in checks.items():
            worst[key] = max(worst.get(key, -np.inf), excess)
            if excess > slack:
                failures.append(f"{name}:{key}")
    dt = time.perf_counter() - t0
    ok = not failures and dt < 300
    detail = "largest lhs/rhs - 1: " + ", ".join(f"{k}={v:+.1e}" for k, v in worst.items())
    assert report(4, ok, detail + (f" failures={failures}" if failures else ""), dt, 300)


@pytest.fixture(scope="module")
def reports():
    return {name: verify_surface(name) for name in SURFACES}


def test_criterion_5_theorem1_consistency(reports):
    parts, ok = [], True
    for name, rep in reports.items():
        lam = rep.oracle_lambda1_tail
        this = lam <= rep.theorem1 + rep.epsilon_total
        dominance = all(f.passed for f in rep.consistency_flags
                        if f.name.startswith("rayleigh_dominance"))
        ok &= this and dominance
        parts.append(f"{name}: lambda1={lam:.2e} <= {rep.theorem1:.2e} + "
                     f"(disc {rep.epsilon_discretization:.1e}, finite-r {rep.epsilon_finite_r:.1e})"
                     f"{'' if dominance else ' dominance FAILED'}")
    assert report(5, ok, "; ".join(parts))


def test_criterion_6_theorem1_improves_ins():
    r = np.linspace(1.0, 50.0, 200)
    quad = GrowthProfile.synthetic(r, lambda x: 0.3 * x * x)
    t1_err = abs(theorem1_bound(quad) - 0.6)
    mu, _ = growth_sequences(quad)
    ins_seq = mu**2 / 4
    grows = bool(np.all(np.diff(ins_seq) > 0)) and ins_seq[-1] > 100 * ins_seq[0]
    lin = GrowthProfile.synthetic(r, lambda x: x)
    ins_err = abs(ins_bound(lin) - 0.25)
    t1 = [theorem1_bound(GrowthProfile.synthetic(np.linspace(1.0, R, 200), lambda x: x))
          for R in (10.0, 50.0, 250.0)]
    decays = t1[0] > t1[1] > t1[2] and t1[2] < 0.01
    ok = t1_err <= 1e-15 and grows and ins_err <= 1e-15 and decays
    assert report(6, ok, f"|theorem1-0.6|={t1_err:.1e}, INS sequence {ins_seq[0]:.3g} -> "
                         f"{ins_seq[-1]:.3g}, |ins-0.25|={ins_err:.1e}, "
                         f"theorem1 on e^r: {', '.join(f'{x:.3g}' for x in t1)}")


def test_criterion_7_corollaries():
    cat = catalog("catenoid", 50.0)
    prof = volume_profile(cat, default_r_grid(1.0, 50.0, extra=RADII))
    th50 = float(prof.theta[-1])
    kap = kappa_profile(cat, np.linspace(2.0, 50.0, 25))
    kap_err = float(np.max(np.abs(kap + 1)))
    cor2 = {}
    for name in ("catenoid", "helicoid"):
        chart = catalog(name, 50.0)
        p = prof if name == "catenoid" else volume_profile(
            chart, default_r_grid(0.0, 50.0, extra=RADII))
        cor2[name] = corollary2_bound(chart, p, 0.5, r_sample=RADII).passed
    plane = catalog("plane", 50.0)
    pprof = volume_profile(plane, default_r_grid(0.0, 50.0))
    gm_err = max(abs(gaussian_moment(plane, s, pprof).moment * s / math.pi - 1)
                 for s in (0.05, 0.1, 1.0))
    ok = 1.9 <= th50 <= 2.1 and kap_err <= 1e-6 and all(cor2.values()) and gm_err < 5e-3
    assert report(7, ok, f"Theta(50)={th50:.4f}, max|kappa+1|={kap_err:.1e}, cor2={cor2}, "
                         f"plane moment rel err {gm_err:.1e}")


def test_criterion_8_weak_convergence():
    parts, ok = [], True
    # the catenoid with neck 1 has an empty Omega_1, so its half-size copy is used
    for label, chart in (("plane", catalog("plane", 80.0)),
                         ("catenoid(neck 0.5)", catalog("catenoid", 80.0, c=0.5))):
        rows = tf.weak_convergence_check(chart, 1.0, [10, 20, 40, 80])
        mass = [row.mass_inside for row in rows]
        mono = all(b < a for a, b in zip(mass, mass[1:]))
        below = all(row.passed for row in rows)
        ok &= mono and below
        parts.append(f"{label}: " + " ".join(f"{row.mass_inside:.2e}<={row.bound:.2e}"
                                             for row in rows))
    assert report(8, ok, "; ".join(parts))


def test_criterion_9_negative_controls():
    R = 1.0
    mesh = sphere_mesh(R, 4)
    mres = minimality_residual(mesh)
    lres = laplacian_comparison_residual(mesh, euclidean(2.0))
    try:
        assemble(catalog("catenoid", 5.0), 0.5, 64)
        empty = "no error"
    except EmptyBallError as exc:
        empty = str(exc)
    try:
        tf.rayleigh_quotient(catalog("catenoid", 5.0), euclidean(5.0), 0.5)
        empty_tf = "no error"
    except EmptyBallError as exc:
        empty_tf = str(exc)
    expected = "extrinsic ball empty below r=1"
    ok = mres >= 1 / R and lres > 0.5 and empty == expected and empty_tf == expected
    assert report(9, ok, f"sphere minimality residual {mres:.3f} (>= {1 / R:g}), comparison "
                         f"residual {lres:.3f}, empty ball: {empty!r}")
