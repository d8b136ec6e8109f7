"""Command line front end.

Subcommands: growth, rayleigh, flux, spectrum, bounds, verify, plotdata, model.
Settings come from flags, then a flat ``key = value`` config file
(``--config``), then defaults. Exit codes: 0 success, 1 consistency failure,
2 configuration error, 3 numerical failure. Failures print one line of the
form ``error[<kind>]: <reason>`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import test_functions as tf
from .bounds import (brooks_intrinsic_bound, corollary1_check, gaussian_moment, ins_bound,
                     theorem1_bound, IncompleteModelError)
from .growth import (DEFAULT_POINTS, GrowthProfile, default_r_grid, growth_exponents,
                     growth_sequences, volume_profile)
from .immersions import SURFACES, CoverageError, EmptyBallError, catalog, check_nonempty
from .model_manifold import RangeError, ball_volume, completeness_check, euclidean, solve_warping
from .spectrum import NumericalError, spectrum_bottom_estimate
from .validation import check_profile_table
from .verify import CHECK_RADII, SIGMAS, default_r_max, verify_surface

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

GROWTH_HEADER = ["r", "vol", "dvol_dr", "theta", "mu_hat", "beta_hat"]
TEST_FUNCTION_HEADER = ["r", "energy", "mass", "rayleigh", "F", "Fprime", "bound",
                        "flux_lhs", "flux_rhs"]
SPECTRUM_HEADER = ["r", "value", "resolution", "residual"]

DEFAULTS = {
    "surface": "plane", "c": 1.0, "r_max": None, "grid_size": DEFAULT_POINTS,
    "resolution": None, "spectral_resolution": None, "tail_fraction": 0.25,
    "chain_slack": tf.CHAIN_SLACK, "flux_slack": tf.FLUX_SLACK, "format": "json",
    "out": None, "seed": None, "workers": 1, "radii": None, "sigmas": None, "alpha": 0.5,
    "profile": None, "log_volumes": False, "G": "zero", "n": 2, "step": 1e-3, "all": False,
}
TYPES = {"c": float, "r_max": float, "grid_size": int, "resolution": int,
         "spectral_resolution": int, "tail_fraction": float, "chain_slack": float,
         "flux_slack": float, "seed": int, "workers": int, "alpha": float, "n": int,
         "step": float}


class ConfigError(ValueError):
    pass


class ConsistencyFailure(RuntimeError):
    pass


# --- configuration ---------------------------------------------------------------

def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _coerce(key, value):
    if value is None or not isinstance(value, str):
        return value
    if key in TYPES:
        try:
            return TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}") from exc
    if key in ("all", "log_volumes"):
        return value.lower() in ("1", "true", "yes", "on")
    return value


def _float_list(text, name):
    try:
        return [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{name}: expected a list of numbers, got {text!r}") from exc


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over the defaults and validate."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update({k: _coerce(k, v) for k, v in read_config(args.config).items()})
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            cfg[k] = v
    if isinstance(cfg["radii"], str):
        cfg["radii"] = _float_list(cfg["radii"], "radii")
    if isinstance(cfg["sigmas"], str):
        cfg["sigmas"] = _float_list(cfg["sigmas"], "sigmas")
    if cfg["surface"] not in SURFACES:
        raise ConfigError(f"unknown surface {cfg['surface']!r}; choose from {', '.join(SURFACES)}")
    if not 0 < cfg["tail_fraction"] <= 0.5:
        raise ConfigError("tail_fraction must lie in (0, 0.5]")
    if cfg["resolution"] is not None and not 16 <= cfg["resolution"] <= 2048:
        raise ConfigError("resolution must lie in [16, 2048]")
    if cfg["spectral_resolution"] is not None and not 32 <= cfg["spectral_resolution"] <= 1024:
        raise ConfigError("spectral_resolution must lie in [32, 1024]")
    if cfg["grid_size"] < 8:
        raise ConfigError("grid_size must be at least 8")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    if not cfg["c"] > 0:
        raise ConfigError("c must be positive")
    if cfg["r_max"] is None:
        cfg["r_max"] = default_r_max(cfg["surface"])
    if not cfg["r_max"] > 0:
        raise ConfigError("r_max must be positive")
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    return cfg


def _surface_params(cfg):
    return {"c": cfg["c"]} if cfg["surface"] in ("catenoid", "catenoid_x_line") else {}


def _chart(cfg, r=None):
    r = r or cfg["r_max"]
    chart = catalog(cfg["surface"], r, cfg["resolution"], **_surface_params(cfg))
    check_nonempty(chart, r)
    return chart


# --- output -------------------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def to_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _emit(text, cfg):
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- profiles -----------------------------------------------------------------------

def load_profile(path, m=2, log_volumes=False) -> GrowthProfile:
    """Profile from a CSV with header ``r,vol`` (or ``r,log_vol``)."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [[float(x) for x in row] for row in reader if row]
    if len(header) < 2 or header[0] != "r":
        raise ConfigError(f"{path}: expected header r,vol or r,log_vol")
    log_volumes = log_volumes or header[1] == "log_vol"
    r, logv = check_profile_table(np.array(rows)[:, :2], log_volumes)
    return GrowthProfile(r, logv, m, surface={"tag": "file", "path": str(path)})


def _profile(cfg, extra=()):
    if cfg["profile"]:
        return load_profile(cfg["profile"], cfg["n"] if cfg["n"] != 2 else 2, cfg["log_volumes"])
    chart = _chart(cfg)
    grid = default_r_grid(chart.min_t, cfg["r_max"], cfg["grid_size"], extra=extra)
    return volume_profile(chart, grid, cfg["resolution"])


def _radii(cfg, min_t=0.0):
    radii = cfg["radii"] or [r for r in CHECK_RADII if r <= cfg["r_max"]]
    radii = sorted(set(float(r) for r in radii))
    if not radii:
        raise ConfigError("no radii to evaluate")
    if radii[0] <= min_t:
        raise EmptyBallError(f"extrinsic ball empty below r={min_t:g}")
    return radii


# --- commands -----------------------------------------------------------------------

def cmd_growth(cfg):
    """Volume profile with theta, mu_hat and beta_hat columns."""
    prof = _profile(cfg)
    rows = prof.to_rows()
    if cfg["format"] == "csv":
        return to_csv(rows, GROWTH_HEADER), EXIT_OK
    ex = growth_exponents(prof, cfg["tail_fraction"])
    return to_json({"schema": "growth_profile/v1", "surface": prof.surface, "m": prof.m,
                    "rows": rows, "mu_tail": ex.mu_tail, "beta_tail": ex.beta_tail}), EXIT_OK


def _test_function_rows(cfg, with_flux):
    chart = _chart(cfg)
    radii = _radii(cfg, chart.min_t)
    prof = volume_profile(chart, default_r_grid(chart.min_t, cfg["r_max"], cfg["grid_size"],
                                                extra=radii), cfg["resolution"])
    w = euclidean(cfg["r_max"] * 1.05)
    rows, failed = [], []
    for r in radii:
        p = tf.rayleigh_quotient(chart, w, r, cfg["resolution"])
        p.F_value, p.F_derivative = tf.F_functional(prof, w, r)
        p.bound_value = tf.rayleigh_bound(prof, w, r)
        if p.rayleigh > p.bound_value * (1 + cfg["chain_slack"]):
            failed.append(f"chain r={r:g}")
        if with_flux and r * (1 - tf.FLUX_WINDOW) > chart.min_t:
            fc = tf.flux_check(chart, w, r, cfg["resolution"], slack=cfg["flux_slack"], profile=prof)
            p.flux_lhs, p.flux_rhs = fc.lhs, fc.rhs
            if not fc.passed:
                failed.append(f"flux r={r:g}")
        rows.append(p.to_row())
    return rows, failed


def _rows_output(cfg, rows, failed, schema):
    if cfg["format"] == "csv":
        text = to_csv(rows, TEST_FUNCTION_HEADER)
    else:
        text = to_json({"schema": schema, "surface": cfg["surface"], "rows": rows,
                        "failed": failed})
    if failed:
        raise ConsistencyFailure(", ".join(failed), text)
    return text, EXIT_OK


def cmd_rayleigh(cfg):
    """Rayleigh quotient of the radial test function against its growth bound."""
    rows, failed = _test_function_rows(cfg, with_flux=False)
    return _rows_output(cfg, rows, failed, "test_functions/v1")


def cmd_flux(cfg):
    """Rayleigh table plus the boundary flux inequality."""
    rows, failed = _test_function_rows(cfg, with_flux=True)
    failed = [f for f in failed if f.startswith("flux")]
    return _rows_output(cfg, rows, failed, "test_functions/v1")


def cmd_spectrum(cfg):
    """Discrete Dirichlet lambda_1 on a ladder of balls."""
    chart = _chart(cfg)
    radii = _radii(cfg, chart.min_t)
    est = spectrum_bottom_estimate(chart, radii, cfg["spectral_resolution"], seed=cfg["seed"])
    rows = est.to_json()
    if cfg["format"] == "csv":
        return to_csv(rows, SPECTRUM_HEADER), EXIT_OK
    return to_json({"schema": "spectrum/v1", "surface": chart.surface_id, "lambda1": rows,
                    "tail": est.tail, "monotone": est.monotone()}), EXIT_OK


def cmd_bounds(cfg):
    """Growth-only bounds; works on catalog surfaces and on profile files."""
    prof = _profile(cfg)
    tfrac = cfg["tail_fraction"]
    c1 = corollary1_check(prof, tfrac)
    out = {"schema": "growth_bounds/v1", "surface": prof.surface, "m": prof.m,
           "theorem1": theorem1_bound(prof, tfrac), "ins": ins_bound(prof, tfrac),
           "cor1_theta_exponent": c1.tail, "cor1_vanishes": c1.vanishes, "cor3": []}
    chart = None if cfg["profile"] else _chart(cfg)
    for sigma in cfg["sigmas"] or SIGMAS:
        gm = gaussian_moment(chart, sigma, prof, tfrac)
        out["cor3"].append({"sigma": sigma, "moment": gm.moment, "finite": gm.finite,
                            "bound": gm.cor3_bound, "proof_ratio": gm.proof_ratio})
    if cfg["format"] == "csv":
        return to_csv([out], ["theorem1", "ins", "cor1_theta_exponent"]), EXIT_OK
    return to_json(out), EXIT_OK


def _verify_one(args):
    surface, cfg = args
    rep = verify_surface(surface, cfg["r_max"] if not cfg["all"] else None,
                         resolution=cfg["resolution"],
                         spectral_resolution=cfg["spectral_resolution"],
                         tail_fraction=cfg["tail_fraction"], sigmas=cfg["sigmas"] or SIGMAS,
                         alpha=cfg["alpha"], check_radii=cfg["radii"],
                         chain_slack=cfg["chain_slack"], flux_slack=cfg["flux_slack"],
                         seed=cfg["seed"], **({"c": cfg["c"]} if surface.startswith("catenoid")
                                              else {}))
    return rep


def cmd_verify(cfg):
    """Full bound report against the eigenvalue oracle."""
    surfaces = list(SURFACES) if cfg["all"] else [cfg["surface"]]
    jobs = [(s, cfg) for s in surfaces]
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            reports = list(pool.map(_verify_one, jobs))
    else:
        reports = [_verify_one(j) for j in jobs]
    if cfg["format"] == "csv":
        text = to_csv([r.summary_row() for r in reports],
                      ["surface", "m", "theorem1", "ins", "lambda1_tail", "epsilon_total", "passed"])
    elif len(reports) == 1:
        text = reports[0].to_json() + "\n"
    else:
        text = to_json([r.to_dict() for r in reports])
    failed = [f"{r.surface['tag']}:{f.name}" for r in reports for f in r.consistency_flags
              if not f.passed]
    if failed:
        raise ConsistencyFailure(", ".join(failed), text)
    return text, EXIT_OK


def cmd_plotdata(cfg):
    """Long-format series ``series,r,value``."""
    prof = _profile(cfg)
    mu, beta = growth_sequences(prof)
    rows = [{"series": "beta_hat", "r": r, "value": b} for r, b in zip(prof.r_grid, beta)]
    rows += [{"series": "mu_hat", "r": r, "value": a} for r, a in zip(prof.r_grid, mu)]
    if not cfg["profile"]:
        chart = _chart(cfg)
        radii = _radii(cfg, chart.min_t)
        w = euclidean(cfg["r_max"] * 1.05)
        for r in radii:
            rows.append({"series": "rayleigh", "r": r,
                         "value": tf.rayleigh_quotient(chart, w, r, cfg["resolution"]).rayleigh})
            rows.append({"series": "bound", "r": r, "value": tf.rayleigh_bound(prof, w, r)})
        est = spectrum_bottom_estimate(chart, radii, cfg["spectral_resolution"], seed=cfg["seed"])
        rows += [{"series": "lambda1", "r": r, "value": v} for r, v in zip(est.r, est.values)]
    return to_csv(rows, ["series", "r", "value"]), EXIT_OK


def cmd_model(cfg):
    """Warping function table of a rotationally symmetric model."""
    G = cfg["G"]
    try:
        G = float(G)
    except (TypeError, ValueError):
        pass
    w = solve_warping(G, cfg["r_max"], cfg["step"])
    verdict = completeness_check(w.curvature)
    out = {"schema": "model_manifold/v1", "warping": {k: v for k, v in w.to_dict().items()
                                                      if k != "h_grid"},
           "n": cfg["n"], "complete": verdict.complete, "diagnostic": verdict.diagnostic}
    radii = cfg["radii"] or list(np.linspace(0, w.r_max_solved, 11)[1:])
    top = w.blowdown_radius or np.inf
    radii = [float(r) for r in radii if 0 < r < top]
    out["rows"] = [{"r": r, "h": float(w.h(r)), "dh": float(w.dh(r)), "phi": float(w.phi(r)),
                    "volume": ball_volume(w, cfg["n"], r)} for r in radii]
    try:
        out["brooks"] = brooks_intrinsic_bound(w, cfg["n"]).value
    except IncompleteModelError as exc:
        out["brooks"] = None
        out["brooks_skipped"] = str(exc)
    if cfg["format"] == "csv":
        return to_csv(out["rows"], ["r", "h", "dh", "phi", "volume"]), EXIT_OK
    return to_json(out), EXIT_OK


COMMANDS = {"growth": cmd_growth, "rayleigh": cmd_rayleigh, "flux": cmd_flux,
            "spectrum": cmd_spectrum, "bounds": cmd_bounds, "verify": cmd_verify,
            "plotdata": cmd_plotdata, "model": cmd_model}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="flat key = value file; flags override it")
    a("--surface", help=f"one of {', '.join(SURFACES)}")
    a("--c", type=float, help="neck scale of the catenoid family")
    a("--r-max", dest="r_max", type=float)
    a("--grid-size", dest="grid_size", type=int, help="number of radii in the profile")
    a("--resolution", type=int, help="cells per axis for quadrature")
    a("--spectral-resolution", dest="spectral_resolution", type=int,
      help="cells per axis for the eigenvalue oracle")
    a("--tail-fraction", dest="tail_fraction", type=float)
    a("--chain-slack", dest="chain_slack", type=float)
    a("--flux-slack", dest="flux_slack", type=float)
    a("--radii", help="comma separated radii")
    a("--sigmas", help="comma separated Gaussian weights")
    a("--alpha", type=float)
    a("--profile", help="CSV volume profile (header r,vol or r,log_vol)")
    a("--log-volumes", dest="log_volumes", action="store_true", default=None)
    a("--format", choices=("json", "csv"))
    a("--out", help="output path (default stdout)")
    a("--seed", type=int, help="eigensolver start vector seed")
    a("--workers", type=int)
    a("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="minspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
        if name == "verify":
            p.add_argument("--all", action="store_true", default=None)
        if name == "model":
            p.add_argument("--G", dest="G", help="zero, hyperbolic, sphere or a constant")
            p.add_argument("--n", type=int, help="model dimension")
            p.add_argument("--step", type=float)
        if name in ("bounds", "growth", "plotdata"):
            p.add_argument("--m", dest="n", type=int, help="dimension for profile files")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        text, code = COMMANDS[args.command](cfg)
        _emit(text, cfg)
        return code
    except ConsistencyFailure as exc:
        reason, text = exc.args
        _emit(text, cfg)
        print(f"error[consistency]: {reason}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, EmptyBallError, CoverageError, RangeError, IncompleteModelError,
            OSError, ValueError) as exc:
        print(f"error[config]: {_one_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"error[numerical]: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERICAL


def _one_line(exc) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
