import csv
import io
import json

import numpy as np
import pytest

from minspec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_empty_ball_exit_code(capsys):
    code, out, err = run(capsys, "growth", "--surface", "catenoid", "--r-max", "0.5")
    assert code == 2
    assert err.strip() == "error[config]: extrinsic ball empty below r=1"
    assert out == ""


def test_growth_plane_csv(capsys):
    code, out, _ = run(capsys, "growth", "--surface", "plane", "--r-max", "50", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["r", "vol", "dvol_dr", "theta", "mu_hat", "beta_hat"]
    assert float(rows[-1]["beta_hat"]) == pytest.approx(0.00359, abs=1e-5)


def test_growth_catenoid_theta(capsys):
    code, out, _ = run(capsys, "growth", "--surface", "catenoid", "--r-max", "50")
    d = json.loads(out)
    assert code == 0 and d["schema"] == "growth_profile/v1"
    assert d["rows"][-1]["theta"] == pytest.approx(2.0, abs=0.1)


def test_determinism(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"s{k}.json"
        assert main(["spectrum", "--surface", "helicoid", "--radii", "2,4", "--seed", "3",
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# plane run\nsurface = plane\nr-max = 10\nradii = 2, 4\nformat = csv\n")
    code, out, _ = run(capsys, "spectrum", "--config", str(cfg))
    assert code == 0 and out.splitlines()[0] == "r,value,resolution,residual"
    assert len(out.splitlines()) == 3
    code, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--radii", "3")
    assert len(out.splitlines()) == 2 and out.splitlines()[1].startswith("3.0,")


def test_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "growth", "--config", str(cfg))
    assert code == 2 and err.startswith("error[config]: ") and len(err.splitlines()) == 1
    code, _, err = run(capsys, "growth", "--tail-fraction", "0.9")
    assert code == 2 and "tail_fraction" in err


def test_synthetic_profile_bounds(capsys, tmp_path):
    r = np.linspace(1, 50, 200)
    path = tmp_path / "p.csv"
    path.write_text("r,log_vol\n" + "".join(f"{x!r},{0.3 * x * x!r}\n" for x in r.tolist()))
    code, out, _ = run(capsys, "bounds", "--profile", str(path))
    d = json.loads(out)
    assert code == 0 and d["theorem1"] == pytest.approx(0.6, rel=1e-14)
    assert d["ins"] > 30
    code, out, _ = run(capsys, "plotdata", "--profile", str(path))
    rows = list(csv.DictReader(io.StringIO(out)))
    beta = [float(x["value"]) for x in rows if x["series"] == "beta_hat"]
    np.testing.assert_allclose(beta, 0.3, rtol=1e-14)


def test_model(capsys):
    code, out, _ = run(capsys, "model", "--G", "hyperbolic", "--n", "2", "--r-max", "30")
    d = json.loads(out)
    assert code == 0 and d["complete"] and d["brooks"] == pytest.approx(0.25, abs=1e-6)
    code, out, _ = run(capsys, "model", "--G", "sphere", "--r-max", "5")
    d = json.loads(out)
    assert d["brooks"] is None and d["complete"] is False
    assert d["warping"]["blowdown"] == pytest.approx(np.pi)


def test_rayleigh_and_flux(capsys):
    code, out, _ = run(capsys, "flux", "--surface", "plane", "--r-max", "10", "--radii", "2,5",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert float(rows[1]["rayleigh"]) == pytest.approx(6 / 25, rel=5e-3)
    assert float(rows[1]["flux_lhs"]) == pytest.approx(float(rows[1]["flux_rhs"]), rel=5e-3)


def test_consistency_failure_exit(capsys):
    # a negative slack makes the (exact) chain equality fail on purpose
    code, out, err = run(capsys, "rayleigh", "--surface", "plane", "--r-max", "5",
                         "--radii", "2", "--chain-slack", "-0.1")
    assert code == 1 and err.startswith("error[consistency]: chain r=2")
    assert json.loads(out)["failed"] == ["chain r=2"]


def test_plotdata_catenoid_lambda_below_bound(capsys):
    code, out, _ = run(capsys, "plotdata", "--surface", "catenoid", "--r-max", "20",
                       "--radii", "2,5,10,20")
    rows = list(csv.DictReader(io.StringIO(out)))
    lam = {float(x["r"]): float(x["value"]) for x in rows if x["series"] == "lambda1"}
    bound = {float(x["r"]): float(x["value"]) for x in rows if x["series"] == "bound"}
    assert code == 0 and all(lam[r] < bound[r] for r in lam)


def test_verify_plane(capsys):
    code, out, _ = run(capsys, "verify", "--surface", "plane")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert d["theorem1"] == pytest.approx(0.0072, abs=1e-4)
    assert d["oracle_lambda1_tail"] == pytest.approx(5.7832 / 2500, rel=1e-2)


def test_verify_enneper_skips_cor2(capsys):
    code, out, _ = run(capsys, "verify", "--surface", "enneper", "--r-max", "20")
    d = json.loads(out)
    assert code == 0 and d["cor2_status"] == "skipped: not embedded"


@pytest.mark.slow
def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "--all", "--workers", "3")
    reports = json.loads(out)
    assert code == 0
    assert [r["surface"]["tag"] for r in reports] == ["plane", "catenoid", "helicoid", "enneper",
                                                      "catenoid_x_line"]
