import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest

from gmac_regions import cli
from gmac_regions.discrete import broken_markov_pmf

ROOT = Path(__file__).resolve().parents[1]
SMALL_SWEEP = {"rho_points": 4, "eta_points": 3, "split_points": 3, "alpha_points": 4,
               "refine_depth": 1, "weights": 5}


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data, indent=2))
    return p


def _run(*args):
    return cli.main([str(a) for a in args])


def test_region_prop1_outputs(tmp_path):
    out = tmp_path / "out"
    assert _run("region", "--config", ROOT / "configs" / "fig5.json", "--out", out) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "region_combined.svg" in names and "region.json" in names
    summary = json.loads((out / "region.json").read_text())
    assert summary["combined_max_hausdorff"] <= 1e-9
    text = (out / "region_Q0_5dB.csv").read_text()
    assert text.startswith("# ") and "\noverlay,R1,R2\n" in text
    overlays = {p["label"]: set(p["overlays"]) for p in summary["panels"]}
    assert overlays["Q0_2dB"] == {"gmac-csit", "mac-csit", "gmac-no-csit", "mac-no-csit"}


def test_region_prop2_overlays_and_format(tmp_path):
    cfg = _write(tmp_path, {
        "model": "prop2", "channel": {"p1": 10, "p2": 10, "n1": 0, "n2": 0, "n3": 10,
                                      "q1": 7, "q2": 7},
        "overlays": ["gdpc", "pure-dpc", "clean-mac", "four-case-hull"],
        "sweep": SMALL_SWEEP})
    out = tmp_path / "out"
    assert _run("region", "--config", cfg, "--out", out, "--format", "csv,json") == 0
    assert not list(out.glob("*.svg"))
    s = json.loads((out / "region.json").read_text())["panels"][0]
    assert "four_case_excess" in s
    ov = s["overlays"]
    assert ov["gdpc"]["max_sum_rate"] >= ov["pure-dpc"]["max_sum_rate"] - 1e-12
    assert (out / "trace_main_gdpc.csv").read_text().count("\n") == 2 + 1 + 5


def test_region_prop3_with_outer_bound(tmp_path):
    (tmp_path / "ob.csv").write_text("# outer\nR1,R2\n0,1.2\n0.6,0.6\n0.7,0\n")
    cfg = _write(tmp_path, {
        "model": "prop3", "channel": {"p1": 10, "p2": 10, "n1": 0, "n2": 0, "n3": 10,
                                      "q1": "inf"},
        "overlays": ["gdpc", "outer-bound"], "outer_bound_csv": {"main": "ob.csv"},
        "sweep": SMALL_SWEEP})
    out = tmp_path / "out"
    assert _run("region", "--config", cfg, "--out", out) == 0
    s = json.loads((out / "region.json").read_text())["panels"][0]
    assert s["strong_state"]["branch"] == "n1<=n3"
    assert s["overlays"]["outer-bound"]["r2_max"] == 1.2


def test_model_override(tmp_path):
    cfg = _write(tmp_path, {"model": "prop2",
                            "channel": {"p1": 10, "p2": 10, "n1": 0, "n2": 0, "n3": 7},
                            "overlays": ["gdpc"], "sweep": SMALL_SWEEP})
    out = tmp_path / "out"
    assert _run("region", "--config", cfg, "--model", "prop1", "--out", out) == 0
    assert json.loads((out / "region.json").read_text())["model"] == "prop1"


def test_discrete_region(tmp_path):
    out = tmp_path / "out"
    assert _run("region", "--config", ROOT / "configs" / "discrete-cribbing.json",
                "--out", out) == 0
    s = json.loads((out / "region.json").read_text())["panels"][0]
    assert set(s["bounds"]) == {"b12", "b21", "b13", "b23", "b13_23", "b_sum"}
    pts = read_polyline_csv_cols(out / "region_main.csv")
    assert pts.shape[1] == 2


def read_polyline_csv_cols(path):
    rows = [l.split(",")[1:] for l in path.read_text().splitlines()
            if not l.startswith("#") and not l.startswith("overlay")]
    return np.array(rows, dtype=float)


def test_sumrate_single_row(tmp_path):
    cfg = _write(tmp_path, {"model": "prop2",
                            "channel": {"p1": 10, "p2": 10, "n1": -10, "n2": -10, "n3": 0},
                            "sir_db": [3], "sweep": {**SMALL_SWEEP, "weights": 1}})
    out = tmp_path / "out"
    assert _run("sumrate-sir", "--config", cfg, "--out", out) == 0
    lines = (out / "sumrate_sir.csv").read_text().splitlines()
    assert lines[2] == "sir_db,q_db,gdpc,full_cooperation,no_cooperation"
    assert len(lines) == 4 and lines[3].startswith("3,7,")
    assert (out / "sumrate_sir.svg").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "model": "prop1",\n  "units": "furlongs"\n}\n')
    assert _run("region", "--config", bad, "--out", tmp_path) == 2
    err = capsys.readouterr().err
    assert "bad.json:3:" in err
    assert _run("region", "--out", tmp_path) == 2
    assert _run("region", "--config", tmp_path / "missing.json") == 2
    good = ROOT / "configs" / "fig5.json"
    assert _run("region", "--config", good, "--format", "png", "--out", tmp_path) == 2
    assert _run("sumrate-sir", "--config", good, "--out", tmp_path) == 2


def test_model_errors_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, {"model": "prop3",
                            "channel": {"p1": 10, "p2": 10, "n1": 0, "n2": 0, "n3": 10, "q1": 30},
                            "overlays": ["gdpc"], "sweep": SMALL_SWEEP})
    assert _run("region", "--config", cfg, "--out", tmp_path / "o") == 3
    assert "q1 must be inf" in capsys.readouterr().err
    asym = _write(tmp_path, {"model": "prop2",
                             "channel": {"p1": 10, "p2": 7, "n1": 0, "n2": 0, "n3": 0},
                             "sir_db": [0], "sweep": SMALL_SWEEP}, "asym.json")
    assert _run("sumrate-sir", "--config", asym, "--out", tmp_path / "o") == 3
    pmf = broken_markov_pmf(0)
    broken = _write(tmp_path, {"model": "discrete",
                               "pmf": {"sizes": dict(pmf.sizes),
                                       "probabilities": pmf.tensor.ravel().tolist()}},
                    "d.json")
    assert _run("region", "--config", broken, "--out", tmp_path / "o") == 3
    assert "S1S2 - S0 - U" in capsys.readouterr().err


def test_verify_exit_codes(tmp_path, capsys):
    ok = _write(tmp_path, {"verify": {"grid_points": 50, "mc_samples": 100000}})
    assert _run("verify", "--config", ok, "--out", tmp_path / "a") == 0
    report = (tmp_path / "a" / "report.txt").read_text()
    assert report.endswith("10 passed, 0 failed\n")
    bad = _write(tmp_path, {"verify": {"grid_points": 50, "mc_samples": 100000,
                                       "perturb_a0": 0.05, "break_markov": True}}, "bad.json")
    assert _run("verify", "--config", bad, "--out", tmp_path / "b") == 4
    data = json.loads((tmp_path / "b" / "verify.json").read_text())
    failed = {c["name"] for c in data["checks"] if not c["passed"]}
    assert failed == {"orthogonality", "factorization"} and data["passed"] is False
    out = capsys.readouterr().out
    assert "Markov chain S1S2 - S0 - U violated" in out and "residuals U,V1" in out
