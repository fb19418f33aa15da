import json
import math
import pathlib

import pytest

import lapkit

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def small_config():
    return {
        "name": "py_small",
        "grid": {"n": 1, "L": 20.0, "N": 128},
        "potential": {"kind": "gaussian", "amplitude": 0.2},
        "conjugate": {"kind": "dilation"},
        "theorems": ["MR"],
        "mourre": {"S": {"kind": "laplacian", "scale": 0.5}, "probes": 24, "estimate_constants": False},
        "eigs": {"count": 2},
        "sweep": {"lambdas": [-0.5, 0.5], "etas": [0.1, 0.01], "weights": {"kind": "identity"}},
        "seed": 11,
    }


def test_bundled_configs_load():
    for name in ("free_dilation", "osc_beta3_au", "violation_well"):
        assert lapkit.load_config(CONFIGS / f"{name}.json")["name"] == name


def test_normalize_is_idempotent():
    echo = lapkit.normalize_config(small_config())
    assert lapkit.normalize_config(echo) == echo


def test_unknown_field_is_refused():
    cfg = small_config()
    cfg["colour"] = "blue"
    with pytest.raises(ValueError, match="colour"):
        lapkit.run(cfg)


def test_run_matches_exit_code_and_is_deterministic():
    a = lapkit.run(small_config())
    assert a["exit_code"] == lapkit.exit_code(a["verdict"])
    assert a == lapkit.run(small_config())
    assert a["lap_sweep"]["verdict"] == "pass"


def test_sweep_rows_are_finite():
    r = lapkit.run(small_config(), "sweep")
    rows = r["lap_sweep"]["rows"]
    assert len(rows) == 4
    assert all(math.isfinite(row["norm"]) and row["norm"] > 0 for row in rows)


def test_emit_writes_the_report_files(tmp_path):
    code = lapkit.emit(small_config(), tmp_path, gnuplot=True)
    for f in ("report.json", "sweep.csv", "sup_per_lambda.csv", "plot.gp"):
        assert (tmp_path / f).exists()
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0] == "lambda,eta,norm,iters,residual,valid"
    assert json.loads((tmp_path / "report.json").read_text())["exit_code"] == code
    assert code == lapkit.run(small_config())["exit_code"]


def test_violation_well_fails():
    assert lapkit.run(CONFIGS / "violation_well.json")["exit_code"] == 2


def test_hs_demo_record():
    rec = lapkit.hs_demo({"radii": [4.0, 8.0]})
    assert {"phi", "rho", "k", "closure_error", "weighted_trend"} <= rec.keys()
    assert rec["closure_error"] <= 1e-6
    with pytest.raises(ValueError):
        lapkit.hs_demo({"bogus": 1})


def test_classify_oscillating_is_structured():
    v = lapkit.classify_oscillating(0.01, 1.0, 9.0, 3.0)
    assert v["verdict"] in ("pass", "fail", "inconclusive")
    assert v["lines"]
