import csv
import json

import jsonschema
import numpy as np
import pytest

from l2ext import cli, report
from l2ext.errors import L2ExtError, UnsupportedError

FAST = {"n_xy": 32, "n_t": 32}


def cfg_for(name, **solver):
    cfg = dict(cli.preset(name))
    cfg["solver"] = {**cfg.get("solver", {}), **FAST, **solver}
    return cfg


QUAD = {"name": "quad", "domain": {"kind": "unit_disc"},
        "weight": {"kind": "parametric", "family": "quadratic",
                   "params": {"alpha": 1.0, "center": 0.4}},
        "solver": {**FAST, "C": -4.0}}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["name", "m", "S", "S_err", "O", "margins", "chain_ok", "strict_ok",
                 "strict_status", "tol_chain", "config_hash", "details", "provenance"],
    "properties": {
        "m": {"type": "number"}, "S": {"type": "number"}, "O": {"type": "number"},
        "S_err": {"type": "number", "minimum": 0},
        "strict_status": {"enum": ["strict", "inconclusive", "not-applicable"]},
        "margins": {"type": "object", "required": ["S_minus_m", "O_minus_S"]},
    },
}


@pytest.fixture(scope="module")
def quad_report():
    return report.run(QUAD)


def test_pullback_equality():
    r = report.run(cfg_for("pullback_unit_disc"))
    assert r.m == pytest.approx(np.pi, rel=1e-10)
    assert r.S == pytest.approx(np.pi, rel=1e-10)
    assert r.O == pytest.approx(np.pi, rel=1e-15)
    assert r.chain_ok and r.strict_status == "not-applicable" and not r.strict_ok


def test_radial_report():
    r = report.run(cfg_for("radial_p1"))
    assert r.provenance == "RadialClosedForm"
    assert r.S == pytest.approx(0.878803, abs=1e-6)
    assert abs(r.S - r.m) < 1e-6
    assert r.chain_ok
    assert r.details["identity"]["rel_err"] <= 1e-8


def test_quadratic_strict(quad_report):
    r = quad_report
    assert r.provenance == "MASolution"
    assert r.m <= r.S + r.tol_chain
    assert r.S + r.S_err < np.pi
    assert r.strict_status == "strict" and r.strict_ok
    assert r.details["levi"]["min_eig"] == pytest.approx(1.0, abs=1e-5)
    assert r.details["harmonic_minorant_margin"] >= -5e-3


def test_strict_needs_levi(disc=None):
    # exp_harmonic is smooth; a non-smooth weight forced through MA is not-applicable
    cfg = cfg_for("radial_p1")
    cfg["pipeline"] = "ma"
    r = report.run(cfg)
    assert r.strict_status == "not-applicable"
    assert r.chain_ok


def test_strict_inconclusive_when_margin_small(quad_report):
    assert report._strict(None, 1.0, 0.1, 2.0) == "not-applicable"

    class Levi:
        min_eig = 1.0
    assert report._strict(Levi, 3.1, 0.05, np.pi) == "inconclusive"
    assert report._strict(Levi, 3.0, 0.05, np.pi) == "strict"


def test_both_pipeline_cross_check():
    cfg = cfg_for("radial_p1")
    cfg["pipeline"] = "both"
    r = report.run(cfg)
    cross = r.details["ma_cross_check"]
    assert abs(cross["S_minus_radial"]) < 0.01


def test_radial_pipeline_needs_radial_weight():
    cfg = dict(QUAD, pipeline="radial")
    with pytest.raises(UnsupportedError) as info:
        report.run(cfg)
    assert info.value.stage == "radial"


def test_stage_tag_on_error():
    cfg = dict(QUAD, bergman={"N0": 1, "N_max": 2, "tol": 1e-15})
    with pytest.raises(L2ExtError) as info:
        report.run(cfg)
    assert info.value.stage == "bergman"


def test_report_json_schema_and_determinism(quad_report):
    text = report.report_json(quad_report)
    data = json.loads(text)
    jsonschema.validate(data, REPORT_SCHEMA)
    assert "time" not in text
    again = report.report_json(report.run(QUAD))
    assert again == text


def test_sweep_monotone():
    sw = report.sweep_C(QUAD, [-4.0, -2.0, -8.0])
    assert [r.C for r in sw] == [-2.0, -4.0, -8.0]
    S = [r.S for r in sw]
    assert S[0] >= S[1] >= S[2]
    assert sw.monotone_ok and sw.lower_ok
    assert all(r.S >= r.m - r.tol_chain for r in sw)


def test_sweep_empty():
    sw = report.sweep_C(QUAD, [])
    assert len(sw) == 0 and list(sw) == []


def test_sweep_invalid_C_warns():
    cfg = {"name": "small", "domain": {"kind": "disc", "radius": 0.5},
           "weight": {"kind": "parametric", "family": "quadratic", "params": {"alpha": 1.0}},
           "solver": FAST}
    sw = report.sweep_C(cfg, [-0.0001])
    assert len(sw) == 0
    assert len(sw.warnings) == 1 and sw.warnings[0]["C"] == -0.0001


def test_emit_single_json(tmp_path, quad_report):
    files = report.emit(quad_report, ["json"], tmp_path)
    assert [f.name for f in files] == ["report.json"]
    jsonschema.validate(json.loads(files[0].read_text()), REPORT_SCHEMA)


def test_emit_sweep_csv(tmp_path):
    sw = report.sweep_C(QUAD, [-2.0, -4.0, -8.0])
    files = report.emit(sw, ["csv", "plots"], tmp_path)
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert set(report.SUMMARY_FIELDS) == set(rows[0])
    assert (tmp_path / "sweep_C.csv").read_text().count("\n") == 4
    pngs = [f for f in files if f.suffix == ".png"]
    assert (tmp_path / "sweep_C.png") in pngs and all(p.stat().st_size > 1000 for p in pngs)
    fib = (tmp_path / "fiber_quad_C=-4.csv").read_text().splitlines()
    assert fib[0] == "t,v" and len(fib) > 100


def test_emit_plots_and_field(tmp_path, quad_report):
    files = {f.name for f in report.emit(quad_report, ["csv", "plots", "field"], tmp_path)}
    assert {"fiber_quad.png", "ladder_quad.png", "bounds.png", "field_quad.bin",
            "field_quad.json", "ladder_quad.csv"} <= files


def test_emit_unwritable(tmp_path, quad_report):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(L2ExtError, match="blocker"):
        report.emit(quad_report, ["json"], blocker / "out")


def test_summary_nonfinite_to_null():
    assert report._clean({"a": float("inf"), "b": [np.nan, np.float64(1.5)]}) == \
        {"a": None, "b": [None, 1.5]}
