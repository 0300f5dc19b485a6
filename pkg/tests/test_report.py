"""Report assembly: schemas, determinism, selectors, control semantics."""

import json

import numpy as np
import pytest

from pnhier.dynamics import Trajectory
from pnhier.errors import RangeError
from pnhier.report import (CHECK_NAMES, CONTROL_FLOOR, TOL_SCALE,
                           catalog_report, hierarchy_report, probe_point,
                           render_report, summary_lines, trajectory_csv,
                           verify_report)
from pnhier.systems import make_system


def small_report(key="toda_moser", n=2, **kw):
    kw.setdefault("samples", 12)
    kw.setdefault("seed", 5)
    return verify_report(make_system(key, n), **kw)


def test_report_shape_and_row_schema():
    rep = small_report()
    assert sorted(rep) == ["all_pass", "checks", "failed", "meta", "spectrum"]
    assert rep["all_pass"] is True
    assert rep["failed"] == []
    for row in rep["checks"]:
        assert row["name"] in CHECK_NAMES
        if row.get("status") == "not-applicable":
            assert row["reason"]
            continue
        assert list(row)[:3] == ["name", "identity", "samples"]
        assert row["max_abs_defect"] >= row["mean_abs_defect"] >= 0.0
        if row["name"].startswith("control-"):
            assert row["floor"] == CONTROL_FLOOR
            assert row["pass"] == (row["max_abs_defect"] > row["floor"])
        else:
            assert row["pass"] == (row["max_abs_defect"] < row["tol"])


def test_meta_records_the_configuration():
    rep = small_report(tol=1e-9, depth=3, threads=2)
    meta = rep["meta"]
    assert meta["command"] == "verify"
    assert meta["system"] == "toda-moser"
    assert meta["tol"] == 1e-9
    assert meta["depth"] == 3
    assert meta["threads"] == 2
    assert meta["samples"] == 12 and meta["seed"] == 5
    assert len(meta["box"]["lo"]) == meta["m"]


def test_rendering_is_deterministic():
    a = render_report(small_report())
    b = render_report(small_report())
    assert a == b
    assert a.endswith("\n")
    json.loads(a)  # valid JSON
    lines = summary_lines(small_report())
    assert any("PASS" in ln for ln in lines)


def test_selectors_filter_and_validate():
    rep = small_report(checks=["lenard"])
    run = [r["name"] for r in rep["checks"]]
    assert run == ["lenard-ladder"]
    rep = small_report(checks=["oevel"])
    assert all(r["name"].startswith("oevel") for r in rep["checks"])
    rep = small_report(checks=["control-torsion", "torsion"])
    assert sorted(r["name"] for r in rep["checks"]) == [
        "control-torsion", "torsion"]
    with pytest.raises(RangeError):
        small_report(checks=["no-such-check"])


def test_config_validation():
    with pytest.raises(RangeError):
        small_report(tol=0.0)
    with pytest.raises(RangeError):
        small_report(depth=0)
    with pytest.raises(RangeError):
        small_report(samples=0)


def test_controls_fail_below_their_floor_by_design():
    rep = small_report(checks=["control"])
    for row in rep["checks"]:
        assert row["max_abs_defect"] > 1e-4  # the broken operator is visible
        assert row["pass"] is True


def test_commuting_flows_tolerance_is_scaled():
    rep = small_report(tol=1e-8)
    by_name = {r["name"]: r for r in rep["checks"]}
    scale = TOL_SCALE["commuting-flows"]
    assert by_name["commuting-flows"]["tol"] == 1e-8 * scale
    assert by_name["torsion"]["tol"] == 1e-8


def test_not_applicable_rows_carry_reasons():
    rep = small_report("an_toda", 2)
    na = {r["name"]: r["reason"] for r in rep["checks"]
          if r.get("status") == "not-applicable"}
    assert na  # the lattice chart carries no conformal symmetry
    for reason in na.values():
        assert "extras" in reason
    # not-applicable is not failure
    assert rep["all_pass"] is True
    assert all(name not in rep["failed"] for name in na)


def test_spectrum_block():
    rep = small_report()
    spec = rep["spectrum"]
    assert spec["paired_all"] is True
    assert spec["independent_all"] is True
    assert spec["max_imag"] < 1e-10
    assert spec["distinct_min"] == 2


def test_failure_is_reported_not_raised():
    rep = small_report(tol=1e-16)
    assert rep["all_pass"] is False
    assert "torsion" in rep["failed"] or len(rep["failed"]) > 0
    lines = summary_lines(rep)
    assert any("FAIL" in ln for ln in lines)


def test_probe_point_and_hierarchy_report():
    sys = make_system("toda_moser", 2)
    assert np.array_equal(probe_point(sys), [1.0, 2.0, 1.0, 2.0])
    rep = hierarchy_report(sys, depth=4)
    table = {row["index"]: row["value"] for row in rep["table"]}
    assert np.isclose(table[-2], -0.625)
    assert np.isclose(table[-1], -1.5)
    assert np.isclose(table[0], np.log(2.0))
    assert np.isclose(table[1], 3.0)
    assert np.isclose(table[2], 2.5)
    assert np.isclose(table[3], 3.0)
    assert np.isclose(table[4], 4.25)
    assert max(abs(r["defect"]) for r in rep["cotangent_defects"]) < 1e-10
    inv = np.asarray(rep["involution_matrix"])
    assert inv.shape[0] == inv.shape[1] == len(rep["indices"])
    assert np.max(inv) < 1e-8


def test_catalog_report_lists_every_system():
    cat = catalog_report(n=2)
    assert [e["system"] for e in cat["systems"]] == [
        "harmonic", "calogero", "toda-moser", "cn-toda", "an-toda"]
    for entry in cat["systems"]:
        assert entry["m"] == len(entry["labels"])
        assert entry["description"]
        assert entry["closed_forms"] == sorted(entry["closed_forms"])


def test_trajectory_csv_layout():
    traj = Trajectory([0.0, 0.5], [[1.0, 2.0], [3.0, 4.0]])
    text = trajectory_csv(traj, ["q", "p"], {"h_0": np.array([5.0, 6.0])})
    lines = text.strip().split("\n")
    assert lines[0] == "t,q,p,h_0"
    assert lines[1] == "0.0,1.0,2.0,5.0"
    assert lines[2] == "0.5,3.0,4.0,6.0"
