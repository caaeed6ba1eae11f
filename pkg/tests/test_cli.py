from __future__ import annotations

import json
import math
import subprocess
import sys

import pytest

from gamma2.cli import main

from conftest import CW_QUARTIC


def _json(path):
    return json.loads(path.read_text())


def test_constants_quartic(tmp_path, capsys):
    assert main(["constants", "--set", "potential.name=quartic", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "constants.json")
    assert rec["c_W"]["value"] == pytest.approx(CW_QUARTIC, abs=1e-12)
    assert rec["c_sym"]["value"] == 0.0
    assert rec["F2"]["second_order"]["value"] == pytest.approx(-1 / 9, abs=1e-12)
    for key in ("a", "b", "c", "q", "ell", "c_W", "c_sym", "tau_u", "Lambda_u"):
        assert {"value", "error", "provenance"} <= set(rec[key])
    assert "timestamp" in rec


def test_constants_subquadratic_zero(tmp_path):
    assert main(["constants", "--set", "potential.name=subquadratic", "--set", "potential.q=0.5",
                 "--out", str(tmp_path)]) == 0
    assert _json(tmp_path / "constants.json")["F2"]["second_order"]["value"] == 0.0


def test_constants_with_weight(tmp_path):
    assert main(["constants", "--scenario", "skew-weight-quartic", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "constants.json")
    assert rec["weighted_1d"]["second_order"]["value"] == pytest.approx(-2 / 9, abs=1e-12)
    assert rec["lambda0"]["value"] == pytest.approx(CW_QUARTIC, rel=1e-12)


def test_missing_potential_exit_code(tmp_path, capsys):
    assert main(["constants", "--out", str(tmp_path)]) == 2
    assert "potential.name" in capsys.readouterr().err


def test_bad_set_syntax(tmp_path):
    assert main(["constants", "--set", "oops", "--out", str(tmp_path)]) == 2


def test_numeric_error_exit_code(tmp_path, capsys):
    # the kink of the square profile at 1/pi cannot be pinned
    code = main(["iso", "--set", f"iso.v_m={1 / math.pi!r}", "--out", str(tmp_path)])
    assert code == 3
    assert "KinkAtMass" in capsys.readouterr().err


def test_profile_and_iso(tmp_path):
    assert main(["profile", "--set", "potential.name=quartic", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "profile.csv").read_text().startswith("t,z,dz\n")
    assert _json(tmp_path / "profile.json")["residual"]["value"] < 1e-9
    assert main(["iso", "--set", "iso.v_m=0.2", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "iso.json")
    assert rec["eta_prime_at_pin"]["value"] == pytest.approx(math.pi / 2)
    assert (tmp_path / "domain.csv").exists()


def test_rearrange(tmp_path):
    assert main(["rearrange", "--seed", "4", "--set", "rearrange.grid=48", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "rearrange.json")
    assert rec["equimeasurability_defect"]["value"] <= rec["equimeasurability_defect"]["error"]


def test_minimize(tmp_path):
    assert main(["minimize", "--scenario", "skew-weight-quartic", "--eps-list", "0.02",
                 "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "minimize.json")
    assert rec["el_residual"]["value"] < 1e-8
    assert rec["energy"]["value"] <= rec["recovery_energy"]["value"]


def test_verify_skew_weight(tmp_path):
    assert main(["verify", "--scenario", "skew-weight-quartic", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "report.json")
    assert rec["passed"] and rec["relative_gap"] < 0.02
    assert (tmp_path / "report.csv").read_text().startswith("eps,E2,prediction\n")


def test_verify_threshold_failure(tmp_path):
    assert main(["verify", "--scenario", "skew-weight-quartic", "--threshold", "1e-9",
                 "--out", str(tmp_path)]) == 1


def test_verify_coarse_grid_reports_errors(tmp_path, capsys):
    assert main(["verify", "--scenario", "coarse-grid", "--out", str(tmp_path)]) == 1
    rec = _json(tmp_path / "report.json")
    assert len(rec["errors"]) == 3
    assert all(e.startswith("UnresolvedEpsilon") for e in rec["errors"])


def test_verify_subquadratic_null(tmp_path):
    assert main(["verify", "--scenario", "subquadratic-null", "--out", str(tmp_path)]) == 0
    rec = _json(tmp_path / "report.json")
    assert abs(rec["extrapolated_limit"]["value"]) < 1e-2
    assert rec["gap_kind"] == "absolute"


def test_verify_bad_eps_list(tmp_path):
    assert main(["verify", "--scenario", "skew-weight-quartic", "--eps-list", "0.01,0.1,0.001",
                 "--out", str(tmp_path)]) == 2


def test_suite_deterministic(tmp_path):
    args = ["suite", "--seed", "9", "--set", "suite.fields=3", "--set", "suite.grid=32"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = _json(tmp_path / "a" / "suite.json")
    b = _json(tmp_path / "b" / "suite.json")
    a.pop("timestamp")
    b.pop("timestamp")
    assert a == b
    assert a["violations"]["constant_pairs"] == 0


def test_console_script_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "gamma2.cli", "constants", "--scenario",
                          "skew-weight-quartic", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "c_W" in out.stdout
