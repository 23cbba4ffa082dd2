import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from admwex import commands, stability
from admwex.cli import main
from admwex.commands import (cmd_em_search, cmd_mabuchi, cmd_orthotoric, cmd_solve, cmd_stability, cmd_sweep,
                             cmd_yamabe)
from admwex.errors import EXIT_CONFIG, EXIT_DATA, EXIT_NEGATIVE, EXIT_OK, ConfigError
from admwex.jobs import load_job, parse_job
from admwex.settings import Settings

EXAMPLES = Path(__file__).resolve().parent.parent / "config" / "examples"

SMALL_ORTHOTORIC = """
[orthotoric]
m_values = [2, 3]
families = ["general", "basic", "inverse"]
trials = 5
"""


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("ADMWEX_OUT_DIR", "ADMWEX_THREADS", "ADMWEX_LOG_LEVEL"):
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)


def example(name: str):
    return load_job(EXAMPLES / f"{name}.toml")


class TestSolve:
    def test_einstein_maxwell_point(self):
        result = cmd_solve(example("negative-scal"))
        assert result.exit_code == EXIT_OK
        assert result.payload["A1"] == 0
        assert result.payload["A2"] == Fraction(34320, 401)
        assert result.payload["futaki_vanishes"]
        curve = result.curves["profile"]
        assert curve.header == ("z", "F", "Theta", "Scal_w")
        assert len(curve.rows) == 201
        assert curve.rows[0][1] == 0.0 and curve.rows[-1][1] == 0.0

    def test_negative_profile_exit_code(self):
        result = cmd_solve(example("negative-scal-unstable"))
        assert result.exit_code == EXIT_NEGATIVE
        assert result.payload["positivity"].witness_F < 0

    def test_small_x_is_positive(self):
        assert cmd_solve(example("small-x")).exit_code == EXIT_OK

    def test_needs_weight(self, job_toml):
        with pytest.raises(ConfigError):
            cmd_solve(parse_job(job_toml("[setup]\npreset = \"hirzebruch\"\npreset_args = { x = \"1/2\" }")))


class TestStability:
    def test_einstein_maxwell_point_is_stable(self):
        result = cmd_stability(example("negative-scal"))
        assert result.payload["verdict"] == "analytically-K-stable"
        assert result.payload["df_product"] == 0
        rows = result.curves["df"].rows
        assert len(rows) == 199
        assert all(-1 < z < 1 and df > 0 for z, df in rows)

    def test_unstable(self):
        result = cmd_stability(example("negative-scal-unstable"))
        assert result.payload["verdict"] == "unstable"
        assert any(df < 0 for _, df in result.curves["df"].rows)

    def test_profile_is_built_once(self, monkeypatch):
        calls = []
        original = stability.build_profile

        def counting(setup, w):
            calls.append(w)
            return original(setup, w)

        monkeypatch.setattr(commands, "build_profile", counting)
        monkeypatch.setattr(stability, "build_profile", counting)
        result = cmd_stability(example("negative-scal"))
        assert len(calls) == 1
        assert result.payload["verdict"] == "analytically-K-stable"


class TestEinsteinMaxwellSearch:
    def test_hirzebruch_cross_checks(self):
        result = cmd_em_search(example("hirzebruch-9-10"))
        payload = result.payload
        assert len(payload["roots"]) == 3
        assert payload["cross_checks"]["hirzebruch"]["matched"]
        assert len(payload["profile_coincidences"]) == 3
        assert [point["kind"] for point in payload["cross_checks"]["yamabe"]] == ["min", "max", "min"]

    def test_hirzebruch_exact_root(self):
        payload = cmd_em_search(example("hirzebruch-3-5")).payload
        assert [root["a_exact"] for root in payload["roots"]] == [Fraction(3)]
        assert payload["cross_checks"]["hirzebruch"]["a0"] == 3

    def test_hodge4(self):
        checks = cmd_em_search(example("hodge4")).payload["cross_checks"]["hodge4"]
        assert checks["a0"] == 2
        assert checks["a0_is_root"]
        factorization = checks["factorization"]
        assert factorization["holds"]
        assert factorization["constant"] == Fraction(-2500, 7743)
        assert factorization["samples"] and all(entry["holds"] for entry in factorization["samples"])

    def test_koiso_sakane_csck_class(self):
        result = cmd_em_search(example("koiso-sakane"))
        assert result.exit_code == EXIT_OK
        assert result.payload["roots"] == []
        assert result.payload["note"] == "CSCK class"
        checks = result.payload["cross_checks"]["koiso-sakane"]
        assert checks["q_at_plus_one"] == 192 * (1 - Fraction(3, 5)) ** 2 * (1 + Fraction(3, 5)) ** 2
        assert checks["q_at_minus_one"] == -192 * (1 + Fraction(3, 5)) ** 2 * (1 - Fraction(3, 5)) ** 2

    @pytest.mark.parametrize("name", ["einstein-m2", "einstein-m3"])
    def test_conformally_einstein(self, name):
        result = cmd_em_search(example(name))
        payload = result.payload
        assert result.exit_code == EXIT_OK
        assert payload["branches"]
        assert payload["degenerate"] == (len(payload["branches"]) == 1)
        assert 1 < payload["a_minus"] <= payload["a_plus"]
        assert all(abs(branch["A1"]) <= 1e-10 * max(1.0, abs(branch["A2"])) for branch in payload["branches"])

    def test_cross_check_preconditions(self, job_toml):
        job = parse_job(job_toml("[setup]\npreset = \"hodge4\"\npreset_args = { x = \"1/2\", s = 3 }\n"
                                 "[em_search]\ncross_checks = [\"hirzebruch\"]"))
        with pytest.raises(ConfigError):
            cmd_em_search(job)


class TestOtherCommands:
    def test_yamabe(self):
        result = cmd_yamabe(example("hirzebruch-9-10"))
        payload = result.payload
        assert payload["critical_points_match_a1_roots"]
        assert [point["kind"] for point in payload["critical_points"]] == ["min", "max", "min"]
        assert payload["aubin_schoen_bound"] == pytest.approx(8 * math.pi * math.sqrt(6))
        assert payload["below_bound"][1]
        assert result.curves["yamabe"].header == ("t", "f")
        assert len(result.curves["yamabe"].rows) == 200

    def test_orthotoric(self, job_toml):
        payload = cmd_orthotoric(parse_job(job_toml(SMALL_ORTHOTORIC))).payload
        assert len(payload["vandermonde"]) == 6
        assert all(entry["passed"] for entry in payload["vandermonde"])
        assert [entry["fit"]["is_affine"] for entry in payload["specs"]] == [True, True, True, False]

    def test_mabuchi(self):
        result = cmd_mabuchi(example("mabuchi"))
        values = {entry["eps"]: entry["M"] for entry in result.payload["values"]}
        assert abs(values[0.0]) <= 1e-14
        assert result.payload["gradient"]["relative_difference"] <= 1e-5
        assert len(result.curves["mabuchi"].rows) == 5

    def test_sweep_small_grid(self, job_toml):
        job = parse_job(job_toml("""
[setup]
preset = "koiso-sakane"
preset_args = { x1 = "1/2", x2 = "-1/4" }
[sweep]
axes = [{ start = "1/4", stop = "3/4", num = 3 }, { start = "-3/4", stop = "-1/4", num = 3 }]
exclude = [[0, 1, 1], [-1, 1, -1]]
"""))
        result = cmd_sweep(job, Settings(threads=1))
        assert result.payload["cells"] == 4
        assert result.payload["all_cells_have_positive_root"]
        rows = result.curves["sweep"].rows
        assert [row[:2] for row in rows] == [("1/4", "-1/2"), ("1/2", "-3/4"), ("1/2", "-1/4"), ("3/4", "-1/2")]
        assert all(row[2] >= row[3] >= 1 for row in rows)

    def test_sweep_needs_grid(self):
        with pytest.raises(ConfigError):
            cmd_sweep(example("negative-scal"), Settings(threads=1))


class TestCli:
    def test_report_and_curves(self, tmp_path):
        code = main(["solve", "--config", str(EXAMPLES / "negative-scal.toml"), "--out", str(tmp_path), "--csv"])
        assert code == EXIT_OK
        reports = list(tmp_path.glob("solve-*.json"))
        assert len(reports) == 1
        data = json.loads(reports[0].read_text())
        assert data["payload"]["A2"] == "34320/401"
        assert data["schema_version"] == 1
        curves = list(tmp_path.glob("solve-*-profile.csv"))
        assert len(curves) == 1
        assert curves[0].read_text().splitlines()[0] == "z,F,Theta,Scal_w"

    def test_mode_override(self, tmp_path):
        code = main(["solve", "--config", str(EXAMPLES / "negative-scal.toml"), "--mode", "float",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        data = json.loads(next(tmp_path.glob("solve-*.json")).read_text())
        assert data["provenance"]["mode"] == "float"

    def test_negative_exit_code(self, tmp_path):
        assert main(["solve", "--config", str(EXAMPLES / "negative-scal-unstable.toml"),
                     "--out", str(tmp_path)]) == EXIT_NEGATIVE

    def test_invalid_config(self, tmp_path):
        config = tmp_path / "bad.toml"
        config.write_text("schema_version = 1\n[setup]\npreset = \"hirzebruch\"\npreset_args = { x = \"1/2\" }\n"
                          "[weight]\na = 1\n")
        assert main(["solve", "--config", str(config)]) == EXIT_CONFIG
        assert main(["solve", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG

    def test_report_to_stdout(self, tmp_path, capsys):
        config = tmp_path / "orthotoric.toml"
        config.write_text("schema_version = 1\n" + SMALL_ORTHOTORIC)
        assert main(["orthotoric", "--config", str(config)]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["command"] == "orthotoric"
        assert "runtime_seconds" not in data["provenance"]

    def test_positivity_violation_exit_code(self, tmp_path):
        config = tmp_path / "mabuchi.toml"
        config.write_text((EXAMPLES / "mabuchi.toml").read_text().replace(
            "eps = [-0.02, -0.01, 0.0, 0.01, 0.02]", "eps = [0.0, 1.0]"))
        assert main(["mabuchi", "--config", str(config), "--out", str(tmp_path)]) == EXIT_DATA
        assert not list(tmp_path.glob("mabuchi-*.json"))

    def test_bad_log_level(self, tmp_path, monkeypatch):
        config = str(EXAMPLES / "negative-scal.toml")
        assert main(["solve", "--config", config, "--log-level", "chatty", "--out", str(tmp_path)]) == EXIT_CONFIG
        monkeypatch.setenv("ADMWEX_LOG_LEVEL", "chatty")
        assert main(["solve", "--config", config, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["solve", "--config", config, "--log-level", "debug", "--out", str(tmp_path)]) == EXIT_CONFIG

    @pytest.mark.parametrize("threads", ["0", "four"])
    def test_bad_thread_count(self, tmp_path, monkeypatch, threads):
        monkeypatch.setenv("ADMWEX_THREADS", threads)
        assert main(["solve", "--config", str(EXAMPLES / "negative-scal.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG
