import json
import math
import subprocess
import sys

import pytest

from cvsteer.cli import EXIT_CONFIG, EXIT_IO, EXIT_NO_ROOT, EXIT_OK, EXIT_TOLERANCE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEval:
    def test_chsh_at_quarter_pi(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--state", "psi", "--theta", "0.7854",
                               "--criteria", "chsh")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0].startswith("criterion,theta,value,violated,converged")
        cells = lines[1].split(",")
        assert cells[0] == "chsh"
        assert float(cells[2]) == pytest.approx(2.828427, abs=1e-5)
        assert cells[3] == "true"

    def test_product_point_both_criteria(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--state", "psi", "--theta", "0",
                               "--criteria", "reid,entropic")
        assert code == EXIT_OK
        rows = out.splitlines()[1:]
        assert [r.split(",")[0] for r in rows] == ["reid", "entropic"]
        assert all(r.split(",")[2] == "0" for r in rows)
        assert all(r.split(",")[3] == "false" for r in rows)

    def test_criteria_order_fixed_regardless_of_request(self, capsys):
        _, out1, _ = run_cli(capsys, "eval", "--theta", "0.4", "--criteria", "chsh,reid")
        _, out2, _ = run_cli(capsys, "eval", "--theta", "0.4", "--criteria", "reid,chsh")
        assert out1 == out2
        assert [r.split(",")[0] for r in out1.splitlines()[1:]] == ["reid", "chsh"]

    def test_theta_out_of_range_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--theta", "4.0")
        assert code == EXIT_CONFIG
        assert "theta" in err

    def test_theta_required(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--state", "psi")
        assert code == EXIT_CONFIG
        assert "theta" in err

    def test_unknown_criterion_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--theta", "0.5", "--criteria", "bell")
        assert code == EXIT_CONFIG
        assert "criteria" in err

    def test_json_round_trip(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--theta", "0.9", "--format", "json",
                               "--criteria", "reid,chsh")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["state"] == "psi"
        assert [r["criterion"] for r in payload["results"]] == ["reid", "chsh"]
        rec = payload["results"][0]
        rebuilt = 0.25 - rec["components"]["delta2_min_x2"] * rec["components"]["delta2_min_p2"]
        assert rec["value"] == pytest.approx(rebuilt, abs=1e-12)

    def test_unmet_tolerance_exits_3(self, capsys):
        code, out, _ = run_cli(capsys, "eval", "--theta", "1.1", "--criteria", "entropic",
                               "--panel-tol", "1e-15")
        assert code == EXIT_TOLERANCE
        assert "false" in out.splitlines()[1]  # converged column

    def test_allow_flagged_suppresses_exit_3(self, capsys):
        code, _, _ = run_cli(capsys, "eval", "--theta", "1.1", "--criteria", "entropic",
                             "--panel-tol", "1e-15", "--allow-flagged")
        assert code == EXIT_OK


class TestSweepCommand:
    def test_two_steps_two_rows(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--steps", "2", "--criteria", "chsh")
        assert code == EXIT_OK
        lines = out.strip().split("\n")
        assert lines[0] == "theta,i_chsh"
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "0"

    def test_header_contains_requested_columns_only(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--steps", "3", "--criteria", "reid,chsh")
        assert out.splitlines()[0] == "theta,i_reid,i_chsh"

    def test_rerun_byte_identical(self, tmp_path):
        args = ["sweep", "--steps", "9", "--criteria", "reid,chsh", "--state", "psi-prime"]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--output", str(p1)]) == EXIT_OK
        assert main(args + ["--output", str(p2)]) == EXIT_OK
        assert p1.read_bytes() == p2.read_bytes()

    def test_newline_discipline(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--steps", "3", "--criteria", "chsh",
                     "--output", str(out)]) == EXIT_OK
        data = out.read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")

    def test_ten_significant_digits(self, capsys):
        _, out, _ = run_cli(capsys, "sweep", "--steps", "5", "--criteria", "chsh")
        row = out.splitlines()[2]
        theta_cell, chsh_cell = row.split(",")
        assert theta_cell == "0.7853981634"
        assert chsh_cell == "2.828427125"

    def test_unwritable_output_exits_4(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--steps", "2", "--criteria", "chsh",
                               "--output", "/nonexistent-dir/x.csv")
        assert code == EXIT_IO
        assert "output error" in err

    def test_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--steps", "3", "--criteria", "chsh",
                               "--format", "json")
        payload = json.loads(out)
        assert len(payload["theta"]) == 3
        assert payload["i_chsh"][0] == 2.0

    def test_theta_window(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--steps", "3", "--criteria", "chsh",
                               "--theta-min", "0.5", "--theta-max", "1.0")
        rows = out.strip().splitlines()[1:]
        assert float(rows[0].split(",")[0]) == 0.5
        assert float(rows[-1].split(",")[0]) == 1.0


class TestCriticalCommand:
    def test_psi_reid_summary_and_file(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "critical", "--state", "psi", "--criteria", "reid")
        assert code == EXIT_OK
        assert "0.5980" in out and "2.5436" in out
        written = (tmp_path / "critical-psi.csv").read_text()
        assert written.startswith("criterion,kind,angle,")
        crossing_rows = [r for r in written.splitlines()[1:] if ",crossing," in r]
        assert len(crossing_rows) == 2
        # full-precision file round-trips through float()
        angle = float(crossing_rows[0].split(",")[2])
        assert angle == pytest.approx(0.5980031208297235, abs=5e-4)

    def test_chsh_no_crossing_exits_5(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, err = run_cli(capsys, "critical", "--state", "psi", "--criteria", "chsh")
        assert code == EXIT_NO_ROOT
        assert "chsh" in err
        assert "touch" in out  # the bound-touching angles are still reported

    def test_records_sorted_by_angle(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "critical", "--state", "psi",
                               "--criteria", "reid,entropic", "--format", "json")
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "critical-psi.json").read_text())
        angles = [r["angle"] for r in payload["criticals"]]
        assert angles == sorted(angles)


class TestReportCommand:
    def test_psi_prime_report(self, capsys):
        code, out, _ = run_cli(capsys, "report", "--state", "psi-prime")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["criteria_incomplete"] is True
        spans = payload["undetected_steering"]
        assert spans[0][0] == 0.0
        assert spans[-1][1] == pytest.approx(math.pi, abs=1e-12)

    def test_psi_report(self, capsys):
        code, out, _ = run_cli(capsys, "report", "--state", "psi")
        payload = json.loads(out)
        assert payload["criteria_incomplete"] is True
        assert payload["chsh_violation_region"] == [[0.0, math.pi / 2], [math.pi / 2, math.pi]]

    def test_report_stable_under_step_refinement(self, capsys):
        # Interval endpoints come from root-located angles, not the sweep grid, so
        # requesting a finer grid cannot move them
        _, out1, _ = run_cli(capsys, "report", "--state", "psi", "--steps", "315")
        _, out2, _ = run_cli(capsys, "report", "--state", "psi", "--steps", "629")
        assert out1 == out2


class TestConfigFile:
    def test_file_values_applied(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("state = psi-prime\ncriteria = chsh\ntheta = 0.7854\n")
        code, out, _ = run_cli(capsys, "eval", "--config", str(cfg))
        assert code == EXIT_OK
        assert out.splitlines()[1].startswith("chsh,")

    def test_cli_overrides_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("theta = 0.1\ncriteria = chsh\n")
        code, out, _ = run_cli(capsys, "eval", "--config", str(cfg), "--theta", "0.7854")
        value = float(out.splitlines()[1].split(",")[2])
        assert value == pytest.approx(2.828427, abs=1e-5)

    def test_comments_and_blank_lines(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# precision\n\ngh_order = 32\nL = 9.0\ncriteria = reid\ntheta = 0.3\n")
        code, out, _ = run_cli(capsys, "eval", "--config", str(cfg))
        assert code == EXIT_OK
        assert float(out.splitlines()[1].split(",")[2]) == pytest.approx(0.0494415570, abs=1e-8)

    def test_unknown_key_exits_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("volume = 11\n")
        code, _, err = run_cli(capsys, "eval", "--config", str(cfg), "--theta", "0.5")
        assert code == EXIT_CONFIG
        assert "volume" in err

    def test_missing_file_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "eval", "--config", "/no/such/file", "--theta", "0.5")
        assert code == EXIT_CONFIG

    def test_bad_value_names_field(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("steps = many\n")
        code, _, err = run_cli(capsys, "sweep", "--config", str(cfg))
        assert code == EXIT_CONFIG
        assert "steps" in err


class TestValidation:
    @pytest.mark.parametrize("argv,field", [
        (["sweep", "--steps", "1"], "steps"),
        (["sweep", "--gh-order", "1"], "gh_order"),
        (["sweep", "--half-width", "0"], "half_width"),
        (["sweep", "--panel-tol", "2.0"], "panel_tol"),
        (["critical", "--root-tol", "0"], "root_tol"),
        (["sweep", "--theta-min", "1.0", "--theta-max", "0.5"], "theta_m"),
    ])
    def test_field_named_in_error(self, capsys, argv, field):
        code, _, err = run_cli(capsys, *argv)
        assert code == EXIT_CONFIG
        assert field in err


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "cvsteer", "eval", "--theta", "0.7854", "--criteria", "chsh"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("chsh,")


def test_help_documents_exit_codes():
    proc = subprocess.run([sys.executable, "-m", "cvsteer", "--help"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    for token in ("exit codes", "2 invalid config", "3 tolerance", "4 unwritable", "5 no crossing"):
        assert token in proc.stdout
