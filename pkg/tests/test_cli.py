import csv
import json
import os

import pytest

from meekf.cli import main, read_config, CliError


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestComplexity:
    def test_scalar(self, capsys):
        code, out, _ = run_cli(["complexity", "1", "1", "1"], capsys)
        rows = list(csv.reader(out.splitlines()))
        assert code == 0 and rows[0] == ["filter", "flops"] and rows[1] == ["KF", "23"]
        assert len(rows) == 4

    def test_more_iterations_cost_more(self, capsys):
        _, a, _ = run_cli(["complexity", "4", "2", "1"], capsys)
        _, b, _ = run_cli(["complexity", "4", "2", "5"], capsys)
        assert int(b.splitlines()[3].split(",")[1]) > int(a.splitlines()[3].split(",")[1])

    @pytest.mark.parametrize("argv", [["complexity", "1", "x", "1"], ["complexity", "0", "1", "1"],
                                      ["complexity", "1", "1"]])
    def test_invalid(self, argv, capsys):
        code, _, err = run_cli(argv, capsys)
        assert code == 2 and err


class TestDiagnose:
    def test_large_sigma_satisfied(self, capsys):
        code, out, _ = run_cli(["diagnose", "--sigma", "1e6"], capsys)
        assert code == 0 and "satisfied       yes" in out

    def test_missing_sigma(self, capsys):
        code, _, err = run_cli(["diagnose"], capsys)
        assert code == 2 and "--sigma" in err

    def test_solve_bounds(self, capsys):
        code, out, _ = run_cli(["diagnose", "--sigma", "1"], capsys)
        rho = float(next(line.split()[1] for line in out.splitlines() if line.startswith("rho")))
        code, out, _ = run_cli(["diagnose", "--solve-bounds", "--alpha", "0.9", "--beta", str(2 * rho)], capsys)
        values = dict(line.split(None, 1) for line in out.splitlines())
        assert code == 0
        for key in ("sigma1", "sigma2"):
            assert 1e-3 <= float(values[key]) <= 1e6

    def test_beta_below_rho(self, capsys):
        code, _, err = run_cli(["diagnose", "--sigma", "1", "--beta", "0.01"], capsys)
        assert code == 2 and "rho" in err


class TestRun:
    def test_vehicle_outputs_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "res"
        code, text, _ = run_cli(["run", "vehicle", "--noise-case", "4", "--steps", "50", "--runs", "2",
                                 "--seed", "7", "--out", str(out), "--per-run"], capsys)
        assert code == 0 and "MEEKF" in text
        rows = list(csv.reader((out / "vehicle_summary.csv").open()))
        assert len(rows) == 1 + 3 * 4
        manifest = json.loads((out / "vehicle_manifest.json").read_text())
        assert manifest["seeds"] == [7, 8] and manifest["config"]["noise_case"] == 4
        assert manifest["version"] and (out / "vehicle_per_run.csv").exists()

    def test_invalid_noise_case_names_flag(self, capsys):
        code, _, err = run_cli(["run", "vehicle", "--noise-case", "9"], capsys)
        assert code == 2 and "--noise-case" in err

    def test_noise_case_rejected_for_sir(self, tmp_path, capsys):
        code, _, err = run_cli(["run", "sir", "--noise-case", "1", "--out", str(tmp_path)], capsys)
        assert code == 2 and "noise_case" in err

    def test_unknown_filter(self, capsys):
        code, _, err = run_cli(["run", "vehicle", "--filters", "KF,UKF"], capsys)
        assert code == 2 and "UKF" in err

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run_cli(["run", "sir", "--runs", "1", "--out", str(blocker / "sub")], capsys)
        assert code == 2 and "output directory" in err

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_read_only_output(self, tmp_path, capsys):
        ro = tmp_path / "ro"
        ro.mkdir()
        ro.chmod(0o500)
        code, _, _ = run_cli(["run", "sir", "--runs", "1", "--out", str(ro)], capsys)
        assert code == 2

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# settings\nsteps = 20\nruns = 1\nseed = 3  # inline\nsigma-mee = 2.5\n")
        out = tmp_path / "o"
        code, _, _ = run_cli(["run", "vehicle", "--config", str(cfg), "--runs", "2", "--out", str(out)], capsys)
        assert code == 0
        manifest = json.loads((out / "vehicle_manifest.json").read_text())
        assert manifest["config"]["steps"] == 20 and manifest["config"]["runs"] == 2
        assert manifest["config"]["sigmas"]["MEEKF"] == 2.5 and manifest["seeds"] == [3, 4]

    def test_config_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("steps = 10\nwindow = 3\n")
        code, _, err = run_cli(["run", "vehicle", "--config", str(cfg)], capsys)
        assert code == 2 and "window" in err

    def test_read_config_errors(self, tmp_path):
        bad = tmp_path / "b.cfg"
        bad.write_text("steps 10\n")
        with pytest.raises(CliError):
            read_config(bad)
        bad.write_text("steps = ten\n")
        with pytest.raises(CliError, match="steps"):
            read_config(bad)
        with pytest.raises(CliError):
            read_config(tmp_path / "missing.cfg")

    def test_missing_data_file(self, tmp_path, capsys):
        code, _, err = run_cli(["run", "sir", "--data", str(tmp_path / "none.csv"), "--out", str(tmp_path)],
                               capsys)
        assert code == 2 and "none.csv" in err

    def test_fusion_and_sir_sigma_flags(self, tmp_path, capsys):
        code, _, _ = run_cli(["run", "sir", "--runs", "1", "--sigma-mee", "12", "--out", str(tmp_path)], capsys)
        manifest = json.loads((tmp_path / "sir_manifest.json").read_text())
        assert code == 0 and manifest["config"]["sigmas"]["MEEEKF"] == 12.0
        code, _, _ = run_cli(["run", "fusion", "--runs", "1", "--steps", "20", "--sigma-mee-ekf", "3",
                              "--out", str(tmp_path)], capsys)
        manifest = json.loads((tmp_path / "fusion_manifest.json").read_text())
        assert code == 0 and manifest["config"]["sigmas"]["MEEEKF"] == 3.0
