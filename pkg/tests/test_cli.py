import numpy as np

from echometry.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


def test_trace_scan_command(tmp_path, capsys):
    code = main(["trace-scan", "--n", "4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "trace_scan.csv").exists()
    assert (tmp_path / "trace_scan_summary.txt").exists()
    assert "trace_scan" in capsys.readouterr().out


def test_qfi_sweep_single_scenario(tmp_path):
    code = main(
        ["qfi-sweep", "--scenario", "heatmap", "--n", "2", "--out", str(tmp_path),
         "--config", "/dev/null"]
    )
    assert code == EXIT_OK
    assert (tmp_path / "qfi_heatmap.csv").exists()


def test_config_file_round_trip(tmp_path):
    cfg = tmp_path / "scan.cfg"
    cfg.write_text(
        "# tiny deterministic scan\n"
        "scenario = trace_scan\n"
        "n = 11\n"
        "points = 64\n"
        "gt_max = 12.566370614359172\n"
    )
    out = tmp_path / "out"
    code = main(["trace-scan", "--config", str(cfg), "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "trace_scan.csv").read_text().strip().splitlines()
    assert len(lines) == 65
    # odd probe: unit trace only at the 2*pi multiples
    peaks = [float(line.split(",")[0]) for line in lines[1:] if float(line.split(",")[1]) >= 1 - 1e-9]
    np.testing.assert_allclose(peaks, [2 * np.pi, 4 * np.pi], atol=1e-12)


def test_unknown_config_key_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 4\nresolution = 12\n")
    code = main(["trace-scan", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "unknown config key" in capsys.readouterr().err


def test_malformed_config_line_is_config_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just a line without a key\n")
    assert main(["trace-scan", "--config", str(cfg)]) == EXIT_CONFIG


def test_scenario_mismatch_is_config_error(tmp_path):
    cfg = tmp_path / "mismatch.cfg"
    cfg.write_text("scenario = cfi_map\n")
    assert main(["trace-scan", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_bad_flag_exits_with_config_code(capsys):
    assert main(["trace-scan", "--interaction", "xy"]) == EXIT_CONFIG
    capsys.readouterr()


def test_missing_period_is_numerical_error(tmp_path, capsys):
    # the default XZ rates are incommensurable, so period mode cannot find a
    # reversal time and must exit with the numerical-contract code
    code = main(
        ["qfi-sweep", "--scenario", "theta0", "--interaction", "xz", "--mode", "period",
         "--n", "2", "--out", str(tmp_path)]
    )
    assert code == EXIT_NUMERICAL
    assert "contract" in capsys.readouterr().err


def test_validate_command(capsys):
    code = main(["validate", "--instances", "10", "--seed", "4"])
    assert code == EXIT_OK
    assert "passed=True" in capsys.readouterr().out


def test_dephasing_command_defaults(tmp_path):
    code = main(["dephasing", "--n", "4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = (tmp_path / "dephasing_scan.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 11
