import pytest

import cli
from cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, build_parser, main
from errors import GeometryError


def write(tmp_path, text, name="scenario.env"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


QUICK = "duration_s=60\nreplications=2\ndensity_per_km2=0.002\n"


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_CONFIG
    assert "usage" in capsys.readouterr().out


def test_toa_table(capsys):
    assert main(["toa"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "TIME ON AIR" in out
    assert "71.94" in out
    assert "1777" in out


def test_toa_bad_payload(capsys):
    assert main(["toa", "--payload", "300"]) == EXIT_CONFIG
    assert "❌" in capsys.readouterr().out


def test_run_scenario(tmp_path, capsys):
    assert main(["run", write(tmp_path, QUICK)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PRR" in out
    assert "Devices" in out


def test_run_with_overrides_only(capsys):
    assert main(["run", "--set", "duration_s=30", "--set", "replications=1", "--set", "density_per_km2=0.001"]) == EXIT_OK


def test_run_config_error(tmp_path, capsys):
    assert main(["run", write(tmp_path, "beamwidth_deg=200\n")]) == EXIT_CONFIG
    out = capsys.readouterr().out
    assert "beamwidth must be in (0, 180)" in out
    assert "line 1" in out


def test_run_footprint_beyond_horizon(capsys):
    args = ["run", "--set", "altitude_km=700", "--set", "beamwidth_deg=170", "--set", "replications=1"]
    assert main(args) == EXIT_CONFIG
    out = capsys.readouterr().out
    assert "❌" in out
    assert "footprint exceeds the horizon" in out


def test_simulation_errors_exit_with_config_code(monkeypatch, capsys):
    def fail(scenario):
        raise GeometryError("offset beyond the horizon")

    monkeypatch.setattr(cli, "replicate", fail)
    assert main(["run", "--set", "replications=1"]) == EXIT_CONFIG
    assert "❌ offset beyond the horizon" in capsys.readouterr().out


def test_run_rejects_sweep_file(tmp_path, capsys):
    assert main(["run", write(tmp_path, "altitudes_km=200,300\n")]) == EXIT_CONFIG


def test_sweep_dry_run(tmp_path, capsys):
    path = write(tmp_path, "altitudes_km=200,300,400,500,600,700\nbeamwidths_deg=5,10,15\n")
    assert main(["sweep", path, "--dry-run"]) == EXIT_OK
    assert "18 points" in capsys.readouterr().out


def test_sweep_writes_and_refuses_overwrite(tmp_path, capsys):
    path = write(tmp_path, QUICK + "altitudes_km=300,500\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", path, "--output", str(out)]) == EXIT_OK
    first = out.read_bytes()
    assert first.startswith(b"altitude_km,beamwidth_deg,total_gain_dbi,period_s,row_type")
    assert main(["sweep", path, "--output", str(out)]) == EXIT_CONFIG
    assert main(["sweep", path, "--output", str(out), "--force"]) == EXIT_OK
    assert out.read_bytes() == first


def test_sweep_partial_failure(tmp_path, capsys):
    path = write(tmp_path, QUICK + "altitudes_km=-100,500\n")
    assert main(["sweep", path]) == EXIT_PARTIAL
    assert "failed" in capsys.readouterr().out


def test_presets_dry_run(capsys):
    assert main(["presets", "figures", "--dry-run"]) == EXIT_OK
    assert "48 points" in capsys.readouterr().out


def test_presets_coverage(tmp_path, capsys):
    args = ["presets", "coverage", "--out-dir", str(tmp_path), "--set", "duration_s=30", "--set", "replications=1",
            "--set", "density_per_km2=0.001"]
    assert main(args) == EXIT_OK
    assert (tmp_path / "coverage.csv").exists()
    assert main(args) == EXIT_CONFIG
    assert main(args + ["--force"]) == EXIT_OK


def test_presets_refuse_existing_files_before_running(tmp_path, monkeypatch, capsys):
    (tmp_path / "prr_period.csv").write_text("kept\n")

    def never(spec, workers=1):
        raise AssertionError("sweep ran before the overwrite check")

    monkeypatch.setattr(cli, "run_sweep", never)
    assert main(["presets", "period", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "prr_period.csv already exist" in capsys.readouterr().out
    assert (tmp_path / "prr_period.csv").read_text() == "kept\n"


def test_parser_choices():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["presets", "figure9"])
    args = parser.parse_args(["sweep", "x.env", "--workers", "4", "--format", "json"])
    assert args.workers == 4
    assert args.format == "json"


@pytest.mark.slow
def test_verify(capsys):
    assert main(["verify", "--traces", "200"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "agree on every packet" in out
