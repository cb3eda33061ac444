import json
import pytest
from fracplast.cli import EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, build_parser, main
from fracplast.errors import DimensionMismatchError
from fracplast.mesh import notched_bar, write_mesh
from fracplast.output import read_csv
from fracplast.scenario import preset_data
from fracplast.util import OUTPUT_DIR_ENV


def _small_file(tmp_path, **overrides):
    data = {"base": "notched2d", "geometry": {"refinement": 1}, "time": {"n_steps": 4}}
    data.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_presets(capsys):
    assert main(["presets"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "notched2d" in printed
    assert "narrow-diagonal" in printed


def test_check(capsys):
    assert main(["check", "notched2d"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "Scenario 'notched2d': 2D" in printed
    assert "info:" in printed


def test_missing_scenario_is_a_validation_failure(tmp_path):
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_VALIDATION
    assert main(["run", "notched2d", "--delta-scale", "100", "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_run_writes_timeseries(tmp_path):
    out = tmp_path / "out"
    code = main(["-q", "run", "notched2d", "--steps", "4", "--peak-scale", "0.1", "--refinement", "1", "--out", str(out)])
    assert code == EXIT_OK
    header, rows = read_csv(out / "timeseries.csv")
    assert header == ["t", "load", "d_x", "d_y", "max_eq_stress"]
    assert rows.shape == (5, 5)
    assert (out / "newton.csv").exists()


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env-out"))
    assert main(["-q", "run", _small_file(tmp_path), "--peak-scale", "0.1"]) == EXIT_OK
    assert (tmp_path / "env-out" / "timeseries.csv").exists()


def test_solver_failure_exit_code(tmp_path):
    path = _small_file(tmp_path, newton={"tol_residual": 1e-30, "max_iter": 1})
    assert main(["-q", "run", path, "--peak-scale", "0.1", "--out", str(tmp_path)]) == EXIT_SOLVER


def test_sweep_flow(tmp_path):
    assert main(["-q", "sweep-flow", "notched2d", "--alpha", "0.8", "--samples", "24", "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "flow_sweep.csv")
    assert header[-1] == "angle_deg"
    assert 0 < len(rows) < 24


def test_verbosity_flags_are_exclusive():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["-v", "-q", "presets"])


def test_preset_data_is_a_fresh_copy():
    data = preset_data("notched2d")
    data["material"]["Y0"] = 1.0
    assert preset_data("notched2d")["material"]["Y0"] == 10000.0


def test_relative_mesh_path_is_taken_from_working_directory(tmp_path, monkeypatch, capsys):
    write_mesh(notched_bar(1), tmp_path / "bar.mesh")
    scenarios = tmp_path / "scenarios"
    scenarios.mkdir()
    path = _small_file(scenarios)
    monkeypatch.chdir(tmp_path)
    assert main(["-q", "run", path, "--mesh", "bar.mesh", "--peak-scale", "0.1", "--out", "out"]) == EXIT_OK
    assert (tmp_path / "out" / "timeseries.csv").exists()
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--help"])
    assert "working directory" in " ".join(capsys.readouterr().out.split())


def test_dimension_mismatch_is_a_validation_failure(tmp_path, monkeypatch):
    def mismatch(*args, **kwargs):
        raise DimensionMismatchError("delta is 3x3 but the state has dimension 2")

    monkeypatch.setattr("fracplast.cli.flow_vector_sweep", mismatch)
    assert main(["-q", "sweep-flow", "notched2d", "--out", str(tmp_path)]) == EXIT_VALIDATION
