import numpy as np
import pytest
from fracplast.output import (
    FLOW_COLUMNS, emit_outputs, flow_vector_sweep, read_csv, write_flow_sweep, write_timeseries
)
from fracplast.runner import run_simulation
from fracplast.scenario import OutputConfig, Scenario
from fracplast.tensors import dev_packed, norm_packed, packed_size


def test_zero_load_run_writes_zero_series(tmp_path, small_scenario_data):
    record = run_simulation(Scenario.from_data(small_scenario_data(n_steps=6, peak_scale=0.0)))
    header, rows = read_csv(write_timeseries(record, tmp_path / "timeseries.csv"))
    assert header == ["t", "load", "d_x", "d_y", "max_eq_stress"]
    assert rows.shape == (7, 5)
    assert np.all(rows[:, 2:] == 0.0)
    assert rows[:, 0].tolist() == [200.0 * k / 6 for k in range(7)]


def test_csv_values_read_back_exactly(tmp_path, small_scenario_data):
    record = run_simulation(Scenario.from_data(small_scenario_data(n_steps=4, peak_scale=0.1)))
    paths = emit_outputs(record, tmp_path / "out")
    assert [p.name for p in paths] == ["timeseries.csv", "newton.csv"]
    _, rows = read_csv(paths[0])
    assert rows[:, 1].tolist() == [s.traction for s in record.steps]
    assert rows[:, 2].tolist() == record.series("d_x")
    assert rows[:, 3].tolist() == record.series("d_y")
    assert rows[:, 4].tolist() == [s.max_eq_stress for s in record.steps]
    header, newton = read_csv(paths[1])
    assert header == ["step", "iter", "residual"]
    assert len(newton) == sum(len(s.residuals) for s in record.steps)
    assert newton[:, 2].tolist() == [r for s in record.steps for r in s.residuals]


def test_vtk_snapshots(tmp_path, small_scenario_data):
    data = small_scenario_data(n_steps=4, peak_scale=0.1)
    data["outputs"] = {"vtk": True, "vtk_every": 2}
    scenario = Scenario.from_data(data)
    record = run_simulation(scenario)
    paths = emit_outputs(record, tmp_path, scenario.outputs)
    names = [p.name for p in paths]
    assert names[2:] == ["fields_00002.vtk", "fields_00004.vtk", "fields_final.vtk"]

    text = (tmp_path / "fields_final.vtk").read_text().splitlines()
    mesh = record.mesh
    assert text[0] == "# vtk DataFile Version 3.0"
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert f"POINTS {mesh.n_vertices} double" in text
    assert f"CELLS {mesh.n_cells} {4 * mesh.n_cells}" in text
    assert text.count("5") >= mesh.n_cells
    assert f"CELL_DATA {mesh.n_cells}" in text
    for name in ("eq_stress", "eps_p_norm", "chi2"):
        assert f"SCALARS {name} double 1" in text


def test_vtk_disabled_by_default(tmp_path, small_scenario_data):
    record = run_simulation(Scenario.from_data(small_scenario_data(n_steps=2, peak_scale=0.1)))
    paths = emit_outputs(record, tmp_path, OutputConfig(newton=False))
    assert [p.name for p in paths] == ["timeseries.csv"]
    assert not list(tmp_path.glob("*.vtk"))


def _radius(theta: float, y0: float, dim: int) -> float:
    direction = np.zeros(packed_size(dim))
    direction[:2] = np.cos(theta), np.sin(theta)
    return y0 / float(norm_packed(dev_packed(direction, dim), dim))


@pytest.mark.parametrize("case", ["bar", "block"])
def test_flow_sweep_normals_are_normal_to_the_surface(case, request):
    params = request.getfixturevalue(f"{case}_params")
    cfg = request.getfixturevalue(f"{case}_frac")
    rows = flow_vector_sweep(params, cfg, n_samples=36)
    assert len(rows) > 0
    h = 1e-6
    for theta, s11, s22, n11, n22, *_ in rows:
        r_plus = _radius(theta + h, params.y0, cfg.dim)
        r_minus = _radius(theta - h, params.y0, cfg.dim)
        t11 = (r_plus * np.cos(theta + h) - r_minus * np.cos(theta - h)) / (2 * h)
        t22 = (r_plus * np.sin(theta + h) - r_minus * np.sin(theta - h)) / (2 * h)
        assert abs(n11 * t11 + n22 * t22) <= 1e-6 * np.hypot(t11, t22)
        assert np.hypot(s11, s22) <= 4.0 * params.y0


def test_flow_sweep_skips_the_open_directions(bar_params, bar_frac, block_params, block_frac):
    planar = flow_vector_sweep(bar_params, bar_frac, n_samples=72)
    assert len(planar) < 72
    assert not np.any(np.isclose(planar[:, 0], np.pi / 4))
    assert len(flow_vector_sweep(block_params, block_frac, n_samples=72)) == 72


def test_flow_sweep_angles(tmp_path, bar_params, bar_frac):
    rows = flow_vector_sweep(bar_params, bar_frac)
    assert np.all(rows[:, -1] < 90.0)
    near_classical = flow_vector_sweep(bar_params, bar_frac.with_alpha(0.99))
    assert near_classical[:, -1].max() <= rows[:, -1].max()

    header, back = read_csv(write_flow_sweep(rows, tmp_path / "sweep" / "flow_sweep.csv"))
    assert header == FLOW_COLUMNS
    assert back.shape == rows.shape


def test_load_column_is_the_traction(tmp_path, small_scenario_data):
    record = run_simulation(Scenario.from_data(small_scenario_data(n_steps=4, peak_scale=0.1)))
    _, rows = read_csv(write_timeseries(record, tmp_path / "timeseries.csv"))
    assert rows[:, 1].tolist() == pytest.approx([0.0, 750.0, 1500.0, 750.0, 0.0])
    assert [s.load_factor for s in record.steps] == [0.0, 0.5, 1.0, 0.5, 0.0]
