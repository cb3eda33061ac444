"""
Result files: CSV time series and Newton traces, legacy-VTK snapshots, and the
flow-vector sweep over the yield surface.
"""
from pathlib import Path
from typing import List, Optional, Union
import logging
import numpy as np
from .fracdiff import FracConfig, normalized_frac_grad_packed
from .material import flow_normal_packed
from .mesh import Mesh
from .scenario import OutputConfig
from .tensors import MaterialParams, dev_packed, inner_packed, norm_packed, packed_size
from .type import RunRecord, Snapshot

VTK_TRIANGLE = 5
VTK_TETRA = 10
CSV_FORMAT = "%.17g"
FLOW_COLUMNS = ["theta", "s11", "s22", "n11", "n22", "d11", "d22", "angle_deg"]


def _write_csv(path: Path, columns: List[str], rows: np.ndarray) -> Path:
    rows = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(path, rows, fmt=CSV_FORMAT, delimiter=",", header=",".join(columns), comments="")
    return path


def read_csv(path: Union[str, Path]):
    """Header and rows of a CSV written by this module."""
    path = Path(path)
    with path.open() as handle:
        header = handle.readline().strip().split(",")
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, rows


def write_timeseries(record: RunRecord, path: Path) -> Path:
    """Columns t, load (traction norm), probe values sorted by name, max_eq_stress."""
    names = sorted(p.name for p in record.probes)
    rows = [
        [s.t, s.traction] + [s.measurements[n] for n in names] + [s.max_eq_stress]
        for s in record.steps
    ]
    return _write_csv(path, ["t", "load"] + names + ["max_eq_stress"], np.array(rows))


def write_newton(record: RunRecord, path: Path) -> Path:
    rows = [[s.step, k, r] for s in record.steps for k, r in enumerate(s.residuals)]
    return _write_csv(path, ["step", "iter", "residual"], np.array(rows).reshape(-1, 3))


def write_vtk(mesh: Mesh, snapshot: Snapshot, path: Path, title: str = "fracplast") -> Path:
    """Legacy ASCII unstructured grid: point displacement and cell arrays eq_stress, eps_p_norm, chi2."""
    dim = mesh.dim
    points = np.zeros((mesh.n_vertices, 3))
    points[:, :dim] = mesh.vertices
    disp = np.zeros((mesh.n_vertices, 3))
    disp[:, :dim] = np.asarray(snapshot.u).reshape(-1, dim)
    cell_type = VTK_TRIANGLE if dim == 2 else VTK_TETRA
    nc, nper = mesh.cells.shape

    cell_arrays = {
        "eq_stress": norm_packed(dev_packed(snapshot.sigma, dim), dim),
        "eps_p_norm": norm_packed(snapshot.eps_p, dim),
        "chi2": np.asarray(snapshot.chi2),
    }
    num = lambda x: repr(float(x))
    lines = [
        "# vtk DataFile Version 3.0",
        f"{title} step {snapshot.step} t={snapshot.t:g}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [" ".join(num(x) for x in p) for p in points]
    lines.append(f"CELLS {nc} {nc * (nper + 1)}")
    lines += [f"{nper} " + " ".join(str(int(v)) for v in c) for c in mesh.cells]
    lines.append(f"CELL_TYPES {nc}")
    lines += [str(cell_type)] * nc
    lines.append(f"POINT_DATA {mesh.n_vertices}")
    lines.append("VECTORS displacement double")
    lines += [" ".join(num(x) for x in d) for d in disp]
    lines.append(f"CELL_DATA {nc}")
    for name, values in cell_arrays.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines += [num(v) for v in values]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def emit_outputs(record: RunRecord, out_dir: Union[str, Path], outputs: Optional[OutputConfig] = None) -> List[Path]:
    outputs = outputs or OutputConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if outputs.timeseries:
        written.append(write_timeseries(record, out / "timeseries.csv"))
    if outputs.newton:
        written.append(write_newton(record, out / "newton.csv"))
    if outputs.vtk and record.mesh is not None:
        for snapshot in record.snapshots:
            written.append(write_vtk(record.mesh, snapshot, out / f"fields_{snapshot.step:05d}.vtk", record.scenario))
        if record.final is not None:
            written.append(write_vtk(record.mesh, record.final, out / "fields_final.vtk", record.scenario))
    for path in written:
        logging.info(f"Wrote {path}")
    return written


def flow_vector_sweep(
    params: MaterialParams, cfg: FracConfig, n_samples: int = 72, max_radius: float = 4.0
) -> np.ndarray:
    """
    Points on the yield surface f = 0 in the sigma11-sigma22 plane (chi = 0) with the
    classical normal and the normalised fractional gradient projected onto that plane,
    plus the angle between the full directions. Rays whose intersection lies beyond
    max_radius * Y0 (the open 2D surface) are skipped.
    """
    dim = cfg.dim
    nv = packed_size(dim)
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    directions = np.zeros((n_samples, nv))
    directions[:, 0] = np.cos(theta)
    directions[:, 1] = np.sin(theta)
    dev_norm = norm_packed(dev_packed(directions, dim), dim)
    with np.errstate(divide="ignore"):
        radius = np.where(dev_norm > 1e-12, params.y0 / np.maximum(dev_norm, 1e-300), np.inf)
    keep = radius <= max_radius * params.y0
    sigma = directions[keep] * radius[keep, None]
    g = dev_packed(sigma, dim)
    normal, _ = flow_normal_packed(g, params.y0, dim)
    dhat = normalized_frac_grad_packed(g, params.y0, cfg, dim)
    cosine = np.clip(inner_packed(normal, dhat, dim), -1.0, 1.0)
    return np.column_stack([
        theta[keep], sigma[:, 0], sigma[:, 1], normal[:, 0], normal[:, 1], dhat[:, 0], dhat[:, 1],
        np.degrees(np.arccos(cosine)),
    ])


def write_flow_sweep(rows: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return _write_csv(path, FLOW_COLUMNS, rows)
