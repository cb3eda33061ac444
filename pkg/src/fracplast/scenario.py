"""
Scenario configuration, the preset registry and scenario loading.

A scenario file is a JSON object. If it names a preset under "base", its keys
are deep-merged over that preset before validation.
"""
import functools, inspect
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Union
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from .errors import ScenarioError
from .fracdiff import FracConfig
from .mesh import Mesh, box, notched_bar, read_mesh
from .solver import LoadRamp, NewtonConfig, Probe, TimeGrid
from .tensors import Diagnostic, MaterialParams
from .util import Util

DELTA_PRESETS: Dict[str, List[List[float]]] = {
    "bar": [[100.0, 100.0], [100.0, 200.0]],
    "narrow-diagonal": [[1.0, 100.0], [100.0, 1000.0]],
    "isotropic": [[5000.0, 5000.0], [5000.0, 5000.0]],
    "swapped": [[200.0, 100.0], [100.0, 100.0]],
    "block": [[100.0, 100.0, 100.0], [100.0, 500.0, 100.0], [100.0, 100.0, 900.0]],
}

_PRESETS: Dict[str, Callable[[], Dict[str, Any]]] = {}


def scenario_preset(func):
    """
    Register a function returning a scenario dictionary as a named preset.
    The preset name is the function name with underscores turned into dashes;
    the docstring becomes its description.
    """

    @functools.wraps(func)
    def wrapper() -> Dict[str, Any]:
        data = func()
        data.setdefault("name", wrapper.preset_name)
        return data

    wrapper.preset_name = func.__name__.replace("_", "-")
    wrapper.description = inspect.getdoc(func) or ""
    _PRESETS[wrapper.preset_name] = wrapper
    return wrapper


def list_presets() -> Dict[str, str]:
    return {name: fn.description for name, fn in sorted(_PRESETS.items())}


def preset_data(name: str) -> Dict[str, Any]:
    if name not in _PRESETS:
        raise ScenarioError(f"Unknown preset '{name}'", [f"available presets: {', '.join(sorted(_PRESETS))}"])
    return _PRESETS[name]()


class GeometryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["notched2d", "box", "mesh"] = "notched2d"
    refinement: int = Field(default=2, ge=1)
    lengths: Optional[List[float]] = None
    divisions: Optional[List[int]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _complete(self) -> "GeometryConfig":
        if self.kind == "mesh" and not self.path:
            raise ValueError("geometry kind 'mesh' needs a path")
        if self.kind == "box":
            if not self.lengths or not self.divisions or len(self.lengths) != len(self.divisions):
                raise ValueError("geometry kind 'box' needs lengths and divisions of equal length")
            if len(self.lengths) not in (2, 3):
                raise ValueError("a box has 2 or 3 lengths")
        return self

    @property
    def dim(self) -> Optional[int]:
        if self.kind == "notched2d":
            return 2
        if self.kind == "box":
            return len(self.lengths)
        return None

    def build(self, base_dir: Optional[Path] = None) -> Mesh:
        if self.kind == "notched2d":
            return notched_bar(self.refinement)
        if self.kind == "box":
            return box(self.lengths, self.divisions)
        path = Path(self.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_mesh(path)


class RampConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    peak: List[float]
    label: str = "right"


class BoundaryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dirichlet: List[str] = Field(default_factory=lambda: ["left"])


class TimeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_steps: int = Field(default=200, ge=1)
    t_end: float = Field(default=200.0, gt=0.0)
    t_values: Optional[List[float]] = None

    def grid(self) -> TimeGrid:
        if self.t_values is not None:
            return TimeGrid(t_values=self.t_values)
        return TimeGrid.uniform(self.n_steps, self.t_end)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    timeseries: bool = True
    newton: bool = True
    vtk: bool = False
    vtk_every: int = Field(default=0, ge=0)
    flow_sweep: bool = False
    flow_samples: int = Field(default=72, ge=4)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    base: Optional[str] = None
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    material: MaterialParams
    frac: FracConfig
    ramp: RampConfig
    boundary: BoundaryConfig = Field(default_factory=BoundaryConfig)
    time: TimeConfig = Field(default_factory=TimeConfig)
    probes: List[Probe] = Field(default_factory=list)
    newton: NewtonConfig = Field(default_factory=NewtonConfig)
    material_update: Literal["explicit", "implicit", "classical"] = "explicit"
    implicit_tol: float = Field(default=1e-6, gt=0.0)
    allow_large_delta: bool = False
    outputs: OutputConfig = Field(default_factory=OutputConfig)
    source_dir: Optional[str] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _consistent(self) -> "Scenario":
        limit = 0.5 * self.material.y0
        largest = max(max(row) for row in self.frac.delta)
        if largest > limit and not self.allow_large_delta:
            raise ValueError(
                f"delta entry {largest:g} exceeds Y0/2 = {limit:g}, outside the range where the fractional "
                "gradient is known to be well defined; set allow_large_delta to override"
            )
        dim = self.geometry.dim
        if dim is not None:
            if self.frac.dim != dim:
                raise ValueError(f"frac.delta is {self.frac.dim}x{self.frac.dim} but the geometry is {dim}D")
            if len(self.ramp.peak) != dim:
                raise ValueError(f"ramp.peak needs {dim} components, got {len(self.ramp.peak)}")
            for probe in self.probes:
                if len(probe.point) != dim or probe.component >= dim:
                    raise ValueError(f"probe '{probe.name}' does not fit a {dim}D geometry")
        return self

    @classmethod
    def from_data(cls, data: Dict[str, Any], source_dir: Optional[Path] = None) -> "Scenario":
        if data.get("base"):
            data = Util.deep_merge(preset_data(data["base"]), data)
        if source_dir is not None:
            data = dict(data, source_dir=str(source_dir))
        try:
            return cls.model_validate(data)
        except ValidationError as err:
            raise ScenarioError.from_validation_error(err) from err

    @property
    def dim(self) -> int:
        return self.geometry.dim or self.frac.dim

    def diagnostics(self) -> List[Diagnostic]:
        return self.material.diagnostics(self.dim)

    def build_mesh(self) -> Mesh:
        mesh = self.geometry.build(Path(self.source_dir) if self.source_dir else None)
        issues = []
        if mesh.dim != self.frac.dim:
            issues.append(f"frac.delta: {self.frac.dim}x{self.frac.dim} does not match the {mesh.dim}D mesh")
        if len(self.ramp.peak) != mesh.dim:
            issues.append(f"ramp.peak: needs {mesh.dim} components")
        for label in list(self.boundary.dirichlet) + [self.ramp.label]:
            if label not in mesh.labels:
                issues.append(f"boundary label '{label}' is not in the mesh (labels: {', '.join(mesh.labels)})")
        if issues:
            raise ScenarioError("Scenario does not fit its mesh", issues)
        return mesh

    def time_grid(self) -> TimeGrid:
        return self.time.grid()

    def load_ramp(self) -> LoadRamp:
        return LoadRamp(peak=self.ramp.peak, t_end=self.time_grid().t_end, label=self.ramp.label)

    def with_overrides(
        self,
        alpha: Optional[float] = None,
        delta_scale: Optional[float] = None,
        delta_preset: Optional[str] = None,
        n_steps: Optional[int] = None,
        mesh_path: Optional[str] = None,
        refinement: Optional[int] = None,
        peak_scale: Optional[float] = None,
        material_update: Optional[str] = None,
        vtk: Optional[bool] = None,
    ) -> "Scenario":
        data = self.model_dump()
        if delta_preset is not None:
            if delta_preset not in DELTA_PRESETS:
                raise ScenarioError(f"Unknown delta preset '{delta_preset}'", [f"available: {', '.join(DELTA_PRESETS)}"])
            data["frac"]["delta"] = DELTA_PRESETS[delta_preset]
        if alpha is not None:
            data["frac"]["alpha"] = alpha
        if delta_scale is not None:
            if not delta_scale > 0.0:
                raise ScenarioError("Invalid override", [f"delta_scale: must be > 0, got {delta_scale}"])
            data["frac"]["delta"] = [[delta_scale * x for x in row] for row in data["frac"]["delta"]]
        if n_steps is not None:
            data["time"]["n_steps"] = n_steps
            data["time"]["t_values"] = None
        if mesh_path is not None:
            data["geometry"] = {"kind": "mesh", "path": mesh_path}
        if refinement is not None:
            data["geometry"]["refinement"] = refinement
        if peak_scale is not None:
            data["ramp"]["peak"] = [peak_scale * x for x in data["ramp"]["peak"]]
        if material_update is not None:
            data["material_update"] = material_update
        if vtk is not None:
            data["outputs"]["vtk"] = vtk
        data["base"] = None
        return Scenario.from_data(data, Path(self.source_dir) if self.source_dir else None)


def load_scenario(source: Union[str, Path, Dict[str, Any]]) -> Scenario:
    """Scenario from a preset name, a JSON file path or an already parsed dictionary."""
    if isinstance(source, dict):
        return Scenario.from_data(source)
    if str(source) in _PRESETS:
        return Scenario.from_data(preset_data(str(source)))
    path = Path(source)
    if not path.exists():
        raise ScenarioError(
            f"'{source}' is neither a preset nor an existing file", [f"presets: {', '.join(sorted(_PRESETS))}"]
        )
    return Scenario.from_data(Util.load_json(path), path.parent)


@scenario_preset
def notched2d() -> Dict[str, Any]:
    """2D notched bar under a horizontal traction ramp."""
    return {
        "geometry": {"kind": "notched2d", "refinement": 2},
        "material": {"mu": 55000.0, "kappa": 55000.0, "Y0": 10000.0, "k1": 110000.0, "k2": 110000.0},
        "frac": {"alpha": 0.5, "delta": [list(row) for row in DELTA_PRESETS["bar"]], "n_nodes": 10},
        "ramp": {"peak": [15000.0, 0.0], "label": "right"},
        "boundary": {"dirichlet": ["left"]},
        "time": {"n_steps": 200, "t_end": 200.0},
        "probes": [
            {"name": "d_y", "point": [5.0, 0.5], "component": 1},
            {"name": "d_x", "point": [10.0, 1.0], "component": 0},
        ],
    }


@scenario_preset
def box3d() -> Dict[str, Any]:
    """3D cantilever block clamped at x=0 under a transverse traction ramp."""
    return {
        "geometry": {"kind": "box", "lengths": [6.0, 2.0, 2.0], "divisions": [6, 2, 2]},
        "material": {"mu": 120000.0, "kappa": 80000.0, "Y0": 50000.0, "k1": 200000.0, "k2": 200000.0},
        "frac": {"alpha": 0.5, "delta": [list(row) for row in DELTA_PRESETS["block"]], "n_nodes": 10},
        "ramp": {"peak": [0.0, 5000.0, 0.0], "label": "right"},
        "boundary": {"dirichlet": ["left"]},
        "time": {"n_steps": 200, "t_end": 200.0},
        "probes": [{"name": "d_y", "point": [6.0, 1.0, 1.0], "component": 1}],
    }


@scenario_preset
def notched2d_fine() -> Dict[str, Any]:
    """2D notched bar at refinement 11 (about 5k dofs) for Newton convergence studies."""
    data = notched2d()
    data.pop("name")
    data["geometry"]["refinement"] = 11
    return data
