from .tensors import SymTensor, MaterialParams, Diagnostic, trace, dev, frobenius_inner, frobenius_norm
from .fracdiff import FracConfig, riesz_caputo_1d, frac_grad_f, normalized_frac_grad_f
from .material import PointState, UpdateResult, yield_f, grad_f_sigma, hess_f_sigma, delta_gamma_explicit
from .return_map import (
    init_return_map, explicit_update, tangent_element, classical_return_oracle, implicit_update
)
from .mesh import Mesh, DofMap, notched_bar, box, read_mesh, write_mesh
from .fem import Assembler, QuadHistory, Loads
from .solver import NewtonConfig, TimeGrid, LoadRamp, Probe, newton_step_loop, measure
from .runner import Runner, RunnerStream, run_simulation
from .scenario import Scenario, load_scenario, scenario_preset
from .output import emit_outputs, flow_vector_sweep
from .type import RunRecord, StepRecord, Stream, IterationData
from .util import Util

__all__ = [
    "SymTensor",
    "MaterialParams",
    "Diagnostic",
    "trace",
    "dev",
    "frobenius_inner",
    "frobenius_norm",
    "FracConfig",
    "riesz_caputo_1d",
    "frac_grad_f",
    "normalized_frac_grad_f",
    "PointState",
    "UpdateResult",
    "yield_f",
    "grad_f_sigma",
    "hess_f_sigma",
    "delta_gamma_explicit",
    "init_return_map",
    "explicit_update",
    "tangent_element",
    "classical_return_oracle",
    "implicit_update",
    "Mesh",
    "DofMap",
    "notched_bar",
    "box",
    "read_mesh",
    "write_mesh",
    "Assembler",
    "QuadHistory",
    "Loads",
    "NewtonConfig",
    "TimeGrid",
    "LoadRamp",
    "Probe",
    "newton_step_loop",
    "measure",
    "Runner",
    "RunnerStream",
    "run_simulation",
    "Scenario",
    "load_scenario",
    "scenario_preset",
    "emit_outputs",
    "flow_vector_sweep",
    "RunRecord",
    "StepRecord",
    "Stream",
    "IterationData",
    "Util"
]
