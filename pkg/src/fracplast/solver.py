"""
Global semismooth Newton iteration, time grid, load ramp and probe measurements.
"""
from typing import Iterator, List, Literal, Optional, Sequence, Tuple
import logging
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from .errors import MaxIterationsError, ProbeError, SolverError
from .fem import Assembler, Loads
from .linear import init_linear_solver
from .linear_solvers import DIRECT, ITERATIVE, LinearSolver
from .material import StateBatch
from .mesh import Mesh
from .type import NewtonIterate, NewtonTrace, ProbeRecord


class NewtonConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tol_residual: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=30, ge=1)
    linear_solver: Literal["direct-sparse", "iterative-with-restart"] = DIRECT
    gmres_rtol: float = Field(default=1e-10, gt=0.0)
    gmres_restart: int = Field(default=50, ge=1)
    scale_by_load: bool = False


class TimeGrid(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_values: List[float]

    @field_validator("t_values")
    @classmethod
    def _increasing(cls, value: List[float]) -> List[float]:
        if len(value) < 2:
            raise ValueError("a time grid needs at least two points")
        if value[0] != 0.0:
            raise ValueError(f"time grid must start at 0, got {value[0]}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("time values must be strictly increasing")
        return value

    @classmethod
    def uniform(cls, n_steps: int, t_end: float) -> "TimeGrid":
        if n_steps < 1 or not t_end > 0.0:
            raise ValueError(f"need n_steps >= 1 and t_end > 0, got {n_steps} and {t_end}")
        return cls(t_values=[t_end * k / n_steps for k in range(n_steps + 1)])

    @property
    def t_end(self) -> float:
        return self.t_values[-1]

    @property
    def n_steps(self) -> int:
        return len(self.t_values) - 1


class LoadRamp(BaseModel):
    """Traction rising linearly to `peak` at t_end/2 and back to zero at t_end."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    peak: List[float]
    t_end: float = Field(gt=0.0)
    label: str = "right"

    def factor(self, t: float) -> float:
        half = 0.5 * self.t_end
        if t <= 0.0 or t >= self.t_end:
            return 0.0
        return t / half if t <= half else (self.t_end - t) / half

    def traction(self, t: float) -> List[float]:
        return [self.factor(t) * x for x in self.peak]

    def magnitude(self, t: float) -> float:
        """Euclidean norm of the traction at time t."""
        return self.factor(t) * float(np.linalg.norm(self.peak))

    def loads(self, t: float) -> Loads:
        return Loads(tractions={self.label: self.traction(t)})


class Probe(BaseModel):
    name: str
    point: List[float]
    component: int = Field(ge=0, le=2)


def resolve_probes(mesh: Mesh, probes: Sequence[Probe], tol: Optional[float] = None) -> List[ProbeRecord]:
    resolved = []
    for probe in probes:
        if probe.component >= mesh.dim:
            raise ProbeError(f"probe '{probe.name}' reads component {probe.component} of a {mesh.dim}D field")
        vertex, distance = mesh.snap(probe.point, tol)
        resolved.append(ProbeRecord(
            name=probe.name,
            requested=list(probe.point),
            vertex=vertex,
            location=mesh.vertices[vertex].tolist(),
            component=probe.component,
            distance=distance,
        ))
    return resolved


def measure(u: np.ndarray, probes: Sequence[ProbeRecord], dim: int) -> np.ndarray:
    """Displacement components at the probe vertices (reference coordinates); `u` is the full nodal vector."""
    u = np.asarray(u, dtype=float)
    return np.array([u[dim * p.vertex + p.component] for p in probes])


def linear_solver_for(config: NewtonConfig) -> LinearSolver:
    if config.linear_solver == ITERATIVE:
        return init_linear_solver(ITERATIVE, rtol=config.gmres_rtol, restart=config.gmres_restart)
    return init_linear_solver(config.linear_solver)


def iterate_newton(
    u0: np.ndarray,
    history: StateBatch,
    loads: Loads,
    assembler: Assembler,
    config: NewtonConfig,
    linear_solver: Optional[LinearSolver] = None,
) -> Iterator[NewtonIterate]:
    """
    Yields one NewtonIterate per assembled iterate, starting with the warm start.
    Iteration counts are linear solves. No damping or line search.
    """
    solver = linear_solver or linear_solver_for(config)
    f_ext = np.linalg.norm(assembler.dofmap.restrict(assembler.external_force(loads)))
    scale = max(1.0, float(f_ext)) if config.scale_by_load else 1.0
    trace = NewtonTrace(tolerance=config.tol_residual * scale)

    u = np.array(u0, dtype=float)
    residual, tangent = assembler.assemble(u, history, loads)
    while True:
        norm = float(np.linalg.norm(residual))
        if not np.isfinite(norm):
            raise SolverError(f"residual is not finite at Newton iteration {trace.iterations}")
        trace.residuals.append(norm)
        trace.converged = norm <= trace.tolerance
        logging.debug(f"Newton iteration {trace.iterations}: residual={norm:.3e} (tol {trace.tolerance:.3e})")
        yield NewtonIterate(
            iteration=trace.iterations, residual=norm, tolerance=trace.tolerance, converged=trace.converged, u=u
        )
        if trace.converged:
            return
        if trace.iterations >= config.max_iter:
            raise MaxIterationsError(
                f"Newton did not converge in {config.max_iter} iterations (residual {norm:.3e}, tol {trace.tolerance:.3e})",
                trace,
            )
        u = u + solver.solve(tangent, -residual)
        trace.iterations += 1
        residual, tangent = assembler.assemble(u, history, loads)


def newton_step_loop(
    u0: np.ndarray,
    history: StateBatch,
    loads: Loads,
    assembler: Assembler,
    config: NewtonConfig,
    linear_solver: Optional[LinearSolver] = None,
) -> Tuple[np.ndarray, NewtonTrace]:
    trace = NewtonTrace()
    last = None
    for last in iterate_newton(u0, history, loads, assembler, config, linear_solver):
        trace.residuals.append(last.residual)
        trace.iterations = last.iteration
        trace.tolerance = last.tolerance
    trace.converged = True
    return last.u, trace
