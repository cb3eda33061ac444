import logging, json
from typing import Iterator, List, Optional
import numpy as np
from .errors import ConstitutiveError, SolverError, StepFailedError
from .fem import Assembler, QuadHistory
from .linear_solvers import LinearSolver
from .mesh import DofMap, Mesh
from .scenario import Scenario
from .solver import iterate_newton, linear_solver_for, measure, resolve_probes
from .type import (
    Stream, IterationData, NewtonTrace, RunRecord, Snapshot, StepRecord, StepStartData
)


class RunnerStream:

    @classmethod
    def step_start(cls, data: StepStartData) -> Stream.Event:
        return Stream.event(type=Stream.STEP_START, data=data, data_type="BaseModel")

    @classmethod
    def newton_iteration(cls, data: IterationData) -> Stream.Event:
        return Stream.event(type=Stream.NEWTON_ITERATION, data=data, data_type="BaseModel")

    @classmethod
    def step_end(cls, data: StepRecord) -> Stream.Event:
        return Stream.event(type=Stream.STEP_END, data=data, data_type="BaseModel")

    @classmethod
    def run_end(cls, data: RunRecord) -> Stream.Event:
        return Stream.event(type=Stream.RUN_END, data=data, data_type="BaseModel")

    @classmethod
    def data_dump(cls, event: Stream.Event) -> str:
        if event.data_type in ("int", "str"):
            return str(event.data)
        elif event.data_type in ("List", "Dict"):
            return json.dumps(event.data)
        elif event.data_type == "BaseModel":
            return json.dumps(event.data.model_dump())
        return ""


class Runner():
    def __init__(self,
        scenario: Scenario,
        linear_solver: Optional[LinearSolver] = None
    ):
        self.scenario = scenario
        self.mesh: Optional[Mesh] = None
        self.dofmap: Optional[DofMap] = None
        self.assembler: Optional[Assembler] = None
        self.linear_solver = linear_solver

    def __setup(self):
        scenario = self.scenario
        self.mesh = scenario.build_mesh()
        self.dofmap = DofMap(self.mesh, scenario.boundary.dirichlet)
        self.assembler = Assembler(
            self.mesh, self.dofmap, scenario.material, scenario.frac,
            material_update=scenario.material_update,
            implicit_tol=scenario.implicit_tol,
        )
        if self.linear_solver is None:
            self.linear_solver = linear_solver_for(scenario.newton)

    def __snapshot(self, step: int, t: float, u_full: np.ndarray, history: QuadHistory) -> Snapshot:
        return Snapshot(
            step=step, t=t, u=u_full.copy(),
            sigma=history.sigma.copy(), eps_p=history.eps_p.copy(), chi2=history.chi2.copy(),
        )

    def run_stream(self) -> Iterator[Stream.Event]:
        self.__setup()
        scenario = self.scenario
        mesh, dim = self.mesh, self.mesh.dim
        grid = scenario.time_grid()
        ramp = scenario.load_ramp()
        probes = resolve_probes(mesh, scenario.probes)
        outputs = scenario.outputs

        record = RunRecord(scenario=scenario.name, dim=dim, probes=probes, mesh=mesh)
        for diagnostic in scenario.diagnostics():
            record.diagnostics.append(f"{diagnostic.level}: {diagnostic.message}")
            if diagnostic.level == "warning":
                logging.warning(diagnostic.message)
            else:
                logging.info(diagnostic.message)

        history = QuadHistory.for_mesh(mesh)
        u = np.zeros(self.dofmap.n_free)
        u_full = self.dofmap.expand(u)
        record.steps.append(StepRecord(
            step=0, t=grid.t_values[0], load_factor=ramp.factor(grid.t_values[0]),
            traction=ramp.magnitude(grid.t_values[0]), iterations=0,
            residuals=[], tolerance=0.0,
            measurements={p.name: 0.0 for p in probes}, max_eq_stress=0.0, plastic_cells=0,
        ))

        for step in range(1, grid.n_steps + 1):
            t = grid.t_values[step]
            loads = ramp.loads(t)
            yield RunnerStream.step_start(StepStartData(step=step, t=t, load_factor=ramp.factor(t)))

            trace = NewtonTrace()
            try:
                for iterate in iterate_newton(u, history, loads, self.assembler, scenario.newton, self.linear_solver):
                    trace.residuals.append(iterate.residual)
                    trace.iterations = iterate.iteration
                    trace.tolerance = iterate.tolerance
                    trace.converged = iterate.converged
                    u = iterate.u
                    yield RunnerStream.newton_iteration(
                        IterationData(step=step, iteration=iterate.iteration, residual=iterate.residual)
                    )
                history = self.assembler.commit_history(u, history)
            except (ConstitutiveError, SolverError) as err:
                logging.error(f"Step {step} (t={t:g}) failed: {err}")
                raise StepFailedError(step, t, err, trace) from err

            u_full = self.dofmap.expand(u)
            values = measure(u_full, probes, dim)
            eq_stress = history.equivalent_stress()
            step_record = StepRecord(
                step=step,
                t=t,
                load_factor=ramp.factor(t),
                traction=ramp.magnitude(t),
                iterations=trace.iterations,
                residuals=trace.residuals,
                tolerance=trace.tolerance,
                measurements={p.name: float(v) for p, v in zip(probes, values)},
                max_eq_stress=float(eq_stress.max(initial=0.0)),
                plastic_cells=int(np.count_nonzero(history.delta_gamma > 0.0)),
            )
            record.steps.append(step_record)
            logging.info(
                f"Step {step}: t={t:g}, load={step_record.load_factor:.4f}, Newton iterations={trace.iterations}, "
                f"residual={trace.residuals[-1]:.3e}, plastic cells={step_record.plastic_cells}"
            )
            if outputs.vtk and outputs.vtk_every and step % outputs.vtk_every == 0:
                record.snapshots.append(self.__snapshot(step, t, u_full, history))
            yield RunnerStream.step_end(step_record)

        record.final = self.__snapshot(grid.n_steps, grid.t_end, u_full, history)
        logging.info(
            f"Run '{scenario.name}' finished: {grid.n_steps} steps, max Newton iterations {record.max_iterations()}"
        )
        yield RunnerStream.run_end(record)

    def run(self) -> RunRecord:
        record = None
        for event in self.run_stream():
            if event.type == Stream.RUN_END:
                record = event.data
        return record


def run_simulation(scenario: Scenario) -> RunRecord:
    return Runner(scenario).run()
