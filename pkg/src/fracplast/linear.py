from .linear_solvers.provider import DIRECT, ITERATIVE, LinearSolver
from .linear_solvers.scipy_sparse import RestartedGMRESSolver, SparseDirectSolver


def init_linear_solver(kind: str, **kwargs) -> LinearSolver:
    if kind == DIRECT:
        return SparseDirectSolver()
    elif kind == ITERATIVE:
        return RestartedGMRESSolver(**kwargs)
    raise ValueError(f"Unknown linear solver '{kind}'; expected {DIRECT} or {ITERATIVE}")
