import warnings
import numpy as np
from scipy.sparse import csc_matrix, csr_matrix
from scipy.sparse.linalg import LinearOperator, MatrixRankWarning, gmres, spilu, spsolve
from ..errors import SingularLinearSystemError, SolverError
from .provider import LinearSolver


def _finite(x: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise SingularLinearSystemError("linear solve produced non-finite values; the tangent is singular")
    return x


class SparseDirectSolver(LinearSolver):
    """SuperLU factorisation; the tangent is nonsymmetric in general."""

    def solve(self, matrix: csr_matrix, rhs: np.ndarray) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                x = spsolve(csc_matrix(matrix), rhs)
            except (MatrixRankWarning, RuntimeError) as err:
                raise SingularLinearSystemError(f"sparse factorisation failed: {err}") from err
        return _finite(np.atleast_1d(x))


class RestartedGMRESSolver(LinearSolver):
    """GMRES(restart) preconditioned with an incomplete LU factorisation."""

    def __init__(self, rtol: float = 1e-10, restart: int = 50, max_iter: int = 200, drop_tol: float = 1e-5):
        self.rtol = rtol
        self.restart = restart
        self.max_iter = max_iter
        self.drop_tol = drop_tol

    def solve(self, matrix: csr_matrix, rhs: np.ndarray) -> np.ndarray:
        try:
            ilu = spilu(csc_matrix(matrix), drop_tol=self.drop_tol)
        except RuntimeError as err:
            raise SingularLinearSystemError(f"incomplete LU failed: {err}") from err
        preconditioner = LinearOperator(matrix.shape, ilu.solve)
        x, info = gmres(matrix, rhs, rtol=self.rtol, restart=self.restart, maxiter=self.max_iter, M=preconditioner)
        if info > 0:
            raise SolverError(f"GMRES did not reach rtol={self.rtol:g} within {info} iterations")
        if info < 0:
            raise SingularLinearSystemError(f"GMRES breakdown (info={info})")
        return _finite(x)
