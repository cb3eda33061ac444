from abc import ABC, abstractmethod
import numpy as np
from scipy.sparse import csr_matrix

DIRECT = "direct-sparse"
ITERATIVE = "iterative-with-restart"


class LinearSolver(ABC):

    @abstractmethod
    def solve(self, matrix: csr_matrix, rhs: np.ndarray) -> np.ndarray:
        pass
