from .provider import (
    DIRECT, ITERATIVE, LinearSolver
)

__all__ = [
    "DIRECT",
    "ITERATIVE",
    "LinearSolver"
]
