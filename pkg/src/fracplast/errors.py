from typing import Any, List, Optional, Sequence
import numpy as np


class FracPlastError(Exception):
    """Base class for every error raised by fracplast."""


class DimensionMismatchError(FracPlastError, ValueError):
    pass


class FractionalDerivativeError(FracPlastError, ValueError):
    pass


class ScenarioError(FracPlastError):
    """Scenario validation failed. `issues` holds one `path.to.field: message` line per problem."""

    def __init__(self, message: str, issues: Optional[List[str]] = None):
        self.issues = list(issues or [])
        if self.issues:
            message = message + "\n" + "\n".join(f"  {issue}" for issue in self.issues)
        super().__init__(message)

    @classmethod
    def from_validation_error(cls, err: Any, prefix: str = "") -> "ScenarioError":
        issues = []
        for item in err.errors():
            path = ".".join(str(part) for part in item.get("loc", ()))
            if prefix:
                path = f"{prefix}.{path}" if path else prefix
            issues.append(f"{path or '<root>'}: {item.get('msg', 'invalid value')}")
        return cls("Invalid scenario", issues)


class MeshError(FracPlastError):
    pass


class MeshFormatError(MeshError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ProbeError(FracPlastError):
    pass


class ConstitutiveError(FracPlastError):
    """Material-point failure. `indices` are batch positions of the offending points."""

    def __init__(self, message: str, indices: Optional[Sequence[int]] = None):
        self.indices = [int(i) for i in np.atleast_1d(indices)] if indices is not None else []
        self.detail = message
        super().__init__(message)

    def relabel(self, labels: Sequence[int], what: str = "cell") -> "ConstitutiveError":
        """Same error with batch positions replaced by `labels[position]`."""
        mapped = [int(labels[i]) for i in self.indices]
        shown = ", ".join(str(i) for i in mapped[:10])
        if len(mapped) > 10:
            shown += f", ... ({len(mapped)} total)"
        err = type(self)(f"{self.detail} [{what} {shown}]", mapped)
        err.detail = self.detail
        return err


class WellPosednessError(ConstitutiveError):
    pass


class DegenerateGradientError(ConstitutiveError):
    pass


class NonpositiveDenominatorError(ConstitutiveError):
    pass


class SingularJacobianError(ConstitutiveError):
    pass


class MaterialMaxIterationsError(ConstitutiveError):
    pass


class SolverError(FracPlastError):
    pass


class SingularLinearSystemError(SolverError):
    pass


class MaxIterationsError(SolverError):
    def __init__(self, message: str, trace: Any = None):
        self.trace = trace
        super().__init__(message)


class StepFailedError(SolverError):
    def __init__(self, step: int, t: float, cause: Exception, trace: Any = None):
        self.step = step
        self.t = t
        self.cause = cause
        self.trace = trace
        super().__init__(f"Time step {step} (t={t:g}) failed: {cause}")
