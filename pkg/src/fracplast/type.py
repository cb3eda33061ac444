from typing import Any, Dict, List, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Stream:

    # Runner stream
    STEP_START: str = "STEP_START"
    NEWTON_ITERATION: str = "NEWTON_ITERATION"
    STEP_END: str = "STEP_END"
    RUN_END: str = "RUN_END"

    @classmethod
    def event(cls, type: str, data: Any, data_type: str = "none") -> 'Stream.Event':
        return cls.Event(type=type, data=data, data_type=data_type)

    class Event(BaseModel):
        type: str
        data: Any
        data_type: str = "none"


class NewtonTrace(BaseModel):
    residuals: List[float] = Field(default_factory=list)
    iterations: int = 0
    tolerance: float = 0.0
    converged: bool = False


class NewtonIterate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    iteration: int
    residual: float
    tolerance: float
    converged: bool
    u: np.ndarray = Field(exclude=True)


class StepStartData(BaseModel):
    step: int
    t: float
    load_factor: float


class IterationData(BaseModel):
    step: int
    iteration: int
    residual: float


class ProbeRecord(BaseModel):
    name: str
    requested: List[float]
    vertex: int
    location: List[float]
    component: int
    distance: float


class StepRecord(BaseModel):
    step: int
    t: float
    load_factor: float
    traction: float
    iterations: int
    residuals: List[float]
    tolerance: float
    measurements: Dict[str, float]
    max_eq_stress: float
    plastic_cells: int


class Snapshot(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    step: int
    t: float
    u: np.ndarray
    sigma: np.ndarray
    eps_p: np.ndarray
    chi2: np.ndarray


class RunRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    scenario: str
    dim: int
    probes: List[ProbeRecord]
    steps: List[StepRecord] = Field(default_factory=list)
    diagnostics: List[str] = Field(default_factory=list)
    mesh: Optional[Any] = Field(default=None, exclude=True)
    final: Optional[Snapshot] = Field(default=None, exclude=True)
    snapshots: List[Snapshot] = Field(default_factory=list, exclude=True)

    def series(self, name: str) -> List[float]:
        return [step.measurements[name] for step in self.steps]

    def max_iterations(self) -> int:
        return max((step.iterations for step in self.steps), default=0)
