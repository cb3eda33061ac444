"""
Constitutive state, the von Mises yield function with linear hardening, and its
first and second stress derivatives. Each point-level function has a batched
`*_packed` counterpart on (n_points, n_packed) arrays; the assembler only uses
the batched form.
"""
from typing import List, Optional, Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from .errors import ConstitutiveError, DegenerateGradientError, DimensionMismatchError, NonpositiveDenominatorError
from .fracdiff import FracConfig
from .tensors import (
    MaterialParams, SymTensor, deviatoric_operator, dev_packed, inner_packed, norm_packed,
    outer_operator, packed_size
)

DEGENERATE_RELATIVE = 1e-12


class PointState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: SymTensor
    eps_p: SymTensor
    chi1: SymTensor
    chi2: float = Field(default=0.0, le=0.0)

    @model_validator(mode="after")
    def _same_dim(self) -> "PointState":
        if not (self.sigma.dim == self.eps_p.dim == self.chi1.dim):
            raise DimensionMismatchError("sigma, eps_p and chi1 must share one dimension")
        return self

    @classmethod
    def zeros(cls, dim: int) -> "PointState":
        zero = SymTensor.zeros(dim)
        return cls(sigma=zero, eps_p=zero, chi1=zero, chi2=0.0)

    @property
    def dim(self) -> int:
        return self.sigma.dim

    def xi1(self, params: MaterialParams) -> SymTensor:
        return self.chi1 * (-1.0 / params.k1)

    def xi2(self, params: MaterialParams) -> float:
        return -self.chi2 / params.k2


class UpdateResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    state: PointState
    delta_gamma: float = Field(ge=0.0)
    tangent: np.ndarray
    iterations: int = 0

    @property
    def plastic(self) -> bool:
        return self.delta_gamma > 0.0


class StateBatch:
    """History arrays for a batch of material points."""

    def __init__(self, sigma: np.ndarray, eps_p: np.ndarray, chi1: np.ndarray, chi2: np.ndarray, dim: int):
        nv = packed_size(dim)
        self.sigma = np.asarray(sigma, dtype=float).reshape(-1, nv)
        self.eps_p = np.asarray(eps_p, dtype=float).reshape(-1, nv)
        self.chi1 = np.asarray(chi1, dtype=float).reshape(-1, nv)
        self.chi2 = np.asarray(chi2, dtype=float).reshape(-1)
        self.dim = dim
        n = self.sigma.shape[0]
        if not (self.eps_p.shape[0] == self.chi1.shape[0] == self.chi2.shape[0] == n):
            raise DimensionMismatchError("history arrays disagree on the number of points")

    @classmethod
    def zeros(cls, n_points: int, dim: int) -> "StateBatch":
        nv = packed_size(dim)
        return cls(np.zeros((n_points, nv)), np.zeros((n_points, nv)), np.zeros((n_points, nv)), np.zeros(n_points), dim)

    @classmethod
    def from_points(cls, states: List[PointState]) -> "StateBatch":
        if not states:
            raise ValueError("at least one point state is required")
        dim = states[0].dim
        if any(s.dim != dim for s in states):
            raise DimensionMismatchError("point states disagree on dimension")
        return cls(
            np.array([s.sigma.entries for s in states]),
            np.array([s.eps_p.entries for s in states]),
            np.array([s.chi1.entries for s in states]),
            np.array([s.chi2 for s in states]),
            dim,
        )

    def __len__(self) -> int:
        return self.sigma.shape[0]

    def point(self, i: int) -> PointState:
        return PointState(
            sigma=SymTensor(self.dim, self.sigma[i]),
            eps_p=SymTensor(self.dim, self.eps_p[i]),
            chi1=SymTensor(self.dim, self.chi1[i]),
            chi2=float(self.chi2[i]),
        )


class BatchUpdate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sigma: np.ndarray
    eps_p: np.ndarray
    chi1: np.ndarray
    chi2: np.ndarray
    delta_gamma: np.ndarray
    plastic: np.ndarray
    tangent: Optional[np.ndarray] = None
    iterations: int = 0

    def state(self, i: int, dim: int) -> PointState:
        return PointState(
            sigma=SymTensor(dim, self.sigma[i]),
            eps_p=SymTensor(dim, self.eps_p[i]),
            chi1=SymTensor(dim, self.chi1[i]),
            chi2=float(self.chi2[i]),
        )


# ---------------------------------------------------------------- batched kernels

def yield_packed(sigma: np.ndarray, chi1: np.ndarray, chi2: np.ndarray, y0: float, dim: int) -> np.ndarray:
    return norm_packed(dev_packed(np.asarray(sigma) + np.asarray(chi1), dim), dim) + np.asarray(chi2) - y0


def flow_normal_packed(g: np.ndarray, y0: float, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit normals g/|g| of deviators g and their norms."""
    g = np.atleast_2d(g)
    norm = norm_packed(g, dim)
    degenerate = norm < DEGENERATE_RELATIVE * y0
    if np.any(degenerate):
        raise DegenerateGradientError("dev(sigma + chi1) vanishes; the flow direction is undefined", np.flatnonzero(degenerate))
    return g / norm[:, None], norm


def hess_packed(g: np.ndarray, y0: float, dim: int) -> np.ndarray:
    """(P_dev - n ⊗ n) / |g| for a batch of deviators."""
    n, norm = flow_normal_packed(g, y0, dim)
    return (deviatoric_operator(dim)[None] - outer_operator(n, n, dim)) / norm[:, None, None]


def denominator_packed(
    n_trial: np.ndarray, dhat_prev: np.ndarray, n_prev: np.ndarray, params: MaterialParams, dim: int
) -> np.ndarray:
    den = (
        2.0 * params.mu * inner_packed(n_trial, dhat_prev, dim)
        + params.k1 * inner_packed(n_trial, n_prev, dim)
        + params.k2
    )
    bad = ~(den > 0.0)
    if np.any(bad):
        raise NonpositiveDenominatorError(
            "return-map denominator is not positive; the state left the well-posed neighbourhood",
            np.flatnonzero(bad),
        )
    return den


# ---------------------------------------------------------------- point-level API

def yield_f(sigma: SymTensor, chi1: SymTensor, chi2: float, params: MaterialParams) -> float:
    sigma._same_dim(chi1)
    return float(yield_packed(sigma.entries, chi1.entries, chi2, params.y0, sigma.dim))


def grad_f_sigma(sigma: SymTensor, chi1: SymTensor, params: MaterialParams) -> SymTensor:
    """Also the chi1-gradient; the chi2-gradient is 1."""
    sigma._same_dim(chi1)
    g = dev_packed(sigma.entries + chi1.entries, sigma.dim)
    n, _ = flow_normal_packed(g, params.y0, sigma.dim)
    return SymTensor(sigma.dim, n[0])


def hess_f_sigma(sigma: SymTensor, chi1: SymTensor, params: MaterialParams) -> np.ndarray:
    sigma._same_dim(chi1)
    g = dev_packed(sigma.entries + chi1.entries, sigma.dim)
    return hess_packed(g, params.y0, sigma.dim)[0]


def delta_gamma_explicit(
    sigma_tr: SymTensor,
    prev: PointState,
    params: MaterialParams,
    cfg: FracConfig,
    dhat_prev: SymTensor,
    grad_prev: SymTensor,
) -> float:
    """Plastic multiplier of the explicit scheme from the yield function linearised at the trial state."""
    f_trial = yield_f(sigma_tr, prev.chi1, prev.chi2, params)
    if not f_trial > 0.0:
        raise ConstitutiveError(f"explicit multiplier needs a yielding trial state, got f={f_trial:.6g}", [0])
    n_trial = grad_f_sigma(sigma_tr, prev.chi1, params)
    den = denominator_packed(
        n_trial.entries[None], dhat_prev.entries[None], grad_prev.entries[None], params, sigma_tr.dim
    )
    return float(f_trial / den[0])


def linearized_yield(
    sigma: SymTensor,
    chi1: SymTensor,
    chi2: float,
    sigma_ref: SymTensor,
    chi1_ref: SymTensor,
    chi2_ref: float,
    params: MaterialParams,
) -> float:
    """First-order expansion of the yield function around (sigma_ref, chi1_ref, chi2_ref)."""
    n = grad_f_sigma(sigma_ref, chi1_ref, params).entries
    dim = sigma.dim
    return float(
        yield_f(sigma_ref, chi1_ref, chi2_ref, params)
        + inner_packed(n, sigma.entries - sigma_ref.entries, dim)
        + inner_packed(n, chi1.entries - chi1_ref.entries, dim)
        + (chi2 - chi2_ref)
    )
