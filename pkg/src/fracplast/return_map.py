from typing import Optional
import numpy as np
from .fracdiff import FracConfig
from .material import PointState, StateBatch, UpdateResult
from .return_maps import (
    EXPLICIT, IMPLICIT, CLASSICAL, ReturnMap, ExplicitReturnMap, ImplicitReturnMap, ClassicalReturnMap
)
from .tensors import MaterialParams, SymTensor


def init_return_map(
    kind: str,
    prev: StateBatch,
    params: MaterialParams,
    cfg: Optional[FracConfig] = None,
    implicit_tol: float = 1e-6,
    implicit_max_iter: int = 50,
) -> ReturnMap:
    if kind == EXPLICIT:
        return ExplicitReturnMap(prev, params, cfg)
    elif kind == IMPLICIT:
        return ImplicitReturnMap(prev, params, cfg, tol=implicit_tol, max_iter=implicit_max_iter)
    elif kind == CLASSICAL:
        return ClassicalReturnMap(prev, params, cfg)
    raise ValueError(f"Unknown material update '{kind}'; expected one of {EXPLICIT}, {IMPLICIT}, {CLASSICAL}")


def _single(kind: str, sigma_tr: SymTensor, prev: PointState, params: MaterialParams, cfg: Optional[FracConfig], **kwargs) -> UpdateResult:
    sigma_tr._same_dim(prev.sigma)
    batch = init_return_map(kind, StateBatch.from_points([prev]), params, cfg, **kwargs).update(sigma_tr.entries[None])
    return UpdateResult(
        state=batch.state(0, sigma_tr.dim),
        delta_gamma=float(batch.delta_gamma[0]),
        tangent=batch.tangent[0],
        iterations=batch.iterations,
    )


def explicit_update(sigma_tr: SymTensor, prev: PointState, params: MaterialParams, cfg: FracConfig) -> UpdateResult:
    return _single(EXPLICIT, sigma_tr, prev, params, cfg)


def tangent_element(sigma: SymTensor, prev: PointState, params: MaterialParams, cfg: FracConfig) -> np.ndarray:
    """One element of the generalised derivative of the explicit return map at trial stress `sigma`."""
    return explicit_update(sigma, prev, params, cfg).tangent


def classical_return_oracle(sigma_tr: SymTensor, prev: PointState, params: MaterialParams) -> UpdateResult:
    return _single(CLASSICAL, sigma_tr, prev, params, None)


def implicit_update(
    sigma_tr: SymTensor,
    prev: PointState,
    params: MaterialParams,
    cfg: FracConfig,
    tol: float = 1e-6,
    max_iter: int = 50,
) -> UpdateResult:
    return _single(IMPLICIT, sigma_tr, prev, params, cfg, implicit_tol=tol, implicit_max_iter=max_iter)
