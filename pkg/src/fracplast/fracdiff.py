"""
Riesz-Caputo derivatives of order alpha in (0, 1) on symmetric intervals, and the
fractional gradient of the von Mises yield function with respect to stress.

The one-sided Caputo integrals are folded into a single integral over the
half-width s in [0, delta]:

    RC h(t) = 1 / (2 Gamma(1 - alpha)) * int_0^delta s^-alpha d/ds [h(t + s) - h(t - s)] ds

and evaluated by product integration (L1 scheme): the difference
D(s) = h(t + s) - h(t - s) is interpolated linearly between equispaced nodes
and the kernel moments are integrated exactly.
"""
from typing import Callable, List, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import gamma
from .errors import (
    DegenerateGradientError, DimensionMismatchError, FractionalDerivativeError, WellPosednessError
)
from .tensors import (
    PACKED_PAIRS, MaterialParams, SymTensor, check_dim, dev_packed, inner_packed, norm_packed
)

GUARD_FACTORS = (-1.0, -0.5, 0.0, 0.5, 1.0)
GUARD_RELATIVE = 1e-6
DEGENERATE_RELATIVE = 1e-12


class FracConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(gt=0.0, lt=1.0)
    delta: List[List[float]]
    n_nodes: int = Field(default=10, ge=2)
    symmetric_pairs: bool = True

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: List[List[float]]) -> List[List[float]]:
        m = np.asarray(value, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in PACKED_PAIRS:
            raise ValueError(f"delta must be a 2x2 or 3x3 matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=0.0):
            raise ValueError("delta must be symmetric")
        if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise ValueError("every delta entry must be finite and > 0")
        return [[float(x) for x in row] for row in m]

    @property
    def dim(self) -> int:
        return len(self.delta)

    def delta_tensor(self) -> SymTensor:
        return SymTensor.from_matrix(self.delta)

    def delta_packed(self, dim: Optional[int] = None) -> np.ndarray:
        if dim is not None and dim != self.dim:
            raise DimensionMismatchError(f"delta is {self.dim}x{self.dim} but the state has dimension {dim}")
        return np.array([self.delta[i][j] for i, j in PACKED_PAIRS[self.dim]])

    def scaled(self, factor: float) -> "FracConfig":
        if not factor > 0.0:
            raise ValueError(f"delta scale must be > 0, got {factor}")
        return FracConfig(
            alpha=self.alpha,
            delta=[[factor * x for x in row] for row in self.delta],
            n_nodes=self.n_nodes,
            symmetric_pairs=self.symmetric_pairs,
        )

    def with_alpha(self, alpha: float) -> "FracConfig":
        return FracConfig(
            alpha=alpha, delta=self.delta, n_nodes=self.n_nodes, symmetric_pairs=self.symmetric_pairs
        )


def _check_order(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise FractionalDerivativeError(f"alpha must lie in (0, 1), got {alpha}")


def unit_nodes(n_nodes: int) -> np.ndarray:
    if n_nodes < 2:
        raise FractionalDerivativeError(f"n_nodes must be >= 2, got {n_nodes}")
    return np.linspace(0.0, 1.0, n_nodes)


def kernel_moments(alpha: float, n_nodes: int) -> np.ndarray:
    """int of u^-alpha over each subinterval of the unit grid."""
    u = unit_nodes(n_nodes) ** (1.0 - alpha)
    return (u[1:] - u[:-1]) / (1.0 - alpha)


def riesz_caputo_differences(diffs: np.ndarray, delta: np.ndarray, alpha: float) -> np.ndarray:
    """
    Riesz-Caputo values from sampled differences.

    `diffs[..., k]` holds h(t + delta u_k) - h(t - delta u_k) on the unit nodes
    u_k = k / (n - 1); `delta` broadcasts against `diffs[..., 0]`.
    """
    diffs = np.asarray(diffs, dtype=float)
    n_nodes = diffs.shape[-1]
    moments = kernel_moments(alpha, n_nodes)
    steps = np.diff(diffs, axis=-1) @ moments
    factor = (n_nodes - 1) * np.asarray(delta, dtype=float) ** (-alpha) / (2.0 * gamma(1.0 - alpha))
    return factor * steps


def riesz_caputo_1d(
    h: Callable[[float], float], t: float, delta: float, alpha: float, n_nodes: int = 10
) -> float:
    """Riesz-Caputo derivative (m = 1) of `h` at `t` over [t - delta, t + delta]."""
    _check_order(alpha)
    if not delta > 0.0 or not np.isfinite(delta):
        raise FractionalDerivativeError(f"delta must be finite and > 0, got {delta}")
    s = delta * unit_nodes(n_nodes)
    right = np.array([h(t + x) for x in s], dtype=float)
    left = np.array([h(t - x) for x in s], dtype=float)
    if not (np.all(np.isfinite(right)) and np.all(np.isfinite(left))):
        raise FractionalDerivativeError(f"h is not finite on [{t - delta:g}, {t + delta:g}]")
    return float(riesz_caputo_differences(right - left, delta, alpha))


def _line_coefficients(dim: int, symmetric_pairs: bool):
    """
    Along the line sigma + x E_p the deviator g moves as g + x dev(E_p), so
    |g(x)|^2 = |g|^2 + 2 x a_p + x^2 b_p with a_p = coef_a[p] * g_p.
    `scale` maps the one-dimensional derivative onto the Frobenius gradient entry.
    """
    coef_a, coef_b, scale = [], [], []
    for i, j in PACKED_PAIRS[dim]:
        if i == j:
            coef_a.append(1.0)
            coef_b.append(1.0 - 1.0 / dim)
            scale.append(1.0)
        elif symmetric_pairs:
            coef_a.append(2.0)
            coef_b.append(2.0)
            scale.append(0.5)
        else:
            coef_a.append(1.0)
            coef_b.append(1.0)
            scale.append(1.0)
    return np.array(coef_a), np.array(coef_b), np.array(scale)


def frac_grad_packed(g: np.ndarray, y0: float, cfg: FracConfig, dim: int) -> np.ndarray:
    """
    Fractional gradient of the yield function for a batch of deviators
    g = dev(sigma + chi1), shape (n_points, n_packed). The constant part of f
    (chi2 - Y0) cancels in every difference.
    """
    check_dim(dim)
    _check_order(cfg.alpha)
    g = np.atleast_2d(np.asarray(g, dtype=float))
    delta = cfg.delta_packed(dim)
    coef_a, coef_b, scale = _line_coefficients(dim, cfg.symmetric_pairs)
    sq = inner_packed(g, g, dim)[:, None]
    a = g * coef_a

    too_close = np.zeros(g.shape[0], dtype=bool)
    for factor in GUARD_FACTORS:
        x = factor * delta
        along = np.maximum(sq + 2.0 * x * a + x * x * coef_b, 0.0)
        too_close |= np.any(np.sqrt(along) < GUARD_RELATIVE * y0, axis=1)
    if np.any(too_close):
        raise WellPosednessError(
            "dev(sigma + chi1) comes within 1e-6*Y0 of zero on the fractional interval; "
            "the fractional gradient is not well defined",
            np.flatnonzero(too_close),
        )

    s = delta[:, None] * unit_nodes(cfg.n_nodes)[None, :]
    a3 = a[:, :, None]
    quad = sq[:, :, None] + s * s * coef_b[:, None]
    plus = np.sqrt(np.maximum(quad + 2.0 * s * a3, 0.0))
    minus = np.sqrt(np.maximum(quad - 2.0 * s * a3, 0.0))
    # f(+s) - f(-s) without cancellation
    diffs = 4.0 * s * a3 / (plus + minus)
    grad = scale * riesz_caputo_differences(diffs, delta[None, :], cfg.alpha)
    bad = ~np.all(np.isfinite(grad), axis=1)
    if np.any(bad):
        raise WellPosednessError("fractional gradient is not finite", np.flatnonzero(bad))
    return grad


def normalized_frac_grad_packed(g: np.ndarray, y0: float, cfg: FracConfig, dim: int) -> np.ndarray:
    grad = frac_grad_packed(g, y0, cfg, dim)
    norm = norm_packed(grad, dim)
    reference = float(np.max(cfg.delta_packed(dim))) ** (1.0 - cfg.alpha)
    degenerate = norm < DEGENERATE_RELATIVE * reference
    if np.any(degenerate):
        raise DegenerateGradientError(
            "fractional gradient vanishes; its direction is undefined", np.flatnonzero(degenerate)
        )
    return grad / norm[:, None]


def _deviator(sigma: SymTensor, chi1: SymTensor) -> np.ndarray:
    sigma._same_dim(chi1)
    return dev_packed(sigma.entries + chi1.entries, sigma.dim)[None, :]


def frac_grad_f(
    sigma: SymTensor, chi1: SymTensor, chi2: float, params: MaterialParams, cfg: FracConfig
) -> SymTensor:
    grad = frac_grad_packed(_deviator(sigma, chi1), params.y0, cfg, sigma.dim)
    return SymTensor(sigma.dim, grad[0])


def normalized_frac_grad_f(
    sigma: SymTensor, chi1: SymTensor, chi2: float, params: MaterialParams, cfg: FracConfig
) -> SymTensor:
    grad = normalized_frac_grad_packed(_deviator(sigma, chi1), params.y0, cfg, sigma.dim)
    return SymTensor(sigma.dim, grad[0])
