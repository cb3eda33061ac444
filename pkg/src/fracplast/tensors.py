"""
Symmetric second-order tensors in packed storage and the isotropic elasticity operator.

Packed layout (Voigt order, tensorial off-diagonal entries):

    d = 2: [t11, t22, t12]
    d = 3: [t11, t22, t33, t23, t13, t12]

Frobenius products run over the full d x d index set, so every stored
off-diagonal entry is weighted by 2. Fourth-order operators acting on M^d are
(n, n) matrices on packed components: (S t)_p = sum_q S[p, q] t_q.

Batched kernels take arrays of shape (..., n) and never build d x d matrices.
"""
from typing import Dict, List, Tuple, Union
import math
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from .errors import DimensionMismatchError

PACKED_PAIRS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    2: ((0, 0), (1, 1), (0, 1)),
    3: ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)),
}

GOLDEN_BOUND = (math.sqrt(5.0) - 1.0) / 2.0


def check_dim(dim: int) -> int:
    if dim not in PACKED_PAIRS:
        raise DimensionMismatchError(f"Unsupported dimension {dim}; expected 2 or 3")
    return dim


def packed_size(dim: int) -> int:
    return len(PACKED_PAIRS[check_dim(dim)])


def packed_weights(dim: int) -> np.ndarray:
    return np.array([1.0 if i == j else 2.0 for i, j in PACKED_PAIRS[check_dim(dim)]])


def identity_packed(dim: int) -> np.ndarray:
    return np.array([1.0 if i == j else 0.0 for i, j in PACKED_PAIRS[check_dim(dim)]])


def dim_of_packed(n: int) -> int:
    for dim, pairs in PACKED_PAIRS.items():
        if len(pairs) == n:
            return dim
    raise DimensionMismatchError(f"No symmetric layout has {n} packed entries")


# ---------------------------------------------------------------- batched kernels

def trace_packed(t: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(t)[..., :dim].sum(axis=-1)


def dev_packed(t: np.ndarray, dim: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = t.copy()
    out[..., :dim] -= (trace_packed(t, dim) / dim)[..., None]
    return out


def inner_packed(a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    return np.sum(np.asarray(a) * np.asarray(b) * packed_weights(dim), axis=-1)


def norm_packed(a: np.ndarray, dim: int) -> np.ndarray:
    return np.sqrt(np.maximum(inner_packed(a, a, dim), 0.0))


def packed_to_matrix(t: np.ndarray, dim: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape[:-1] + (dim, dim))
    for p, (i, j) in enumerate(PACKED_PAIRS[dim]):
        out[..., i, j] = t[..., p]
        out[..., j, i] = t[..., p]
    return out


def matrix_to_packed(m: np.ndarray) -> np.ndarray:
    """Packed symmetric part of (..., d, d) matrices."""
    m = np.asarray(m, dtype=float)
    dim = check_dim(m.shape[-1])
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.stack([sym[..., i, j] for i, j in PACKED_PAIRS[dim]], axis=-1)


def c_apply_packed(mu: float, kappa: float, e: np.ndarray, dim: int) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    out = 2.0 * mu * dev_packed(e, dim)
    out[..., :dim] += (kappa * trace_packed(e, dim))[..., None]
    return out


def c_inverse_packed(mu: float, kappa: float, s: np.ndarray, dim: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = dev_packed(s, dim) / (2.0 * mu)
    out[..., :dim] += (trace_packed(s, dim) / (kappa * dim * dim))[..., None]
    return out


# ---------------------------------------------------------------- fourth-order operators

def identity_operator(dim: int) -> np.ndarray:
    return np.eye(packed_size(dim))


def deviatoric_operator(dim: int) -> np.ndarray:
    one = identity_packed(dim)
    return identity_operator(dim) - np.outer(one, one) / dim


def outer_operator(a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    """(a ⊗ b) t = a (b : t), batched over leading axes."""
    wb = np.asarray(b) * packed_weights(dim)
    return np.asarray(a)[..., :, None] * wb[..., None, :]


def elasticity_operator(mu: float, kappa: float, dim: int) -> np.ndarray:
    one = identity_packed(dim)
    return 2.0 * mu * deviatoric_operator(dim) + kappa * np.outer(one, one)


def min_symmetric_eigenvalue(op: np.ndarray, dim: int) -> np.ndarray:
    """Smallest eigenvalue of the Frobenius-symmetric part of `op` restricted to M^d."""
    root = np.sqrt(packed_weights(dim))
    m = root[:, None] * np.asarray(op) / root[None, :]
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.linalg.eigvalsh(sym)[..., 0]


# ---------------------------------------------------------------- value types

class SymTensor:
    """Immutable symmetric d x d tensor stored in packed form."""

    __slots__ = ("_dim", "_entries")

    def __init__(self, dim: int, entries: Union[List[float], np.ndarray]):
        check_dim(dim)
        values = np.array(entries, dtype=float).reshape(-1)
        if values.size != packed_size(dim):
            raise DimensionMismatchError(
                f"A {dim}-dimensional symmetric tensor has {packed_size(dim)} entries, got {values.size}"
            )
        values.setflags(write=False)
        self._dim = dim
        self._entries = values

    @classmethod
    def zeros(cls, dim: int) -> "SymTensor":
        return cls(dim, np.zeros(packed_size(dim)))

    @classmethod
    def identity(cls, dim: int) -> "SymTensor":
        return cls(dim, identity_packed(dim))

    @classmethod
    def diag(cls, *values: float) -> "SymTensor":
        dim = len(values)
        entries = np.zeros(packed_size(dim))
        entries[:dim] = values
        return cls(dim, entries)

    @classmethod
    def from_matrix(cls, m: Union[List[List[float]], np.ndarray]) -> "SymTensor":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"Expected a square matrix, got shape {m.shape}")
        return cls(m.shape[0], matrix_to_packed(m))

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def matrix(self) -> np.ndarray:
        return packed_to_matrix(self._entries, self._dim)

    def _same_dim(self, other: "SymTensor") -> None:
        if not isinstance(other, SymTensor):
            raise TypeError(f"Expected SymTensor, got {type(other).__name__}")
        if other.dim != self._dim:
            raise DimensionMismatchError(f"Dimension mismatch: {self._dim} vs {other.dim}")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._same_dim(other)
        return SymTensor(self._dim, self._entries + other.entries)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        self._same_dim(other)
        return SymTensor(self._dim, self._entries - other.entries)

    def __mul__(self, scalar: float) -> "SymTensor":
        return SymTensor(self._dim, self._entries * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "SymTensor":
        return SymTensor(self._dim, self._entries / float(scalar))

    def __neg__(self) -> "SymTensor":
        return SymTensor(self._dim, -self._entries)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SymTensor)
            and other.dim == self._dim
            and bool(np.array_equal(other.entries, self._entries))
        )

    def __hash__(self) -> int:
        return hash((self._dim, self._entries.tobytes()))

    def __repr__(self) -> str:
        return f"SymTensor(dim={self._dim}, entries={self._entries.tolist()})"


def trace(t: SymTensor) -> float:
    return float(trace_packed(t.entries, t.dim))


def dev(t: SymTensor) -> SymTensor:
    return SymTensor(t.dim, dev_packed(t.entries, t.dim))


def frobenius_inner(a: SymTensor, b: SymTensor) -> float:
    a._same_dim(b)
    return float(inner_packed(a.entries, b.entries, a.dim))


def frobenius_norm(a: SymTensor) -> float:
    return float(norm_packed(a.entries, a.dim))


class Diagnostic(BaseModel):
    level: str
    message: str


class MaterialParams(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    mu: float = Field(gt=0)
    kappa: float = Field(gt=0)
    y0: float = Field(gt=0, alias="Y0")
    k1: float = Field(gt=0)
    k2: float = Field(gt=0)

    def elasticity(self, dim: int) -> np.ndarray:
        return elasticity_operator(self.mu, self.kappa, dim)

    def diagnostics(self, dim: int) -> List[Diagnostic]:
        """Parameter checks behind positive definiteness of the tangent; flags, not errors."""
        found: List[Diagnostic] = []
        ratio = max(2.0 * self.mu, self.kappa * dim) / (self.k1 + self.k2)
        if ratio >= GOLDEN_BOUND:
            found.append(Diagnostic(
                level="warning",
                message=(
                    f"max(2mu, kappa*d)/(k1+k2) = {ratio:.4g} >= {GOLDEN_BOUND:.4g}; "
                    "plastic tangents may lose positive definiteness"
                ),
            ))
        threshold = 2.0 * self.mu / dim
        if math.isclose(self.kappa, threshold, rel_tol=1e-12):
            found.append(Diagnostic(
                level="info",
                message=f"kappa = 2mu/d = {threshold:g} (boundary case of kappa >= 2mu/d)",
            ))
        elif self.kappa < threshold:
            found.append(Diagnostic(
                level="warning",
                message=f"kappa = {self.kappa:g} < 2mu/d = {threshold:g}; S*C may lose positive definiteness",
            ))
        return found


def apply_C(params: MaterialParams, e: SymTensor) -> SymTensor:
    return SymTensor(e.dim, c_apply_packed(params.mu, params.kappa, e.entries, e.dim))


def apply_C_inverse(params: MaterialParams, s: SymTensor) -> SymTensor:
    return SymTensor(s.dim, c_inverse_packed(params.mu, params.kappa, s.entries, s.dim))
