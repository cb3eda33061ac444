"""
P1 displacement / P0 history assembly of the incremental weak form.

Nodal vectors are vertex-major (u[d * vertex + component]). Public methods
accept either the full nodal vector or the vector of free equations.
"""
from typing import Dict, List, Optional, Tuple
import numpy as np
from pydantic import BaseModel, Field
from scipy.sparse import coo_matrix, csr_matrix
from .errors import ConstitutiveError, DimensionMismatchError, MeshError
from .fracdiff import FracConfig
from .material import BatchUpdate, StateBatch
from .mesh import DofMap, Mesh
from .return_map import init_return_map
from .return_maps import EXPLICIT, ReturnMap
from .tensors import (
    MaterialParams, PACKED_PAIRS, SymTensor, c_apply_packed, dev_packed, elasticity_operator,
    norm_packed, packed_size, packed_weights
)


class QuadHistory(StateBatch):
    """One material state per cell; `delta_gamma` is the multiplier of the step that produced it."""

    def __init__(self, sigma, eps_p, chi1, chi2, dim: int, delta_gamma: Optional[np.ndarray] = None):
        super().__init__(sigma, eps_p, chi1, chi2, dim)
        self.delta_gamma = np.zeros(len(self)) if delta_gamma is None else np.asarray(delta_gamma, dtype=float)

    @classmethod
    def for_mesh(cls, mesh: Mesh) -> "QuadHistory":
        nv = packed_size(mesh.dim)
        n = mesh.n_cells
        return cls(np.zeros((n, nv)), np.zeros((n, nv)), np.zeros((n, nv)), np.zeros(n), mesh.dim)

    def equivalent_stress(self) -> np.ndarray:
        return norm_packed(dev_packed(self.sigma, self.dim), self.dim)

    def plastic_strain_norm(self) -> np.ndarray:
        return norm_packed(self.eps_p, self.dim)


class Loads(BaseModel):
    body: Optional[List[float]] = None
    tractions: Dict[str, List[float]] = Field(default_factory=dict)

    def scaled(self, factor: float) -> "Loads":
        return Loads(
            body=None if self.body is None else [factor * x for x in self.body],
            tractions={k: [factor * x for x in v] for k, v in self.tractions.items()},
        )


def facet_measures(vertices: np.ndarray, facets: np.ndarray) -> np.ndarray:
    v = vertices[facets]
    edges = v[:, 1:, :] - v[:, :1, :]
    gram = np.einsum("fik,fjk->fij", edges, edges)
    dim = vertices.shape[1]
    return np.sqrt(np.maximum(np.linalg.det(gram), 0.0)) / (1.0 if dim == 2 else 2.0)


class Assembler:
    def __init__(
        self,
        mesh: Mesh,
        dofmap: DofMap,
        params: MaterialParams,
        cfg: FracConfig,
        material_update: str = EXPLICIT,
        implicit_tol: float = 1e-6,
        implicit_max_iter: int = 50,
    ):
        if cfg.dim != mesh.dim:
            raise DimensionMismatchError(f"delta is {cfg.dim}x{cfg.dim} but the mesh is {mesh.dim}-dimensional")
        self.mesh = mesh
        self.dofmap = dofmap
        self.params = params
        self.cfg = cfg
        self.material_update = material_update
        self.implicit_tol = implicit_tol
        self.implicit_max_iter = implicit_max_iter
        self.dim = mesh.dim
        self.nv = packed_size(mesh.dim)
        self.weights = packed_weights(mesh.dim)
        self.c_packed = elasticity_operator(params.mu, params.kappa, mesh.dim)

        d = self.dim
        self.volumes = mesh.volumes()
        edges = mesh.vertices[mesh.cells[:, 1:]] - mesh.vertices[mesh.cells[:, :1]]
        try:
            inv = np.linalg.inv(edges)
        except np.linalg.LinAlgError as err:
            raise MeshError("degenerate cell in mesh") from err
        grads = np.empty((mesh.n_cells, d + 1, d))
        grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
        grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
        self.grads = grads

        # B[c, p, d * a + i] maps local nodal values to the packed strain
        self.B = np.zeros((mesh.n_cells, self.nv, (d + 1) * d))
        for p, (i, j) in enumerate(PACKED_PAIRS[d]):
            for a in range(d + 1):
                self.B[:, p, d * a + i] += 0.5 * grads[:, a, j]
                self.B[:, p, d * a + j] += 0.5 * grads[:, a, i]
        self.cell_dofs = (mesh.cells[:, :, None] * d + np.arange(d)[None, None, :]).reshape(mesh.n_cells, -1)

        self._history: Optional[StateBatch] = None
        self._map: Optional[ReturnMap] = None

    # ------------------------------------------------------------ helpers

    def full(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.size == self.dofmap.n_total:
            return u
        if u.size == self.dofmap.n_free:
            return self.dofmap.expand(u)
        raise DimensionMismatchError(
            f"displacement vector has {u.size} entries; expected {self.dofmap.n_total} or {self.dofmap.n_free}"
        )

    def return_map(self, history: StateBatch) -> ReturnMap:
        if history is not self._history:
            self._map = init_return_map(
                self.material_update, history, self.params, self.cfg,
                implicit_tol=self.implicit_tol, implicit_max_iter=self.implicit_max_iter,
            )
            self._history = history
        return self._map

    def strains(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("cpk,ck->cp", self.B, self.full(u)[self.cell_dofs])

    def strain(self, u: np.ndarray, cell: int) -> SymTensor:
        if not 0 <= cell < self.mesh.n_cells:
            raise MeshError(f"cell {cell} out of range 0..{self.mesh.n_cells - 1}")
        local = self.full(u)[self.cell_dofs[cell]]
        return SymTensor(self.dim, self.B[cell] @ local)

    def trial_stress(self, u: np.ndarray, history: StateBatch) -> np.ndarray:
        return c_apply_packed(self.params.mu, self.params.kappa, self.strains(u) - history.eps_p, self.dim)

    def material(self, u: np.ndarray, history: StateBatch, with_tangent: bool) -> BatchUpdate:
        try:
            return self.return_map(history).update(self.trial_stress(u, history), with_tangent)
        except ConstitutiveError as err:
            raise err.relabel(np.arange(self.mesh.n_cells)) from err

    def external_force(self, loads: Loads) -> np.ndarray:
        d = self.dim
        force = np.zeros(self.dofmap.n_total)
        if loads.body is not None:
            b = np.asarray(loads.body, dtype=float)
            if b.shape != (d,):
                raise DimensionMismatchError(f"body force needs {d} components, got {b.size}")
            share = np.repeat(self.volumes / (d + 1), d + 1)
            for i in range(d):
                force += np.bincount(self.mesh.cells.reshape(-1) * d + i, share * b[i], minlength=force.size)
        for label, value in loads.tractions.items():
            t = np.asarray(value, dtype=float)
            if t.shape != (d,):
                raise DimensionMismatchError(f"traction on '{label}' needs {d} components, got {t.size}")
            facets = self.mesh.facets_with_label(label)
            if facets.size == 0:
                raise MeshError(f"no boundary facets labelled '{label}'; mesh has {self.mesh.labels}")
            share = np.repeat(facet_measures(self.mesh.vertices, facets) / d, d)
            for i in range(d):
                force += np.bincount(facets.reshape(-1) * d + i, share * t[i], minlength=force.size)
        return force

    def _internal(self, sigma: np.ndarray) -> np.ndarray:
        local = self.volumes[:, None] * np.einsum("cpk,cp->ck", self.B, sigma * self.weights)
        return np.bincount(self.cell_dofs.reshape(-1), local.reshape(-1), minlength=self.dofmap.n_total)

    def _stiffness(self, tangent: np.ndarray) -> csr_matrix:
        # vol * B^T W S C B per cell
        sc = np.einsum("cpq,qr->cpr", tangent, self.c_packed)
        wsc = self.weights[None, :, None] * sc
        local = self.volumes[:, None, None] * np.einsum("cpk,cpr,crl->ckl", self.B, wsc, self.B)
        eq = self.dofmap.equations.reshape(-1)
        rows = np.broadcast_to(eq[self.cell_dofs][:, :, None], local.shape).reshape(-1)
        cols = np.broadcast_to(eq[self.cell_dofs][:, None, :], local.shape).reshape(-1)
        keep = (rows >= 0) & (cols >= 0)
        n = self.dofmap.n_free
        return coo_matrix((local.reshape(-1)[keep], (rows[keep], cols[keep])), shape=(n, n)).tocsr()

    # ------------------------------------------------------------ weak form

    def assemble_residual(self, u: np.ndarray, history: StateBatch, loads: Loads) -> np.ndarray:
        update = self.material(u, history, with_tangent=False)
        full = self._internal(update.sigma) - self.external_force(loads)
        return self.dofmap.restrict(full)

    def assemble_tangent(self, u: np.ndarray, history: StateBatch) -> csr_matrix:
        return self._stiffness(self.material(u, history, with_tangent=True).tangent)

    def assemble(self, u: np.ndarray, history: StateBatch, loads: Loads) -> Tuple[np.ndarray, csr_matrix]:
        """Residual and tangent from a single material update."""
        update = self.material(u, history, with_tangent=True)
        residual = self.dofmap.restrict(self._internal(update.sigma) - self.external_force(loads))
        return residual, self._stiffness(update.tangent)

    def elastic_stiffness(self) -> csr_matrix:
        return self._stiffness(np.broadcast_to(np.eye(self.nv), (self.mesh.n_cells, self.nv, self.nv)))

    def commit_history(self, u: np.ndarray, history: StateBatch) -> QuadHistory:
        update = self.material(u, history, with_tangent=False)
        return QuadHistory(update.sigma, update.eps_p, update.chi1, update.chi2, self.dim, update.delta_gamma)
