import logging
from typing import Tuple
import numpy as np
from ..errors import ConstitutiveError, MaterialMaxIterationsError, SingularJacobianError
from ..fracdiff import FracConfig, normalized_frac_grad_packed
from ..material import BatchUpdate, StateBatch, flow_normal_packed, hess_packed
from ..tensors import (
    MaterialParams, c_apply_packed, c_inverse_packed, dev_packed, elasticity_operator, packed_weights
)
from .provider import ReturnMap

FD_RELATIVE_STEP = 1e-6


def solve_batch(jac: np.ndarray, rhs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        singular = [int(labels[i]) for i in range(jac.shape[0]) if np.linalg.matrix_rank(jac[i]) < jac.shape[1]]
        raise SingularJacobianError("local Newton matrix of the implicit update is singular", singular or list(labels))


class ImplicitReturnMap(ReturnMap):
    """
    Implicit update: the system

        sigma - sigma_tr + dgamma C Dhat(sigma, chi1)  = 0
        chi1 - chi1_prev + dgamma k1 n(sigma, chi1)   = 0
        chi2 - chi2_prev + k2 dgamma                  = 0
        max(0, dgamma + f(sigma, chi)) - dgamma       = 0

    solved per point by semismooth Newton. The stress tangent d sigma / d sigma_tr
    is the stress block of the inverse Jacobian at the root.
    """

    def __init__(self, prev: StateBatch, params: MaterialParams, cfg: FracConfig, tol: float = 1e-6, max_iter: int = 50):
        super().__init__(prev, params, cfg)
        self.tol = tol
        self.max_iter = max_iter
        self.size = 2 * self.nv + 2
        self._c = elasticity_operator(params.mu, params.kappa, self.dim)

    def _split(self, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        nv = self.nv
        return y[:, :nv], y[:, nv:2 * nv], y[:, 2 * nv], y[:, 2 * nv + 1]

    def _dhat(self, s: np.ndarray) -> np.ndarray:
        return normalized_frac_grad_packed(dev_packed(s, self.dim), self.params.y0, self.cfg, self.dim)

    def dhat_jacobian(self, s: np.ndarray) -> np.ndarray:
        """Central differences of Dhat in packed stress coordinates, [point, p, q] = dDhat_p / ds_q."""
        h = FD_RELATIVE_STEP * self.params.y0
        cols = []
        for q in range(self.nv):
            e = np.zeros(self.nv)
            e[q] = h
            cols.append((self._dhat(s + e) - self._dhat(s - e)) / (2.0 * h))
        return np.stack(cols, axis=-1)

    def residual(self, y: np.ndarray, sigma_tr: np.ndarray, prev_idx: np.ndarray) -> np.ndarray:
        p = self.params
        sigma, chi1, chi2, dgamma = self._split(y)
        g = dev_packed(sigma + chi1, self.dim)
        n, norm = flow_normal_packed(g, p.y0, self.dim)
        f = norm + chi2 - p.y0
        dhat = self._dhat(sigma + chi1)
        return np.concatenate(
            [
                sigma - sigma_tr + dgamma[:, None] * c_apply_packed(p.mu, p.kappa, dhat, self.dim),
                chi1 - self.prev.chi1[prev_idx] + p.k1 * dgamma[:, None] * n,
                (chi2 - self.prev.chi2[prev_idx] + p.k2 * dgamma)[:, None],
                (np.maximum(0.0, dgamma + f) - dgamma)[:, None],
            ],
            axis=1,
        )

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        p, nv = self.params, self.nv
        sigma, chi1, chi2, dgamma = self._split(y)
        g = dev_packed(sigma + chi1, self.dim)
        n, norm = flow_normal_packed(g, p.y0, self.dim)
        f = norm + chi2 - p.y0
        dhat = self._dhat(sigma + chi1)
        c_jd = np.einsum("pq,mqr->mpr", self._c, self.dhat_jacobian(sigma + chi1))
        hess = hess_packed(g, p.y0, self.dim)
        eye = np.eye(nv)[None]
        s, c, k, l = slice(0, nv), slice(nv, 2 * nv), 2 * nv, 2 * nv + 1

        jac = np.zeros((y.shape[0], self.size, self.size))
        jac[:, s, s] = eye + dgamma[:, None, None] * c_jd
        jac[:, s, c] = dgamma[:, None, None] * c_jd
        jac[:, s, l] = c_apply_packed(p.mu, p.kappa, dhat, self.dim)
        jac[:, c, s] = p.k1 * dgamma[:, None, None] * hess
        jac[:, c, c] = eye + p.k1 * dgamma[:, None, None] * hess
        jac[:, c, l] = p.k1 * n
        jac[:, k, k] = 1.0
        jac[:, k, l] = p.k2

        active = dgamma + f > 0.0
        wn = n * packed_weights(self.dim)
        jac[active, l, s] = wn[active]
        jac[active, l, c] = wn[active]
        jac[active, l, k] = 1.0
        jac[~active, l, l] = -1.0
        return jac

    def update(self, sigma_tr: np.ndarray, with_tangent: bool = True) -> BatchUpdate:
        sigma_tr = np.asarray(sigma_tr, dtype=float).reshape(-1, self.nv)
        _, f_tr = self.trial_yield(sigma_tr)
        result = self.elastic(sigma_tr, with_tangent)
        result.iterations = 1

        # the trial state solves the system whenever f_tr <= tol
        idx = np.flatnonzero(f_tr > self.tol)
        if idx.size == 0:
            return result

        y = np.concatenate(
            [sigma_tr[idx], self.prev.chi1[idx], self.prev.chi2[idx, None], np.zeros((idx.size, 1))], axis=1
        )
        pending = np.arange(idx.size)
        for iteration in range(1, self.max_iter + 1):
            try:
                res = self.residual(y[pending], sigma_tr[idx[pending]], idx[pending])
            except ConstitutiveError as err:
                err.indices = [int(idx[pending][i]) for i in err.indices]
                raise
            unconverged = np.linalg.norm(res, axis=1) > self.tol
            pending, res = pending[unconverged], res[unconverged]
            if pending.size == 0:
                break
            step = solve_batch(self.jacobian(y[pending]), res, idx[pending])
            y[pending] -= step
            logging.debug(f"Implicit update iteration {iteration}: {pending.size} points unconverged")
        else:
            raise MaterialMaxIterationsError(
                f"implicit material update did not converge in {self.max_iter} iterations", idx[pending]
            )
        result.iterations = iteration

        p = self.params
        sigma, chi1, chi2, dgamma = self._split(y)
        dgamma = np.maximum(dgamma, 0.0)
        result.sigma[idx] = sigma
        result.chi1[idx] = chi1
        result.chi2[idx] = np.minimum(chi2, self.prev.chi2[idx])
        result.eps_p[idx] = self.prev.eps_p[idx] + c_inverse_packed(p.mu, p.kappa, sigma_tr[idx] - sigma, self.dim)
        result.delta_gamma[idx] = dgamma
        result.plastic[idx] = dgamma > 0.0

        if with_tangent:
            jac = self.jacobian(y)
            rhs = np.zeros((idx.size, self.size, self.nv))
            rhs[:, :self.nv, :] = np.eye(self.nv)[None]
            try:
                cols = np.linalg.solve(jac, rhs)
            except np.linalg.LinAlgError as err:
                raise SingularJacobianError("implicit tangent: local Newton matrix is singular", idx) from err
            result.tangent[idx] = cols[:, :self.nv, :]
        return result
