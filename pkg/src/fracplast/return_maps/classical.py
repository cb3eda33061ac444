import numpy as np
from ..material import BatchUpdate, flow_normal_packed, hess_packed
from ..tensors import outer_operator
from .provider import ReturnMap, TIE_RELATIVE


class ClassicalReturnMap(ReturnMap):
    """Integer-order radial return with linear mixed hardening (the alpha -> 1 limit)."""

    def update(self, sigma_tr: np.ndarray, with_tangent: bool = True) -> BatchUpdate:
        sigma_tr = np.asarray(sigma_tr, dtype=float).reshape(-1, self.nv)
        g_tr, f_tr = self.trial_yield(sigma_tr)
        result = self.elastic(sigma_tr, with_tangent)

        idx = np.flatnonzero(f_tr >= -TIE_RELATIVE * self.params.y0)
        if idx.size == 0:
            return result

        p = self.params
        f = np.maximum(f_tr[idx], 0.0)
        n, _ = flow_normal_packed(g_tr[idx], p.y0, self.dim)
        dgamma = f / (2.0 * p.mu + p.k1 + p.k2)

        result.sigma[idx] = sigma_tr[idx] - 2.0 * p.mu * dgamma[:, None] * n
        result.chi1[idx] = self.prev.chi1[idx] - p.k1 * dgamma[:, None] * n
        result.chi2[idx] = self.prev.chi2[idx] - p.k2 * dgamma
        result.eps_p[idx] = self.prev.eps_p[idx] + dgamma[:, None] * n
        result.delta_gamma[idx] = dgamma
        result.plastic[idx] = f > 0.0

        if with_tangent:
            c = 2.0 * p.mu / (2.0 * p.mu + p.k1 + p.k2)
            hess = hess_packed(g_tr[idx], p.y0, self.dim)
            result.tangent[idx] = (
                np.eye(self.nv)[None]
                - c * outer_operator(n, n, self.dim)
                - c * f[:, None, None] * hess
            )
        return result
