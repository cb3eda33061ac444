import numpy as np
from ..material import BatchUpdate, denominator_packed, flow_normal_packed, hess_packed
from ..tensors import c_apply_packed, outer_operator
from .provider import ReturnMap, TIE_RELATIVE


class ExplicitReturnMap(ReturnMap):
    """
    Explicit fractional radial return: the flow direction and the hardening
    normal are frozen at the previous state, the multiplier comes from the
    yield function linearised at the trial state.
    """

    def update(self, sigma_tr: np.ndarray, with_tangent: bool = True) -> BatchUpdate:
        sigma_tr = np.asarray(sigma_tr, dtype=float).reshape(-1, self.nv)
        g_tr, f_tr = self.trial_yield(sigma_tr)
        result = self.elastic(sigma_tr, with_tangent)

        # tangent uses the plastic element on the surface itself
        on_or_outside = np.flatnonzero(f_tr >= -TIE_RELATIVE * self.params.y0)
        if on_or_outside.size == 0:
            return result

        p = self.params
        f = np.maximum(f_tr[on_or_outside], 0.0)
        n_prev, dhat_prev = self.previous_directions(on_or_outside)
        n_tr, _ = flow_normal_packed(g_tr[on_or_outside], p.y0, self.dim)
        den = denominator_packed(n_tr, dhat_prev, n_prev, p, self.dim)
        dgamma = f / den
        c_dhat = c_apply_packed(p.mu, p.kappa, dhat_prev, self.dim)

        result.sigma[on_or_outside] = sigma_tr[on_or_outside] - dgamma[:, None] * c_dhat
        result.chi1[on_or_outside] = self.prev.chi1[on_or_outside] - p.k1 * dgamma[:, None] * n_prev
        result.chi2[on_or_outside] = self.prev.chi2[on_or_outside] - p.k2 * dgamma
        result.eps_p[on_or_outside] = self.prev.eps_p[on_or_outside] + dgamma[:, None] * dhat_prev
        result.delta_gamma[on_or_outside] = dgamma
        result.plastic[on_or_outside] = f > 0.0

        if with_tangent:
            hess = hess_packed(g_tr[on_or_outside], p.y0, self.dim)
            direction = 2.0 * p.mu * dhat_prev + p.k1 * n_prev
            correction = f[:, None] * np.einsum("npq,nq->np", hess, direction)
            result.tangent[on_or_outside] = (
                np.eye(self.nv)[None]
                - outer_operator(c_dhat, n_tr, self.dim) / den[:, None, None]
                + outer_operator(c_dhat, correction, self.dim) / (den * den)[:, None, None]
            )
        return result
