from abc import ABC, abstractmethod
from typing import Optional, Tuple
import numpy as np
from ..fracdiff import FracConfig, normalized_frac_grad_packed
from ..material import BatchUpdate, StateBatch, flow_normal_packed
from ..errors import ConstitutiveError
from ..tensors import MaterialParams, dev_packed, norm_packed, packed_size

EXPLICIT = "explicit"
IMPLICIT = "implicit"
CLASSICAL = "classical"

# |f| below this fraction of Y0 counts as on the yield surface
TIE_RELATIVE = 1e-10


class ReturnMap(ABC):
    """
    Material update for a batch of points sharing one previous state.

    An instance belongs to one time step: it holds the history at t_{n-1} and
    caches every quantity that depends on it alone.
    """

    def __init__(self, prev: StateBatch, params: MaterialParams, cfg: Optional[FracConfig] = None):
        self.prev = prev
        self.params = params
        self.cfg = cfg
        self.dim = prev.dim
        self.nv = packed_size(prev.dim)
        n = len(prev)
        self._n_prev = np.full((n, self.nv), np.nan)
        self._dhat_prev = np.full((n, self.nv), np.nan)
        self._known = np.zeros(n, dtype=bool)

    def previous_directions(self, idx: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Classical normal and normalised fractional gradient at the previous state, computed once per point."""
        idx = np.asarray(idx, dtype=int)
        missing = idx[~self._known[idx]]
        if missing.size:
            g = dev_packed(self.prev.sigma[missing] + self.prev.chi1[missing], self.dim)
            try:
                n, _ = flow_normal_packed(g, self.params.y0, self.dim)
                dhat = normalized_frac_grad_packed(g, self.params.y0, self.cfg, self.dim)
            except ConstitutiveError as err:
                err.indices = [int(missing[i]) for i in err.indices]
                raise
            self._n_prev[missing] = n
            self._dhat_prev[missing] = dhat
            self._known[missing] = True
        return self._n_prev[idx], self._dhat_prev[idx]

    def trial_yield(self, sigma_tr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g = dev_packed(sigma_tr + self.prev.chi1, self.dim)
        f = norm_packed(g, self.dim) + self.prev.chi2 - self.params.y0
        return g, f

    def elastic(self, sigma_tr: np.ndarray, with_tangent: bool) -> BatchUpdate:
        n = sigma_tr.shape[0]
        return BatchUpdate(
            sigma=np.array(sigma_tr, dtype=float),
            eps_p=self.prev.eps_p.copy(),
            chi1=self.prev.chi1.copy(),
            chi2=self.prev.chi2.copy(),
            delta_gamma=np.zeros(n),
            plastic=np.zeros(n, dtype=bool),
            tangent=np.broadcast_to(np.eye(self.nv), (n, self.nv, self.nv)).copy() if with_tangent else None,
        )

    @abstractmethod
    def update(self, sigma_tr: np.ndarray, with_tangent: bool = True) -> BatchUpdate:
        pass
