import numpy as np
import pytest
from fracplast.fracdiff import FracConfig
from fracplast.material import PointState
from fracplast.scenario import preset_data
from fracplast.tensors import MaterialParams, SymTensor, dev_packed, norm_packed, packed_size


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bar_params():
    return MaterialParams(mu=55000.0, kappa=55000.0, Y0=10000.0, k1=110000.0, k2=110000.0)


@pytest.fixture
def bar_frac():
    return FracConfig(alpha=0.5, delta=[[100.0, 100.0], [100.0, 200.0]])


@pytest.fixture
def block_params():
    return MaterialParams(mu=120000.0, kappa=80000.0, Y0=50000.0, k1=200000.0, k2=200000.0)


@pytest.fixture
def block_frac():
    return FracConfig(
        alpha=0.5, delta=[[100.0, 100.0, 100.0], [100.0, 500.0, 100.0], [100.0, 100.0, 900.0]]
    )


@pytest.fixture
def deviator(rng):
    """Random deviatoric packed tensors with a prescribed Frobenius norm."""

    def make(dim: int, norm: float, count: int = 1) -> np.ndarray:
        raw = dev_packed(rng.normal(size=(count, packed_size(dim))), dim)
        return raw * (norm / norm_packed(raw, dim))[:, None]

    return make


@pytest.fixture
def state_near_yield(deviator):
    """Point state whose stress deviator has norm `ratio * Y0`, no hardening yet."""

    def make(params: MaterialParams, dim: int, ratio: float = 0.98) -> PointState:
        zero = SymTensor.zeros(dim)
        sigma = SymTensor(dim, deviator(dim, ratio * params.y0)[0])
        return PointState(sigma=sigma, eps_p=zero, chi1=zero, chi2=0.0)

    return make


@pytest.fixture
def small_scenario_data():
    """Coarse notched bar with a short time grid."""

    def make(n_steps: int = 10, peak_scale: float = 1.0, **overrides) -> dict:
        data = preset_data("notched2d")
        data["geometry"]["refinement"] = 1
        data["time"]["n_steps"] = n_steps
        data["ramp"]["peak"] = [peak_scale * x for x in data["ramp"]["peak"]]
        data.update(overrides)
        return data

    return make
