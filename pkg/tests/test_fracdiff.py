import math
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad
from scipy.special import gamma
from fracplast.errors import DimensionMismatchError, FractionalDerivativeError, WellPosednessError
from fracplast.fracdiff import (
    FracConfig, frac_grad_f, frac_grad_packed, normalized_frac_grad_f, normalized_frac_grad_packed,
    riesz_caputo_1d
)
from fracplast.material import flow_normal_packed, grad_f_sigma
from fracplast.tensors import PACKED_PAIRS, SymTensor, dev_packed, norm_packed, packed_size


def _rc_oracle(d_prime, delta, alpha):
    """Riesz-Caputo value from int_0^delta s^-alpha D'(s) ds, singularity handled by QUADPACK."""
    value, _ = quad(d_prime, 0.0, delta, weight="alg", wvar=(-alpha, 0.0), limit=200)
    return value / (2.0 * gamma(1.0 - alpha))


def _frac_grad_oracle(g, cfg, dim):
    """Componentwise adaptive-quadrature reference for the fractional yield gradient."""
    out = np.zeros(packed_size(dim))
    gg = float(np.sum(g * g * np.array([1.0 if i == j else 2.0 for i, j in PACKED_PAIRS[dim]])))
    for p, (i, j) in enumerate(PACKED_PAIRS[dim]):
        if i == j:
            a, b, scale = g[p], 1.0 - 1.0 / dim, 1.0
        else:
            a, b, scale = 2.0 * g[p], 2.0, 0.5
        f = lambda x: math.sqrt(gg + 2.0 * x * a + x * x * b)
        f_prime = lambda x: (a + x * b) / f(x)
        out[p] = scale * _rc_oracle(lambda s: f_prime(s) + f_prime(-s), cfg.delta[i][j], cfg.alpha)
    return out


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_linear_function_is_exact_with_two_nodes(alpha):
    delta = 0.75
    value = riesz_caputo_1d(lambda x: 3.0 * x + 1.0, 0.4, delta, alpha, n_nodes=2)
    assert value == pytest.approx(3.0 * delta ** (1.0 - alpha) / gamma(2.0 - alpha), rel=1e-12)


def test_quadratic_function_is_exact_at_any_resolution():
    t, delta, alpha = 1.3, 0.5, 0.3
    expected = 2.0 * t * delta ** (1.0 - alpha) / gamma(2.0 - alpha)
    for n_nodes in (2, 7, 40):
        assert riesz_caputo_1d(lambda x: x * x, t, delta, alpha, n_nodes) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_matches_adaptive_quadrature(alpha):
    t, delta = 0.2, 0.6
    expected = _rc_oracle(lambda s: math.exp(t + s) + math.exp(t - s), delta, alpha)
    assert riesz_caputo_1d(math.exp, t, delta, alpha, n_nodes=1000) == pytest.approx(expected, rel=1e-3)


def test_order_near_one_recovers_first_derivative():
    value = riesz_caputo_1d(math.sin, 0.7, 0.1, 0.999, n_nodes=10)
    assert value == pytest.approx(math.cos(0.7), rel=1e-2)


def test_invalid_arguments():
    with pytest.raises(FractionalDerivativeError):
        riesz_caputo_1d(math.sin, 0.0, 1.0, 1.0)
    with pytest.raises(FractionalDerivativeError):
        riesz_caputo_1d(math.sin, 0.0, 0.0, 0.5)
    with pytest.raises(FractionalDerivativeError):
        riesz_caputo_1d(math.sin, 0.0, 1.0, 0.5, n_nodes=1)
    with pytest.raises(FractionalDerivativeError):
        riesz_caputo_1d(lambda x: np.inf if x > 0.05 else x, 0.0, 0.1, 0.5)


def test_frac_config_validation():
    with pytest.raises(ValidationError):
        FracConfig(alpha=0.5, delta=[[1.0, 2.0], [3.0, 1.0]])
    with pytest.raises(ValidationError):
        FracConfig(alpha=0.5, delta=[[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValidationError):
        FracConfig(alpha=1.0, delta=[[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ValidationError):
        FracConfig(alpha=0.5, delta=[[1.0]])
    with pytest.raises(DimensionMismatchError):
        FracConfig(alpha=0.5, delta=[[1.0, 1.0], [1.0, 1.0]]).delta_packed(3)


def test_frac_config_helpers(bar_frac):
    assert bar_frac.delta_packed().tolist() == [100.0, 200.0, 100.0]
    assert bar_frac.scaled(2.0).delta == [[200.0, 200.0], [200.0, 400.0]]
    assert bar_frac.with_alpha(0.9).alpha == 0.9
    assert bar_frac.delta_tensor().dim == 2


@pytest.mark.parametrize("dim", [2, 3])
def test_frac_grad_matches_quadrature_oracle(dim, deviator, bar_frac, block_frac):
    cfg = (bar_frac if dim == 2 else block_frac).model_copy(update={"n_nodes": 1000})
    y0 = 10000.0
    states = deviator(dim, 1.2 * y0, count=50)
    grads = frac_grad_packed(states, y0, cfg, dim)
    for g, grad in zip(states, grads):
        expected = _frac_grad_oracle(g, cfg, dim)
        assert np.allclose(grad, expected, rtol=1e-3, atol=1e-3 * np.abs(expected).max())


def test_sign_agreement_with_classical_gradient(rng, bar_params):
    dim, y0 = 2, bar_params.y0
    count = 10000
    g = dev_packed(rng.normal(size=(count, 3)), dim)
    g *= (y0 * rng.uniform(1.0, 3.0, size=count) / norm_packed(g, dim))[:, None]
    delta = rng.uniform(1.0, 0.5 * y0, size=3)
    cfg = FracConfig(alpha=0.5, delta=[[delta[0], delta[2]], [delta[2], delta[1]]])
    frac = frac_grad_packed(g, y0, cfg, dim)
    normal, _ = flow_normal_packed(g, y0, dim)
    significant = np.abs(normal) > 1e-8
    assert np.all(np.sign(frac[significant]) == np.sign(normal[significant]))


@pytest.mark.parametrize("symmetric_pairs", [True, False])
def test_order_near_one_approaches_classical_gradient(symmetric_pairs, bar_params, state_near_yield):
    state = state_near_yield(bar_params, 2, ratio=1.1)
    cfg = FracConfig(alpha=0.999, delta=[[100.0, 100.0], [100.0, 200.0]], symmetric_pairs=symmetric_pairs)
    frac = normalized_frac_grad_f(state.sigma, state.chi1, state.chi2, bar_params, cfg)
    classical = grad_f_sigma(state.sigma, state.chi1, bar_params)
    assert np.linalg.norm(frac.entries - classical.entries) < 1e-2


def test_deviation_from_classical_is_linear_in_one_minus_alpha(bar_params, deviator):
    dim, y0 = 2, bar_params.y0
    states = deviator(dim, 1.1 * y0, count=100)
    normal, _ = flow_normal_packed(states, y0, dim)
    orders = np.array([0.9, 0.99, 0.999])
    errors = []
    for alpha in orders:
        cfg = FracConfig(alpha=alpha, delta=[[100.0, 100.0], [100.0, 200.0]], n_nodes=50)
        dhat = normalized_frac_grad_packed(states, y0, cfg, dim)
        errors.append(norm_packed(dhat - normal, dim))
    errors = np.array(errors)
    slopes = [np.polyfit(np.log(1.0 - orders), np.log(errors[:, k]), 1)[0] for k in range(len(states))]
    assert np.mean(slopes) == pytest.approx(1.0, abs=0.2)


def test_normalized_gradient_has_unit_norm(block_params, block_frac, deviator):
    g = deviator(3, 1.05 * block_params.y0, count=20)
    dhat = normalized_frac_grad_packed(g, block_params.y0, block_frac, 3)
    assert np.allclose(norm_packed(dhat, 3), 1.0, rtol=1e-13)


def test_vanishing_deviator_is_rejected(bar_params, bar_frac):
    zero = SymTensor.zeros(2)
    with pytest.raises(WellPosednessError) as info:
        frac_grad_f(zero, zero, 0.0, bar_params, bar_frac)
    assert info.value.indices == [0]


def test_gradient_is_symmetric_tensor(bar_params, bar_frac, state_near_yield):
    state = state_near_yield(bar_params, 2)
    grad = frac_grad_f(state.sigma, state.chi1, state.chi2, bar_params, bar_frac)
    m = grad.matrix()
    assert np.array_equal(m, m.T)
