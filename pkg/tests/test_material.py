import numpy as np
import pytest
from fracplast.errors import ConstitutiveError, DegenerateGradientError
from fracplast.fracdiff import normalized_frac_grad_f
from fracplast.material import (
    PointState, StateBatch, delta_gamma_explicit, grad_f_sigma, hess_f_sigma, linearized_yield, yield_f
)
from fracplast.return_map import explicit_update
from fracplast.tensors import (
    SymTensor, dev, frobenius_inner, frobenius_norm, identity_packed, packed_size, packed_weights
)


def test_yield_function_value(bar_params):
    sigma = SymTensor.from_matrix([[12000.0, 3000.0], [3000.0, -2000.0]])
    chi1 = SymTensor.diag(-500.0, 500.0)
    expected = frobenius_norm(dev(sigma + chi1)) - 800.0 - 10000.0
    assert yield_f(sigma, chi1, -800.0, bar_params) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("dim", [2, 3])
def test_gradient_matches_central_differences(dim, rng, bar_params, state_near_yield):
    state = state_near_yield(bar_params, dim, ratio=1.05)
    n = grad_f_sigma(state.sigma, state.chi1, bar_params)
    assert frobenius_norm(n) == pytest.approx(1.0, rel=1e-14)
    h = 1e-6 * bar_params.y0
    for _ in range(10):
        e = SymTensor.from_matrix(rng.normal(size=(dim, dim)))
        fd = (
            yield_f(state.sigma + e * h, state.chi1, state.chi2, bar_params)
            - yield_f(state.sigma - e * h, state.chi1, state.chi2, bar_params)
        ) / (2.0 * h)
        assert fd == pytest.approx(frobenius_inner(n, e), abs=1e-6)


@pytest.mark.parametrize("dim", [2, 3])
def test_hessian_matches_differences_of_gradient(dim, rng, bar_params, state_near_yield):
    state = state_near_yield(bar_params, dim, ratio=1.05)
    hess = hess_f_sigma(state.sigma, state.chi1, bar_params)
    h = 1e-3 * bar_params.y0
    e = rng.normal(size=packed_size(dim))
    plus = grad_f_sigma(state.sigma + SymTensor(dim, h * e), state.chi1, bar_params).entries
    minus = grad_f_sigma(state.sigma - SymTensor(dim, h * e), state.chi1, bar_params).entries
    assert np.allclose((plus - minus) / (2.0 * h), hess @ e, rtol=1e-4, atol=1e-10)


def test_hessian_annihilates_normal_and_identity(bar_params, state_near_yield):
    state = state_near_yield(bar_params, 3)
    hess = hess_f_sigma(state.sigma, state.chi1, bar_params)
    n = grad_f_sigma(state.sigma, state.chi1, bar_params).entries
    assert np.allclose(hess @ n, 0.0, atol=1e-18)
    assert np.allclose(hess @ identity_packed(3), 0.0, atol=1e-18)
    weighted = packed_weights(3)[:, None] * hess
    assert np.allclose(weighted, weighted.T, atol=1e-18)


def test_zero_deviator_has_no_normal(bar_params):
    zero = SymTensor.zeros(2)
    with pytest.raises(DegenerateGradientError):
        grad_f_sigma(SymTensor.identity(2) * 5.0, zero, bar_params)


def test_point_state_validation(bar_params):
    zero = SymTensor.zeros(2)
    with pytest.raises(ValueError):
        PointState(sigma=zero, eps_p=zero, chi1=zero, chi2=1.0)
    with pytest.raises(ValueError):
        PointState(sigma=zero, eps_p=SymTensor.zeros(3), chi1=zero)
    state = PointState(sigma=zero, eps_p=zero, chi1=SymTensor.diag(110.0, -110.0), chi2=-220.0)
    assert np.allclose(state.xi1(bar_params).entries, [-0.001, 0.001, 0.0])
    assert state.xi2(bar_params) == pytest.approx(0.002)


def test_state_batch_keeps_points(bar_params, state_near_yield):
    states = [state_near_yield(bar_params, 2) for _ in range(3)]
    batch = StateBatch.from_points(states)
    assert len(batch) == 3
    assert batch.point(1) == states[1]


def test_explicit_multiplier_zeroes_linearized_yield(rng, bar_params, bar_frac, state_near_yield):
    prev = state_near_yield(bar_params, 2)
    sigma_tr = prev.sigma * 1.06 + SymTensor(2, 50.0 * rng.normal(size=3))
    assert yield_f(sigma_tr, prev.chi1, prev.chi2, bar_params) > 0.0

    dhat = normalized_frac_grad_f(prev.sigma, prev.chi1, prev.chi2, bar_params, bar_frac)
    n_prev = grad_f_sigma(prev.sigma, prev.chi1, bar_params)
    dgamma = delta_gamma_explicit(sigma_tr, prev, bar_params, bar_frac, dhat, n_prev)
    result = explicit_update(sigma_tr, prev, bar_params, bar_frac)
    assert result.delta_gamma == pytest.approx(dgamma, rel=1e-13)

    new = result.state
    f_lin = linearized_yield(new.sigma, new.chi1, new.chi2, sigma_tr, prev.chi1, prev.chi2, bar_params)
    assert abs(f_lin) <= 1e-8 * bar_params.y0


def test_explicit_multiplier_rejects_elastic_trial(bar_params, bar_frac, state_near_yield):
    prev = state_near_yield(bar_params, 2)
    dhat = normalized_frac_grad_f(prev.sigma, prev.chi1, prev.chi2, bar_params, bar_frac)
    n_prev = grad_f_sigma(prev.sigma, prev.chi1, bar_params)
    sigma_tr = prev.sigma * 0.5
    assert yield_f(sigma_tr, prev.chi1, prev.chi2, bar_params) < 0.0
    with pytest.raises(ConstitutiveError, match="yielding trial state"):
        delta_gamma_explicit(sigma_tr, prev, bar_params, bar_frac, dhat, n_prev)
