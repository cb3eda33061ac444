import numpy as np
import pytest
from pydantic import ValidationError
from fracplast.errors import DimensionMismatchError
from fracplast.tensors import (
    MaterialParams, SymTensor, apply_C, apply_C_inverse, c_apply_packed, dev, elasticity_operator,
    frobenius_inner, frobenius_norm, identity_operator, inner_packed, min_symmetric_eigenvalue,
    outer_operator, packed_size, trace
)


@pytest.mark.parametrize("dim", [2, 3])
def test_frobenius_inner_matches_full_matrices(dim, rng):
    a = SymTensor.from_matrix(rng.normal(size=(dim, dim)))
    b = SymTensor.from_matrix(rng.normal(size=(dim, dim)))
    assert frobenius_inner(a, b) == pytest.approx(np.sum(a.matrix() * b.matrix()), rel=1e-14)
    assert frobenius_norm(a) == pytest.approx(np.linalg.norm(a.matrix()), rel=1e-14)


def test_packed_layout_2d():
    t = SymTensor.from_matrix([[1.0, 3.0], [3.0, 2.0]])
    assert t.entries.tolist() == [1.0, 2.0, 3.0]
    assert SymTensor.diag(1.0, 2.0, 3.0).entries.tolist() == [1.0, 2.0, 3.0, 0.0, 0.0, 0.0]


@pytest.mark.parametrize("dim", [2, 3])
def test_deviator_is_traceless(dim, rng):
    t = SymTensor.from_matrix(rng.normal(size=(dim, dim)))
    assert trace(dev(t)) == pytest.approx(0.0, abs=1e-14)
    assert trace(SymTensor.identity(dim)) == dim


@pytest.mark.parametrize("dim", [2, 3])
def test_elasticity_inverse(dim, rng, bar_params):
    e = SymTensor.from_matrix(rng.normal(size=(dim, dim)))
    back = apply_C_inverse(bar_params, apply_C(bar_params, e))
    assert np.allclose(back.entries, e.entries, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("dim", [2, 3])
def test_operator_matrices_agree_with_kernels(dim, rng):
    e = rng.normal(size=packed_size(dim))
    op = elasticity_operator(3.0, 5.0, dim)
    assert np.allclose(op @ e, c_apply_packed(3.0, 5.0, e, dim))

    a, b = rng.normal(size=(2, packed_size(dim)))
    assert np.allclose(outer_operator(a, b, dim) @ e, a * inner_packed(b, e, dim))


@pytest.mark.parametrize("dim", [2, 3])
def test_min_symmetric_eigenvalue_of_elasticity(dim):
    mu, kappa = 3.0, 0.5
    assert min_symmetric_eigenvalue(identity_operator(dim), dim) == pytest.approx(1.0)
    assert min_symmetric_eigenvalue(elasticity_operator(mu, kappa, dim), dim) == pytest.approx(
        min(2.0 * mu, dim * kappa)
    )


def test_mixed_dimensions_rejected():
    with pytest.raises(DimensionMismatchError):
        SymTensor.zeros(2) + SymTensor.zeros(3)
    with pytest.raises(DimensionMismatchError):
        SymTensor(2, [1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        SymTensor.zeros(4)


def test_symtensor_is_immutable():
    t = SymTensor.identity(2)
    with pytest.raises(ValueError):
        t.entries[0] = 5.0
    assert t == SymTensor.identity(2)
    assert hash(t) == hash(SymTensor.identity(2))


def test_material_params_alias_and_bounds():
    params = MaterialParams(mu=1.0, kappa=1.0, y0=2.0, k1=1.0, k2=1.0)
    assert params.y0 == 2.0
    with pytest.raises(ValidationError):
        MaterialParams(mu=1.0, kappa=1.0, k1=1.0, k2=1.0)
    with pytest.raises(ValidationError):
        MaterialParams(mu=-1.0, kappa=1.0, Y0=1.0, k1=1.0, k2=1.0)


def test_preset_parameters_only_raise_boundary_notes(bar_params, block_params):
    for params, dim in ((bar_params, 2), (block_params, 3)):
        levels = [d.level for d in params.diagnostics(dim)]
        assert "warning" not in levels
        assert levels == ["info"]


def test_small_hardening_is_flagged():
    weak = MaterialParams(mu=55000.0, kappa=55000.0, Y0=10000.0, k1=1000.0, k2=1000.0)
    warnings = [d for d in weak.diagnostics(2) if d.level == "warning"]
    assert len(warnings) == 1
    assert "positive definiteness" in warnings[0].message
