import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hochwalk.star_algebra import (
    AlgebraError,
    StarAlgebra,
    adjoint,
    build_algebra,
    center,
    diagonal,
    direct_sum,
    dual_numbers,
    full_matrix,
    multiply,
    unit,
)


def E(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def test_matrix_units_already_closed():
    alg = build_algebra([E(0, 0), E(0, 1), E(1, 0), E(1, 1)])
    assert alg.dim == 4


def test_diagonal_generators():
    alg = build_algebra([np.diag([1, 0]), np.diag([0, 1])])
    assert alg.dim == 2
    assert len(center(alg)) == 2


def test_closure_from_single_unit():
    alg = build_algebra([E(0, 1)])
    assert alg.dim == 4
    for i in range(2):
        for j in range(2):
            assert alg.contains(E(i, j)) < 1e-12


def test_build_is_idempotent():
    alg = build_algebra([np.array([[1, 2j], [0, 3]])])
    again = build_algebra(list(alg.basis))
    assert again.dim == alg.dim


def test_non_square_generator():
    with pytest.raises(AlgebraError):
        build_algebra([np.zeros((2, 3))])


def test_basis_must_be_orthonormal():
    with pytest.raises(AlgebraError):
        StarAlgebra(np.stack([np.eye(2), np.eye(2)]))


def test_multiply_adjoint_unit():
    alg = full_matrix(2)
    e12, e21 = alg.element(E(0, 1)), alg.element(E(1, 0))
    assert multiply(e12, e21).allclose(alg.element(E(0, 0)))
    assert adjoint(e12).allclose(e21)
    x = alg.random_element(np.random.default_rng(0))
    assert multiply(x, unit(alg)).allclose(x)


def test_mismatched_algebras():
    a, b = full_matrix(2), full_matrix(2)
    with pytest.raises(ValueError):
        multiply(a.unit(), b.unit())


@pytest.mark.parametrize(
    "alg, dim",
    [(full_matrix(2), 1), (diagonal(2), 2), (direct_sum([2, 3]), 2), (full_matrix(3), 1)],
)
def test_center_dimension(alg, dim):
    Z = center(alg)
    assert len(Z) == dim
    for z in Z:
        for i in range(alg.dim):
            b = alg.basis_element(i)
            assert np.abs((z * b - b * z).coeffs).max() < 1e-10


def test_structure_product_matches_dense(rng):
    alg = direct_sum([1, 2])
    worst = 0.0
    for _ in range(100):
        x, y = alg.random_element(rng), alg.random_element(rng)
        worst = max(worst, np.abs((x * y).matrix - x.matrix @ y.matrix).max())
    assert worst <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjoint_is_involution(seed):
    alg = full_matrix(3)
    x = alg.random_element(np.random.default_rng(seed))
    assert np.array_equal(x.adjoint().adjoint().coeffs, x.coeffs)
    np.testing.assert_allclose(x.adjoint().matrix, x.matrix.conj().T, atol=1e-12)


def test_dual_numbers_has_no_star():
    alg = dual_numbers()
    assert alg.dim == 2
    assert not alg.has_star
    assert alg.associativity_defect() == 0.0
