import numpy as np
import pytest

from hochwalk.bimodule import (
    CORNERS,
    Bimodule,
    LindbladGenerator,
    build_EL,
    build_gns,
    dagger_cochain,
    dagger_map,
    gns_defect,
    lindblad_apply,
)
from hochwalk.hochschild import Cochain
from hochwalk.models import amplitude_damping
from hochwalk.star_algebra import AlgebraError, diagonal, direct_sum, full_matrix


def E(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def test_lindblad_values(ad):
    alg, gen = ad.alg, ad.gen
    assert lindblad_apply(gen, alg.element(E(0, 0))).allclose(alg.element(-E(0, 0)))
    assert lindblad_apply(gen, alg.element(E(1, 1))).allclose(alg.element(E(0, 0)))
    assert np.abs(lindblad_apply(gen, alg.unit()).coeffs).max() < 1e-12


def test_non_hermitian_hamiltonian():
    with pytest.raises(ValueError):
        LindbladGenerator(E(0, 1), [])


def test_generator_must_preserve_algebra():
    # diagonal algebra is not invariant under a jump operator that mixes levels coherently
    gen = LindbladGenerator(np.array([[0, 1], [1, 0]]), [])
    with pytest.raises(AlgebraError):
        build_gns(diagonal(2), gen)


def test_delta_values(ad):
    np.testing.assert_allclose(ad.gen.delta(E(0, 0)), -E(1, 0), atol=1e-15)
    np.testing.assert_allclose(ad.gen.delta(E(1, 0)), 0, atol=1e-15)
    assert ad.gns.dim == 4


def test_gns_invariants(ad, m3):
    for model in (ad, m3):
        res = model.gns.invariant_residuals()
        assert max(res.values()) <= 1e-10, res


def test_gns_identity_pairs(ad, m3, rng):
    alg = ad.alg
    x, y = alg.element(E(0, 1)), alg.element(E(1, 0))
    assert gns_defect(ad.gns, ad.gen, x, y) <= 1e-10
    assert gns_defect(ad.gns, ad.gen, alg.unit(), alg.unit()) == 0.0
    for model in (ad, m3):
        worst = max(
            gns_defect(model.gns, model.gen, model.alg.random_element(rng), model.alg.random_element(rng))
            for _ in range(100)
        )
        assert worst <= 1e-10


def test_sign_invariance_of_delta_product(m3, rng):
    x, y = m3.alg.random_element(rng), m3.alg.random_element(rng)
    d = m3.gen.delta
    lhs = dagger_map(d(x.adjoint().matrix)) @ d(y.matrix)
    rhs = dagger_map(-d(x.adjoint().matrix)) @ (-d(y.matrix))
    assert np.array_equal(lhs, rhs)


def test_bimodule_axioms(ad, m3):
    for model in (ad, m3):
        for c in CORNERS:
            res = model.el.corner(c).axiom_residuals()
            assert max(res.values()) <= 1e-10, (c, res)
        assert max(model.gns.module().axiom_residuals().values()) <= 1e-10


def test_EL_dims(ad, m3):
    assert ad.el.dims() == {"00": 4, "01": 4, "10": 4, "11": 4}
    assert m3.el.dims()["11"] == m3.gns.dim**2 // m3.alg.dim


def test_corner_products(ad, m3):
    for model in (ad, m3):
        assert max(model.el.product_residuals().values()) <= 1e-10
        assert model.el.corner11_adjoint_residual() <= 1e-10


def test_dagger_involution(ad, rng):
    el = ad.el
    R = sum(el.embed(c, rng.standard_normal(el.dims()[c]) + 1j * rng.standard_normal(el.dims()[c])) for c in CORNERS)
    assert np.array_equal(el.dagger(el.dagger(R)), R)


def test_left_action_on_rank_one(ad, rng):
    el, gns = ad.el, ad.gns
    xi, eta = gns.m_matrix(rng.standard_normal(4)), gns.m_matrix(rng.standard_normal(4))
    x = ad.alg.random_element(rng)
    lhs = el.act_left(x, el.from_m(xi) @ el.from_m_adjoint(eta))
    rhs = el.from_m(gns.pi(x) @ xi) @ el.from_m_adjoint(eta)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_dagger_cochain(ad):
    fam = ad.family
    delta = fam.get("10", 1)
    ddag = dagger_cochain(delta)
    assert ddag.module.corner == "01"
    # delta^dagger(x) = delta(x*)^*, evaluated concretely
    conc = ad.el.concrete("01", ad.el.embed("01", ddag.tensor.T))
    for i in range(ad.alg.dim):
        b = ad.alg.basis_element(i)
        np.testing.assert_allclose(conc[i], ad.gns.delta_dagger(b), atol=1e-12)
    back = dagger_cochain(ddag)
    assert np.abs(back.tensor - delta.tensor).max() <= 1e-12
    pi = fam.get("11", 1)
    assert np.abs(dagger_cochain(pi).tensor - pi.tensor).max() <= 1e-12
    z = Cochain.zeros(1, ad.el.corner("10"))
    assert not dagger_cochain(z).tensor.any()


def test_pi_is_star_representation(m3, rng):
    x = m3.alg.random_element(rng)
    np.testing.assert_allclose(m3.gns.pi(x.adjoint()), m3.gns.pi(x).conj().T, atol=1e-12)


def test_non_full_algebra():
    # block-diagonal generator on M_1 + M_2 with a jump inside the 2x2 block
    alg = direct_sum([1, 2])
    L = np.zeros((3, 3), dtype=complex)
    L[2, 1] = 1
    gen = LindbladGenerator(np.diag([0.0, 1.0, -1.0]), [L])
    gns = build_gns(alg, gen)
    el = build_EL(gns)
    assert max(gns.invariant_residuals().values()) <= 1e-10
    assert el.corner11_adjoint_residual() <= 1e-10
    for c in CORNERS:
        assert max(el.corner(c).axiom_residuals().values()) <= 1e-10


def test_regular_bimodule_axioms():
    N = Bimodule.regular(full_matrix(3))
    assert max(N.axiom_residuals().values()) == 0.0


def test_models_roundtrip():
    alg, gen = amplitude_damping(0.5)
    assert np.abs(gen.superoperator(alg) @ alg.unit_coeffs).max() < 1e-12
