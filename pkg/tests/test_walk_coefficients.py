import numpy as np
import pytest

from hochwalk.bimodule import CORNERS
from hochwalk.hochschild import is_cocycle
from hochwalk.walk_coefficients import (
    InductionError,
    assemble_beta,
    build_family,
    extend,
    load_family,
    multiplicativity_defect,
    phi_rhs,
    save_family,
    seed,
    verify_relations,
)


def E(i, j, d=2):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


def test_seed_values(ad):
    fam = seed(ad.gns, ad.gen, ad.el)
    alg, el = ad.alg, ad.el
    # theta_00^(1)(E_11) = L(E_11) = -E_11
    np.testing.assert_allclose(el.concrete("00", fam.ambient("00", 1))[0], -E(0, 0), atol=1e-14)
    # theta_00^(0) is the identity
    np.testing.assert_allclose(el.concrete("00", fam.ambient("00", 0)), alg.basis, atol=1e-14)
    # theta_11^(1)(1) is the identity of B^a(M)
    np.testing.assert_allclose(el.concrete("11", fam.ambient_at("11", 1, alg.unit_coeffs)), np.eye(4), atol=1e-14)
    # theta_10^(1) = delta, theta_01^(1) = its dagger
    np.testing.assert_allclose(el.concrete("10", fam.ambient("10", 1)), ad.gen.delta(alg.basis), atol=1e-14)
    from hochwalk.bimodule import dagger_cochain

    assert np.array_equal(fam.get("01", 1).tensor, dagger_cochain(fam.get("10", 1)).tensor)


def test_phi_level_two(ad, rng):
    """phi_11 = delta(x) delta^dagger(y); phi_00 = L(x)L(y) + delta^dagger theta_10^(2) + theta_01^(2) delta."""
    fam = ad.family
    el = ad.el
    phi11 = phi_rhs(fam, "11", 2)
    assert is_cocycle(phi11)[1] <= 1e-10
    x, y = ad.alg.random_element(rng), ad.alg.random_element(rng)
    got = el.embed("11", phi11(x, y))
    want = fam.ambient_at("10", 1, x.coeffs) @ fam.ambient_at("01", 1, y.coeffs)
    assert np.abs(got - want).max() <= 1e-12
    phi00 = el.embed("00", phi_rhs(fam, "00", 2)(x, y))
    a = lambda c, n, v: fam.ambient_at(c, n, v.coeffs)
    want = a("00", 1, x) @ a("00", 1, y) + a("01", 1, x) @ a("10", 2, y) + a("01", 2, x) @ a("10", 1, y)
    assert np.abs(phi00 - want).max() <= 1e-12


def test_level_two_residuals(ad):
    for c in CORNERS:
        prov = ad.family.provenance[(c, 2)]
        assert prov["cocycle_residual"] <= 1e-10
        assert prov["solve_residual"] <= 1e-10


def test_relations_order_four(ad, m3):
    for model in (ad, m3):
        rep = verify_relations(model.family)
        assert rep.max_relation <= 1e-8
        assert rep.max_dagger <= 1e-10
        assert rep.max_cocycle <= 1e-9
        assert rep.max_solve <= 1e-9


def test_relation_level_one_is_gns_identity(ad):
    rep = verify_relations(ad.family)
    assert rep.relation[("00", 1)] <= 1e-10


def test_zero_generator(zero):
    fam = zero.family
    for n in range(2, fam.order + 1):
        for c in CORNERS:
            assert not fam.get(c, n).tensor.any()
    assert not phi_rhs(fam, "00", fam.order).tensor.any()
    assert verify_relations(fam).max_relation == 0.0
    beta = assemble_beta(fam, 0.1)
    assert max(multiplicativity_defect(beta).values()) <= 1e-13


def test_extend_order_checks(ad):
    fam = seed(ad.gns, ad.gen, ad.el)
    with pytest.raises(InductionError):
        extend(fam, 3)
    with pytest.raises(InductionError):
        fam.get("11", 2)
    with pytest.raises(InductionError):
        assemble_beta(fam, 0.1, 2)


def test_determinism(ad):
    a = build_family(ad.gns, ad.gen, 3, el=ad.el)
    b = build_family(ad.gns, ad.gen, 3, el=ad.el)
    for key in a.theta:
        assert np.array_equal(a.theta[key].tensor, b.theta[key].tensor)


def test_beta_at_zero(ad):
    beta = assemble_beta(ad.family, 0.0)
    el = ad.el
    np.testing.assert_allclose(el.concrete("00", beta.corners["00"]), ad.alg.basis, atol=1e-14)
    assert not np.abs(beta.corners["10"]).max() > 0
    assert not np.abs(beta.corners["01"]).max() > 0
    np.testing.assert_allclose(beta.corners["11"], ad.family.ambient("11", 1), atol=1e-14)


def test_beta_dagger(m3):
    beta = assemble_beta(m3.family, 0.05)
    alg, el = m3.alg, m3.el
    total = beta.ambient()
    at_star = np.einsum("ik,kab->iab", alg.star_table, total)
    assert np.abs(at_star - np.conj(np.swapaxes(total, -1, -2))).max() <= 1e-10


def test_beta_unital(ad):
    beta = assemble_beta(ad.family, 0.05)
    one = beta.ambient(ad.alg.unit_coeffs)
    np.testing.assert_allclose(one, np.eye(ad.el.D), atol=1e-10)


def test_slope_corner00_order2(ad):
    d1 = multiplicativity_defect(assemble_beta(ad.family, 1e-2, 2))["00"]
    d2 = multiplicativity_defect(assemble_beta(ad.family, 5e-3, 2))["00"]
    assert abs(np.log2(d1 / d2) - 3) <= 0.3


def test_defect_single_pair(ad, rng):
    beta = assemble_beta(ad.family, 1e-2, 2)
    x, y = ad.alg.random_element(rng), ad.alg.random_element(rng)
    pair = multiplicativity_defect(beta, x, y)
    assert set(pair) == set(CORNERS)
    assert max(pair.values()) < 1e-3


def test_roundtrip(ad, tmp_path):
    path = tmp_path / "coeffs.json"
    save_family(ad.family, path)
    loaded = load_family(path)
    assert loaded.order == ad.family.order
    for key, val in ad.family.theta.items():
        assert np.array_equal(loaded.theta[key].tensor, val.tensor)
    assert loaded.provenance == ad.family.provenance
    save_family(loaded, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_load_rejects_other_algebra(ad, m3, tmp_path):
    path = tmp_path / "coeffs.json"
    save_family(ad.family, path)
    with pytest.raises(ValueError):
        load_family(path, el=m3.el)
