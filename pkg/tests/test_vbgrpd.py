"""VB groupoids: axioms, cores, duals, homotopies, Morita maps and VB cochains."""
import pytest
from hypothesis import given, settings

from conftest import rng_of, seeds
from hsw.fingrpd import pair_groupoid, random_groupoid, unit_groupoid
from hsw.homrep import random_split_vb, random_vb_equivalence
from hsw.linalg import Matrix, rank
from hsw.random_instances import rand_matrix
from hsw.suites import _pullback_data
from hsw.vbgrpd import (HomotopyEquivalence, VBGroupoid, VBMorphism, apply_vb_homotopy, check_bridge,
                        check_homotopy_equivalence, check_morita_morphism, check_vb_groupoid, check_vb_morphism,
                        compose_vb, connection_equivalence, core, double_dual_iso, dual_homotopy,
                        dual_pullback_iso, dual_witness, dualize, dualize_morphism, exactness_report,
                        find_homotopy, fold_map, identity_witness, is_projectable, is_vb_homotopy,
                        morita_factorization, morita_witness_check, multiplicative_linear_via_cochains,
                        multiplicative_sections, pullback_along, pullback_witness, split_cochain, split_vb,
                        vb_chain_map_and_homotopy, vb_coboundary, vb_cochains, vb_dual_intertwining)

heavy = settings(max_examples=6)


def trivial_split(g, cdims, edims):
    """Split model with zero anchor, identity actions and zero cocycle; needs ``E`` constant along arrows."""
    rho = [Matrix.zeros(edims[m], cdims[m]) for m in range(g.n_objects)]
    RE = [Matrix.eye(edims[g.src[a]]) for a in range(g.n_arrows)]
    RC = [Matrix.eye(cdims[g.src[a]]) for a in range(g.n_arrows)]
    Om = {(a, b): Matrix.zeros(cdims[g.tgt[a]], edims[g.src[b]]) for (a, b) in g.comp}
    return split_vb(g, cdims, edims, rho, RE, RC, Om)


def instance(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 2, 6)
    return rng, g, random_split_vb(rng, g)


def zero_h(v1, v2):
    return tuple(Matrix.zeros(v2.cdims[m], v1.edims[m]) for m in range(v1.base.n_objects))


# axioms and core

def test_zero_bundle():
    v = trivial_split(pair_groupoid(2), [0, 0], [0, 0])
    assert check_vb_groupoid(v).ok
    assert v.vdims == (0,) * 4 and v.cdims == (0, 0)


def test_unit_groupoid_with_zero_core():
    v = trivial_split(unit_groupoid(2), [0, 0], [2, 1])
    assert check_vb_groupoid(v).ok
    assert v.vdims == (2, 1) and v.cdims == (0, 0)


def test_trivial_split_over_pair_groupoid():
    v = trivial_split(pair_groupoid(2), [1, 1], [2, 2])
    assert check_vb_groupoid(v).ok
    assert v.cdims == (1, 1) and exactness_report(v).ok


def test_mis_signed_multiplication_breaks_unit_law():
    v = trivial_split(pair_groupoid(2), [1, 1], [1, 1])
    g = v.base
    mV = dict(v.mV)
    key = (g.unit[0], g.unit[0])
    mV[key] = -mV[key]
    bad = VBGroupoid(g, v.vdims, v.edims, v.sV, v.tV, mV, v.invV, v.uV)
    assert "unit-left" in check_vb_groupoid(bad).tags()


@given(seeds)
@heavy
def test_random_split_core_and_exactness(seed):
    _, g, v = instance(seed)
    assert check_vb_groupoid(v).ok
    for m in range(g.n_objects):
        u = g.unit[m]
        assert v.cdims[m] == v.vdims[u] - rank(v.sV[u])
    assert core(v).canonical_split
    assert exactness_report(v).ok


# duals

@given(seeds)
@heavy
def test_dual_and_double_dual(seed):
    _, g, v = instance(seed)
    vd = dualize(v)
    assert check_vb_groupoid(vd).ok
    assert vd.edims == v.cdims and vd.cdims == v.edims
    dd = double_dual_iso(v)
    assert check_vb_morphism(dd).ok and dd.is_invertible()


@given(seeds)
@heavy
def test_dual_of_homotopy_morphism(seed):
    rng, g, v1 = instance(seed)
    v2 = random_split_vb(rng, g)
    h = tuple(rand_matrix(rng, v2.cdims[m], v1.edims[m], 2) for m in range(g.n_objects))
    J = apply_vb_homotopy(v1, v2, h)
    d1, d2 = dualize(v1), dualize(v2)
    assert dualize_morphism(J, d1, d2).maps == apply_vb_homotopy(d2, d1, dual_homotopy(v1, v2, h)).maps


# homotopies

@given(seeds)
@heavy
def test_find_homotopy(seed):
    rng, g, v1 = instance(seed)
    v2 = random_split_vb(rng, g)
    z = VBMorphism.zero(v1, v2)
    h, res = find_homotopy(z, z)
    assert res is None and all(m.is_zero() for m in h)
    h0 = tuple(rand_matrix(rng, v2.cdims[m], v1.edims[m], 2) for m in range(g.n_objects))
    phi = z + apply_vb_homotopy(v1, v2, h0)
    h, res = find_homotopy(phi, z)
    assert res is None and is_vb_homotopy(phi, z, h).ok
    assert apply_vb_homotopy(v1, v2, h) == apply_vb_homotopy(v1, v2, h0)


def test_identity_not_homotopic_to_zero_on_unit_bundle():
    v = trivial_split(unit_groupoid(1), [0], [1])
    h, res = find_homotopy(VBMorphism.identity(v), VBMorphism.zero(v, v))
    assert h is None and res == 1


@given(seeds)
@heavy
def test_equivalence_and_bridge(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 2, 6)
    eq = random_vb_equivalence(rng, g)
    assert check_homotopy_equivalence(eq).ok
    assert check_bridge(eq).ok


def test_identity_bridge():
    _, g, v = instance(11)
    e = VBMorphism.identity(v)
    eq = HomotopyEquivalence(e, e, zero_h(v, v), zero_h(v, v))
    assert check_bridge(eq).ok


# pullbacks and Morita maps

@given(seeds)
@heavy
def test_fold_pullback(seed):
    _, g, v = instance(seed)
    X, phi = fold_map(g)
    P = pullback_along(v, X, phi)
    assert check_vb_groupoid(P.vb).ok
    oi = {o: i for i, o in enumerate(g.objects)}
    assert P.vb.cdims == tuple(v.cdims[oi[phi[x]]] for x in X)
    assert check_morita_morphism(P.projection).ok
    iso = dual_pullback_iso(v, X, phi)
    assert check_vb_morphism(iso).ok and iso.is_invertible()


def test_identity_is_morita_and_zero_is_not():
    _, g, v = instance(12)
    assert check_morita_morphism(VBMorphism.identity(v)).ok
    if any(v.edims):
        assert "unit-surjective" in check_morita_morphism(VBMorphism.zero(v, v)).tags()


@given(seeds)
@heavy
def test_connection_equivalence_and_factorization(seed):
    rng, g, v = instance(seed)
    X, phi, ex, ph = _pullback_data(rng, v)
    W, P, eqv = connection_equivalence(v, X, phi, ex, ph)
    assert check_homotopy_equivalence(eqv).ok
    assert check_morita_morphism(W.projection).ok
    f2, _ = morita_factorization(W.projection, X)
    assert check_vb_morphism(f2).ok


@given(seeds)
@heavy
def test_witnesses(seed):
    rng, g, v = instance(seed)
    assert morita_witness_check(v, v, identity_witness(v)).ok
    X, phi, ex, ph = _pullback_data(rng, v)
    v2, wit = pullback_witness(v, X, phi, ex, ph)
    assert morita_witness_check(v, v2, wit).ok
    d1, d2, dw = dual_witness(v, v2, wit)
    assert morita_witness_check(d1, d2, dw).ok


def ones_like(m):
    return Matrix([[1] * m.ncols for _ in range(m.nrows)], m.ncols)


def test_witness_with_wrong_equivalence_fails():
    rng, g, v = instance(14)
    X, phi, ex, ph = _pullback_data(rng, v)
    v2, wit = pullback_witness(v, X, phi, ex, ph)
    eq = wit.equivalence
    if not any(m.nrows * m.ncols for m in eq.h1):
        pytest.skip("no room for a homotopy")
    wit.equivalence = HomotopyEquivalence(eq.phi, eq.psi, tuple(m + ones_like(m) for m in eq.h1), eq.h2)
    assert "equivalence:h1:homotopy" in morita_witness_check(v, v2, wit).tags()


# VB cochains

@given(seeds)
@heavy
def test_cochain_dimensions(seed):
    _, g, v = instance(seed)
    assert vb_cochains(v, 0).ncols == sum(v.cdims)
    # level 1: a core vector over each arrow plus one unit-bundle vector per object
    assert vb_cochains(v, 1).ncols == sum(v.cdims[g.tgt[a]] for a in range(g.n_arrows)) + sum(v.edims)


@given(seeds)
@heavy
def test_coboundary_squares_to_zero_and_intertwines(seed):
    _, g, v = instance(seed)
    vd = dualize(v)
    for k in (0, 1):
        for col in vb_cochains(v, k).cols()[:4]:
            sec = split_cochain(v, k, col)
            d = vb_coboundary(v, k, sec)
            assert is_projectable(v, k + 1, d)
            assert not any(any(x) for x in vb_coboundary(v, k + 1, d).values())
            assert vb_dual_intertwining(v, k, sec, vd).ok


@given(seeds)
@settings(max_examples=4)
def test_chain_homotopy(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 2, 4)
    eq = random_vb_equivalence(rng, g)
    v1 = eq.phi.source
    assert vb_chain_map_and_homotopy(compose_vb(eq.psi, eq.phi), VBMorphism.identity(v1), eq.h1, 2).ok


def test_chain_homotopy_rejects_wrong_h():
    rng = rng_of(14)
    g = random_groupoid(rng, 2, 4)
    eq = random_vb_equivalence(rng, g)
    v1 = eq.phi.source
    if not any(m.nrows * m.ncols for m in eq.h1):
        pytest.skip("no room for a homotopy")
    bad = tuple(m + ones_like(m) for m in eq.h1)
    assert not vb_chain_map_and_homotopy(compose_vb(eq.psi, eq.phi), VBMorphism.identity(v1), bad, 1).ok


# multiplicative sections

def test_multiplicative_over_unit_groupoid():
    v = trivial_split(unit_groupoid(2), [0, 0], [2, 1])
    # V = E over units: P(v1 + v2) = P(v1) + P(v2) forces P = 0 on a vector space
    assert multiplicative_sections(v, 1).ncols == 0


@given(seeds)
@heavy
def test_multiplicative_linear_two_ways(seed):
    _, g, v = instance(seed)
    assert multiplicative_sections(v, 1).ncols == multiplicative_linear_via_cochains(v)


def test_multiplicative_rejects_level_zero():
    with pytest.raises(ValueError):
        multiplicative_sections(trivial_split(unit_groupoid(1), [0], [1]), 0)

