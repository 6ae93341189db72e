"""Maurer-Cartan elements: twists, gauges, pushforwards and the LP complex."""
import itertools

import pytest
from hypothesis import given

from conftest import rng_of, seeds
from hsw.graded import GradedLinearMap, GradedVectorSpace, sp_add, sp_neg
from hsw.lie2 import (CrossedModule, Dgla, GradedLieAlgebra, Lie2Morphism, associated_dgla, check_crossed_module,
                      check_graded_jacobi)
from hsw.linalg import Matrix, q
from hsw.mc import (MCElement, check_lp_complex, gauge, gauge_by_twist_element, lp_cohomology, lp_differential,
                    mc_check, mc_homotopy_transport, mc_pushforward, twist, twist_compatibility,
                    random_mc, twist_witness_check)
from hsw.qpois import alg_schouten, cartan_trivector, sl2
from hsw.random_instances import (RandomConfig, abelian_cm, contractible_cm, rand_element, random_basis_change,
                                  random_crossed_module, random_homotoped)
from hsw.report import NotNilpotent


def mc_instance(seed):
    rng = rng_of(seed)
    cm = random_crossed_module(rng, RandomConfig(min_degree=0, max_degree=3))
    return rng, cm, random_mc(rng, cm), rand_element(rng, cm.A.space, 1)


def polyvector_cm():
    """Adjoint crossed module of the Schouten algebra of sl(2); wedge^k sits in degree k - 1."""
    g = sl2()
    idx = {k - 1: list(itertools.combinations(range(3), k)) for k in (1, 2, 3)}
    V = GradedVectorSpace.of({d: len(v) for d, v in idx.items()})
    table = {}
    for d1, b1 in idx.items():
        for i, a in enumerate(b1):
            for d2, b2 in idx.items():
                for j, b in enumerate(b2):
                    out = {}
                    for key, c in alg_schouten(g, {a: 1}, {b: 1}).items():
                        if c:
                            out[(len(key) - 1, idx[len(key) - 1].index(key))] = c
                    if out:
                        table[((d1, i), (d2, j))] = out
    L = GradedLieAlgebra(V, table)
    return CrossedModule(L, L, GradedLinearMap.identity(V), dict(table)), idx


def test_zero_element_is_mc():
    cm = random_crossed_module(rng_of(0))
    assert mc_check(cm, {}, {}).ok


def test_abelian_curvature_pinpointed():
    cm = abelian_cm({2: 1}, {1: 1, 2: 1}, {2: Matrix([[1]])})
    assert mc_check(cm, {}, {(1, 0): q(1)}).ok
    rep = mc_check(cm, {(2, 0): q(3)}, {(1, 0): q(1)})
    assert rep.tags() == {"mc-curvature"}


def test_cartan_trivector_is_mc_for_polyvectors():
    cm, idx = polyvector_cm()
    assert check_graded_jacobi(cm.G).ok
    assert check_crossed_module(cm).ok
    phi = cartan_trivector(sl2())
    Lam = {(2, 0): phi[(0, 1, 2)]}
    Pi = {(1, idx[1].index((1, 2))): q("1/2")}
    assert mc_check(cm, Lam, Pi).ok
    assert not mc_check(cm, Lam, {}).ok


# twists

def test_zero_twist():
    _, cm, m, _ = mc_instance(1)
    assert twist(m, {}) == m


def test_abelian_twist():
    cm = abelian_cm({1: 1, 2: 1}, {1: 1, 2: 1}, {1: Matrix([[2]]), 2: Matrix([[1]])})
    m = MCElement(cm, {}, {(1, 0): q(1)})
    T = {(1, 0): q(3)}
    assert twist(m, T) == MCElement(cm, {}, {(1, 0): q(7)})


@given(seeds)
def test_double_twist_on_abelian_action(seed):
    rng = rng_of(seed)
    cm = random_crossed_module(rng, RandomConfig(min_degree=0, max_degree=3))
    cm = CrossedModule(GradedLieAlgebra.abelian(cm.A.space), cm.G, cm.d, {})
    m = MCElement(cm, {}, {})
    T = rand_element(rng, cm.A.space, 1)
    assert twist(twist(m, T), sp_neg(T)) == m


@given(seeds)
def test_twist_preserves_mc(seed):
    _, cm, m, T = mc_instance(seed)
    tw = twist(m, T)
    assert mc_check(cm, tw.Lambda, tw.Pi).ok
    assert twist_witness_check(m, tw, T)


def test_twist_witness_rejects_wrong_T():
    cm = contractible_cm({1: 1, 2: 1})
    m = MCElement(cm, {}, {})
    T = {(1, 0): q(1)}
    assert not twist_witness_check(m, twist(m, T), {(1, 0): q(2)})


# gauge

@given(seeds)
def test_gauge_equals_twist(seed):
    _, cm, m, T = mc_instance(seed)
    assert gauge_by_twist_element(m, T) == twist(m, T)


def test_gauge_zero_and_abelian():
    cm = abelian_cm({1: 1, 2: 1}, {0: 1, 1: 1}, {1: Matrix([[1]])})
    dg = associated_dgla(cm)
    m = MCElement(cm, {}, {(1, 0): q(2)}).as_dgla_element(dg)
    assert gauge(dg, m, {}) == m
    b = {(0, 0): q(5)}
    assert gauge(dg, m, b) == sp_add(m, sp_neg(dg.dif(b)))


def test_gauge_not_nilpotent():
    # [b, x] = x makes ad_b act invertibly on the degree 1 line
    V = GradedVectorSpace.of({0: 1, 1: 1})
    L = GradedLieAlgebra.from_upper(V, {((0, 0), (1, 0)): {(1, 0): 1}})
    dg = Dgla(L, GradedLinearMap.zero(V, V, 1))
    with pytest.raises(NotNilpotent):
        gauge(dg, {(1, 0): q(1)}, {(0, 0): q(1)}, nilpotency_bound=4)


# functoriality

def test_pushforward_identity_and_strict():
    _, cm, m, _ = mc_instance(2)
    assert mc_pushforward(Lie2Morphism.identity(cm), m) == m
    rng = rng_of(3)
    cm2, iso = random_basis_change(rng, cm)
    pm = mc_pushforward(iso, m)
    assert pm.Lambda == iso.phi1A(m.Lambda) and pm.Pi == iso.phi1G(m.Pi)


@given(seeds)
def test_twist_compatibility_and_transport(seed):
    rng, cm, m, T = mc_instance(seed)
    cm2, iso = random_basis_change(rng, cm)
    phi, _ = random_homotoped(rng, iso)
    assert twist_compatibility(phi, m, T).ok
    psi, h = random_homotoped(rng, phi)
    assert mc_homotopy_transport(phi, psi, h, m).ok
    pm = mc_pushforward(phi, m)
    assert mc_check(cm2, pm.Lambda, pm.Pi).ok


def test_corrupted_homotopy_leaves_residual():
    rng, cm, m, T = mc_instance(5)
    phi = Lie2Morphism.identity(cm)
    psi, h = random_homotoped(rng, phi)
    if not m.Pi or not h(m.Pi):
        pytest.skip("instance has no homotopy contribution")
    assert not mc_homotopy_transport(phi, psi, h.scale(2), m).ok


# LP complex

def test_lp_zero_mc_is_dgla_differential():
    _, cm, _, _ = mc_instance(6)
    lp = lp_differential(MCElement(cm, {}, {}))
    assert lp.differential == associated_dgla(cm).differential


def test_lp_cohomology_zero_differential():
    cm = abelian_cm({1: 2}, {0: 1, 1: 3})
    assert lp_cohomology(MCElement(cm, {}, {})) == {0: 3, 1: 3}


def test_lp_cohomology_contractible():
    cm = contractible_cm({1: 2, 2: 1})
    assert set(lp_cohomology(MCElement(cm, {}, {})).values()) == {0}


@given(seeds)
def test_lp_square_zero_and_twist_invariance(seed):
    _, cm, m, T = mc_instance(seed)
    assert check_lp_complex(lp_differential(m)).ok
    assert lp_cohomology(m) == lp_cohomology(twist(m, T))
