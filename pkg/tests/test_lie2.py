"""Crossed modules, associated dglas, Lie 2-algebra morphisms and inversion."""
import pytest
from hypothesis import given

from conftest import rng_of, seeds
from hsw.graded import GradedLinearMap, GradedVectorSpace, sp_basis
from hsw.linalg import Matrix, kernel, rank
from hsw.lie2 import (CrossedModule, GradedLieAlgebra, Lie2Homotopy, Lie2Morphism, apply_homotopy,
                      associated_dgla, check_crossed_module, check_dgla, check_graded_jacobi, check_homotopy,
                      check_lie2_morphism, compose_lie2, cyclic_defect, inversion_constraints, invert_lie2_morphism, table_add,
                      NotAChainHomotopyInverse, tables_equal, theta, two_term_cohomology)
from hsw.random_instances import (RandomConfig, abelian_cm, contractible_cm, rand_graded_map, random_basis_change,
                                  random_crossed_module, random_homotoped, random_inversion_instance, sl2_table)


def sl2_algebra():
    V = GradedVectorSpace.of({0: 3})
    return GradedLieAlgebra.from_upper(V, sl2_table([(0, 0), (0, 1), (0, 2)]))


def adjoint_sl2():
    g = sl2_algebra()
    return CrossedModule(g, g, GradedLinearMap.identity(g.space), dict(g.table))


# graded Jacobi

def test_abelian_is_lie():
    assert check_graded_jacobi(GradedLieAlgebra.abelian(GradedVectorSpace.of({0: 2, 1: 2}))).ok


def test_heisenberg_is_lie():
    V = GradedVectorSpace.of({0: 3})
    assert check_graded_jacobi(GradedLieAlgebra.from_upper(V, {((0, 0), (0, 1)): {(0, 2): 1}})).ok


def test_broken_antisymmetry_located():
    V = GradedVectorSpace.of({0: 3})
    g = GradedLieAlgebra(V, {((0, 0), (0, 1)): {(0, 0): 1}, ((0, 1), (0, 0)): {(0, 0): 1}})
    rep = check_graded_jacobi(g)
    assert any(f.tag == "antisymmetry" and f.location == ((0, 0), (0, 1)) for f in rep)


# crossed modules

def test_abelian_identity_cm():
    assert check_crossed_module(contractible_cm({0: 1})).ok


def test_scalar_action_violates_axiom_a():
    cm = contractible_cm({0: 1})
    bad = CrossedModule(cm.A, cm.G, cm.d, {((0, 0), (0, 0)): {(0, 0): 1}})
    assert not check_crossed_module(bad).ok


def test_adjoint_sl2():
    cm = adjoint_sl2()
    assert check_crossed_module(cm).ok
    dg = associated_dgla(cm)
    assert set(dg.V.degrees()) == {-1, 0}
    assert check_dgla(dg).ok


def test_dgla_degree_bookkeeping():
    cm = abelian_cm({1: 1, 2: 1}, {0: 1, 1: 1})
    assert set(associated_dgla(cm).V.degrees()) == {0, 1}


def test_abelian_dgla_has_zero_bracket():
    cm = abelian_cm({1: 2}, {1: 2}, {1: Matrix([[1, 2], [0, 1]])})
    dg = associated_dgla(cm)
    assert not any(dg.lie.table.values())
    assert check_dgla(dg).ok


@given(seeds)
def test_random_crossed_modules(seed):
    cm = random_crossed_module(rng_of(seed), RandomConfig(-3, 3, 3))
    assert check_crossed_module(cm).ok
    assert check_dgla(associated_dgla(cm, validate=False)).ok


# morphisms

def test_identity_morphism_valid():
    assert check_lie2_morphism(Lie2Morphism.identity(adjoint_sl2())).ok


def test_zero_morphism_on_sl2_is_valid():
    # brute force of condition (b): both sides vanish identically when phi1 = 0
    cm = adjoint_sl2()
    z = GradedLinearMap.zero(cm.G.space, cm.G.space)
    assert check_lie2_morphism(Lie2Morphism(cm, cm, GradedLinearMap.zero(cm.A.space, cm.A.space), z, {})).ok


def test_scaled_identity_violates_condition_b():
    cm = adjoint_sl2()
    two = GradedLinearMap.identity(cm.G.space).scale(2)
    rep = check_lie2_morphism(Lie2Morphism(cm, cm, two, two, {}))
    assert "b-bracket" in rep.tags()


@given(seeds)
def test_composite_is_morphism(seed):
    rng = rng_of(seed)
    cm = random_crossed_module(rng)
    cm2, iso = random_basis_change(rng, cm)
    phi, _ = random_homotoped(rng, iso)
    cm3, iso2 = random_basis_change(rng, cm2)
    psi, _ = random_homotoped(rng, iso2)
    assert check_lie2_morphism(compose_lie2(psi, phi)).ok
    assert compose_lie2(phi, Lie2Morphism.identity(cm)) == phi


def test_compose_strict_is_strict():
    rng = rng_of(4)
    cm = random_crossed_module(rng)
    cm2, iso = random_basis_change(rng, cm)
    cm3, iso2 = random_basis_change(rng, cm2)
    assert compose_lie2(iso2, iso).is_strict


# theta and homotopies

def test_theta_zero_homotopy():
    cm = adjoint_sl2()
    assert not any(theta(Lie2Morphism.identity(cm), GradedLinearMap.zero(cm.G.space, cm.A.space)).values())


@given(seeds)
def test_theta_additivity(seed):
    rng = rng_of(seed)
    cm = random_crossed_module(rng)
    phi = Lie2Morphism.identity(cm)
    h = rand_graded_map(rng, cm.G.space, cm.A.space)
    g = rand_graded_map(rng, cm.G.space, cm.A.space)
    psi = apply_homotopy(phi, h)
    assert tables_equal(theta(phi, h + g), table_add(theta(psi, g), theta(phi, h)))


@given(seeds)
def test_homotopy_symmetry(seed):
    rng = rng_of(seed)
    cm = random_crossed_module(rng)
    phi = Lie2Morphism.identity(cm)
    psi, h = random_homotoped(rng, phi)
    assert check_homotopy(Lie2Homotopy(phi, psi, h)).ok
    assert check_homotopy(Lie2Homotopy(psi, phi, -h)).ok


def test_zero_homotopy_reflexive():
    cm = adjoint_sl2()
    phi = Lie2Morphism.identity(cm)
    assert check_homotopy(Lie2Homotopy(phi, phi, GradedLinearMap.zero(cm.G.space, cm.A.space))).ok


def test_unrelated_homotopy_fails_alpha():
    cm = adjoint_sl2()
    phi = Lie2Morphism.identity(cm)
    h = GradedLinearMap.identity(cm.G.space)
    rep = check_homotopy(Lie2Homotopy(phi, phi, h))
    assert "alpha-G" in rep.tags()


# inversion

def test_invert_identity():
    cm = adjoint_sl2()
    phi = Lie2Morphism.identity(cm)
    zero = GradedLinearMap.zero(cm.G.space, cm.A.space)
    psi = invert_lie2_morphism(phi, phi.phi1A, phi.phi1G, zero, zero)
    assert psi == phi


@given(seeds)
def test_inversion_identities(seed):
    inst = random_inversion_instance(rng_of(seed))
    psi = invert_lie2_morphism(inst.phi, inst.psi1A, inst.psi1G, inst.h, inst.hprime)
    assert inversion_constraints(inst.phi, psi, inst.h, inst.hprime).ok
    assert check_lie2_morphism(psi).ok


def test_inversion_rejects_bad_data():
    cm = adjoint_sl2()
    phi = Lie2Morphism.identity(cm)
    zero = GradedLinearMap.zero(cm.G.space, cm.A.space)
    with pytest.raises(NotAChainHomotopyInverse):
        invert_lie2_morphism(phi, phi.phi1A.scale(2), phi.phi1G.scale(2), zero, zero)


# two-term cohomology

def test_two_term_cohomology_acyclic_and_zero():
    assert all(v == (0, 0) for v in two_term_cohomology(contractible_cm({0: 2, 1: 1})).values())
    cm = abelian_cm({1: 2}, {0: 3})
    assert two_term_cohomology(cm) == {0: (2, 3)}


@given(seeds)
def test_two_term_cohomology_rank_nullity(seed):
    cm = random_crossed_module(rng_of(seed))
    for k, (ker, coker) in two_term_cohomology(cm).items():
        assert ker == kernel(cm.d.block(k + 1)).ncols
        assert coker == cm.G.space.dim(k) - rank(cm.d.block(k))


def test_cyclic_condition_sign():
    # a homotoped basis change satisfies the derived sign and violates the opposite one
    rng = rng_of(47)
    cm = random_crossed_module(rng, RandomConfig(-1, 2, 2))
    cm2, iso = random_basis_change(rng, cm)
    phi, _ = random_homotoped(rng, iso)
    assert check_lie2_morphism(phi).ok
    x, y = (0, 0), (1, 0)
    assert not cyclic_defect(phi, x, y, y, 1)
    assert cyclic_defect(phi, x, y, y, -1)
