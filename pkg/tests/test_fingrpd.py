"""Finite groupoids: nerves, cohomology, pullbacks and the partition-of-unity inverse."""
import pytest
from hypothesis import given

from conftest import rng_of, seeds
from hsw.fingrpd import (Cochain, CoveredSurjection, FiniteGroupoid, check_covered_surjection, check_functor,
                         check_groupoid, check_partition_inverse, coboundary, cohomology_dims, cyclic_group,
                         pair_groupoid, partition_inverse, pullback_cochain_matrix, pullback_groupoid,
                         random_covered_surjection, random_groupoid, section_maps, symmetric_group,
                         transitive_groupoid, truncated_two_term, unit_groupoid)
from hsw.linalg import Matrix, q
from hsw.report import NotSurjective


def test_basic_groupoids_valid():
    assert check_groupoid(unit_groupoid(3)).ok
    assert check_groupoid(pair_groupoid(2)).ok
    assert check_groupoid(symmetric_group(3)).ok


def test_redirected_composite_breaks_associativity():
    # pair groupoid on two objects times Z/2; (1,0,2)(2,0,1) is sent to (1,1,1) instead of the unit
    g = transitive_groupoid([1, 2], cyclic_group(2))
    comp = dict(g.comp)
    a, b = g.arrows.index((1, 0, 2)), g.arrows.index((2, 0, 1))
    comp[(a, b)] = g.arrows.index((1, 1, 1))
    rep = check_groupoid(FiniteGroupoid(g.objects, g.arrows, g.src, g.tgt, g.unit, g.inv, comp))
    assert "associativity" in rep.tags()


# nerve

@pytest.mark.parametrize("n,p", [(2, 1), (2, 3), (3, 2)])
def test_pair_nerve_count(n, p):
    assert len(pair_groupoid(n).nerve(p)) == n ** (p + 1)


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_unit_and_group_nerves(p):
    assert len(unit_groupoid(4).nerve(p)) == 4
    assert len(cyclic_group(3).nerve(p)) == 3 ** p


# coboundary and cohomology

def test_constant_is_cocycle():
    g = pair_groupoid(3)
    assert not any(coboundary(g, Cochain.from_function(g, 0, lambda m: 5)).values)


def test_indicator_coboundary():
    g = pair_groupoid(2)
    f = Cochain.from_function(g, 0, lambda m: 1 if g.objects[m] == 1 else 0)
    df = coboundary(g, f)
    vals = {g.arrows[c[0]]: df.values[i] for i, c in enumerate(g.nerve(1))}
    assert vals == {(1, 1): 0, (1, 2): -1, (2, 1): 1, (2, 2): 0}


@given(seeds)
def test_delta_squared(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 4, 12)
    c = Cochain.from_function(g, 1, lambda _: rng.randint(-3, 3))
    assert not any(coboundary(g, coboundary(g, c)).values)


def test_cohomology_oracles():
    assert cohomology_dims(pair_groupoid(3), 3) == [1, 0, 0, 0]
    assert cohomology_dims(unit_groupoid(3), 3) == [3, 0, 0, 0]
    assert cohomology_dims(cyclic_group(2), 2) == [1, 0, 0]


# pullbacks

def test_identity_pullback_is_copy():
    g = pair_groupoid(3)
    pb = pullback_groupoid(g, g.objects, {o: o for o in g.objects})
    assert pb.groupoid.n_arrows == g.n_arrows
    assert check_functor(pb.groupoid, g, pb.phi, pb.proj).ok


def test_fold_over_units_gives_pair_bands():
    g = unit_groupoid(2)
    X = [(m, k) for m in range(2) for k in range(2)]
    pb = pullback_groupoid(g, X, lambda x: x[0])
    assert pb.groupoid.n_arrows == 8
    assert cohomology_dims(pb.groupoid, 2) == [2, 0, 0]


@given(seeds)
def test_pullback_counting(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 4, 20)
    cs = random_covered_surjection(rng, g)
    pb = pullback_groupoid(g, range(cs.n_points), lambda x: g.objects[cs.phi[x]])
    fib = [cs.phi.count(m) for m in range(g.n_objects)]
    assert pb.groupoid.n_arrows == sum(fib[g.tgt[a]] * fib[g.src[a]] for a in range(g.n_arrows))
    assert check_groupoid(pb.groupoid).ok
    assert cohomology_dims(pb.groupoid, 2) == cohomology_dims(g, 2)


def test_pullback_needs_surjection():
    with pytest.raises(NotSurjective):
        pullback_groupoid(pair_groupoid(2), [0], lambda x: 1)


# truncated complex

def test_truncated_two_term():
    assert truncated_two_term(pair_groupoid(2)).dims == (2, 1)
    assert truncated_two_term(pair_groupoid(2)).cohomology() == (1, 0)
    assert truncated_two_term(unit_groupoid(3)).dims == (3, 0)
    assert truncated_two_term(cyclic_group(3)).dims == (1, 0)


# covered surjections

def fold_cover(g, weights=None):
    """X = two copies of M with global sections into both copies."""
    n = g.n_objects
    phi = tuple(list(range(n)) * 2)
    secs = ({m: m for m in range(n)}, {m: n + m for m in range(n)})
    w = weights or ((q(1),) * n, (q(0),) * n)
    return CoveredSurjection(phi, (frozenset(range(n)),) * 2, secs, w)


def test_sigma_hat_table_for_fold_cover():
    g = pair_groupoid(2)
    cs = fold_cover(g)
    sig, tau = section_maps(g, cs, 0, 1)
    pb = pullback_groupoid(g, range(4), lambda x: g.objects[cs.phi[x]])
    labels = {g.arrows[a]: pb.groupoid.arrows[b] for a, b in sig.items()}
    assert labels == {(1, 1): (2, (1, 1), 0), (1, 2): (2, (1, 2), 1),
                      (2, 1): (3, (2, 1), 0), (2, 2): (3, (2, 2), 1)}
    assert {x: pb.groupoid.arrows[b] for x, b in tau.items()} == {
        0: (0, (1, 1), 0), 1: (1, (2, 2), 1), 2: (2, (1, 1), 0), 3: (3, (2, 2), 1)}


def test_global_section_left_inverse():
    g = pair_groupoid(2)
    cs = fold_cover(g)
    pi = partition_inverse(g, cs)
    assert pi.I0 @ pullback_cochain_matrix(pi.pullback, 0) == Matrix.eye(2)
    assert check_partition_inverse(g, cs, pi).ok


def test_half_half_weights_on_four_objects():
    g = pair_groupoid(4)
    half = (q("1/2"),) * 4
    cs = fold_cover(g, (half, half))
    assert check_covered_surjection(g, cs).ok
    pi = partition_inverse(g, cs)
    assert pi.I0 @ pullback_cochain_matrix(pi.pullback, 0) == Matrix.eye(4)
    assert check_partition_inverse(g, cs, pi).ok


@given(seeds)
def test_partition_inverse_random(seed):
    rng = rng_of(seed)
    g = random_groupoid(rng, 6, 30)
    cs = random_covered_surjection(rng, g)
    assert check_partition_inverse(g, cs).ok


def test_bad_weights_detected():
    g = pair_groupoid(2)
    cs = fold_cover(g, ((q(1), q(1)), (q(1), q(0))))
    assert "partition-of-unity" in check_covered_surjection(g, cs).tags()
