"""Homotopy modules (2-term representations up to homotopy) and the VB dictionary."""
from hypothesis import given, settings

from conftest import rng_of, seeds
from hsw.fingrpd import pair_groupoid, random_groupoid
from hsw.homrep import (HM2Morphism, HomotopyModule2, ModuleCochain, apply_D, build_D, check_hm2_homotopy,
                        check_hm2_morphism, check_homotopy_module, compose_hm2, decomposition_gauge,
                        default_decomposition, from_split_vb, gauge_relations, homotopy_as_morphism,
                        identity_module_equivalence, module_witness_from_vb, morita_module_witness,
                        pulled_module_iso, random_gauge, random_module, random_strict_module, random_vb_equivalence,
                        redecompose, same_module, split_iso, to_split_vb, vb_morphism_to_hm2)
from hsw.linalg import Matrix, q
from hsw.random_instances import rand_matrix
from hsw.suites import _pullback_data
from hsw.vbgrpd import (apply_vb_homotopy, check_vb_groupoid, check_vb_morphism, compose_vb, fold_map,
                        pullback_witness, random_transport)

heavy = settings(max_examples=6)


def small(seed):
    rng = rng_of(seed)
    return rng, random_groupoid(rng, 2, 6)


def line_module(g, rho_scale):
    """``C = E = Q`` over ``g`` with identity actions; ``rho_scale[x]`` is the anchor at ``x``."""
    n = g.n_objects
    one = Matrix.eye(1)
    return HomotopyModule2(g, (1,) * n, (1,) * n, tuple(Matrix([[q(r)]]) for r in rho_scale),
                           (one,) * g.n_arrows, (one,) * g.n_arrows,
                           {k: Matrix.zeros(1, 1) for k in g.comp})


# module axioms

def test_zero_module():
    assert check_homotopy_module(HomotopyModule2.zero(pair_groupoid(2))).ok


def test_line_module_axiom_1():
    g = pair_groupoid(2)
    assert check_homotopy_module(line_module(g, [1, 1])).ok
    assert "axiom-1" in check_homotopy_module(line_module(g, [2, 1])).tags()


def test_omega_must_satisfy_axiom_2():
    g = pair_groupoid(2)
    m = line_module(g, [1, 1])
    a = g.arrows.index((1, 2))
    b = g.arrows.index((2, 1))
    om = dict(m.Omega)
    om[(a, b)] = Matrix([[1]])
    bad = HomotopyModule2(g, m.cdims, m.edims, m.rho, m.RE, m.RC, om)
    assert "axiom-2" in check_homotopy_module(bad).tags()


@given(seeds)
@heavy
def test_random_modules_valid(seed):
    rng, g = small(seed)
    assert check_homotopy_module(random_strict_module(rng, g)).ok
    assert check_homotopy_module(random_module(rng, g)).ok


# structure operator

@given(seeds)
@settings(max_examples=4)
def test_D_squared_and_leibniz(seed):
    rng, g = small(seed)
    D = build_D(random_module(rng, g), 3, rng)
    assert D.report.ok


def test_D_on_line_module_degree_minus_one():
    # c = indicator of the first object; D c = (c_t - c_s on arrows, rho c at objects)
    g = pair_groupoid(2)
    m = line_module(g, [1, 1])
    f = ModuleCochain(-1, {0: (q(1),), 1: (q(0),)}, {})
    Df = apply_D(m, f)
    assert Df.n == 0
    assert {g.arrows[c[0]]: v[0] for c, v in Df.fC.items()} == {(1, 1): 0, (1, 2): 1, (2, 1): -1, (2, 2): 0}
    assert Df.fE == {0: (q(1),), 1: (q(0),)}


# dictionary

@given(seeds)
@heavy
def test_split_roundtrip(seed):
    rng, g = small(seed)
    m = random_module(rng, g)
    v, dec = to_split_vb(m)
    assert check_vb_groupoid(v).ok
    assert same_module(m, from_split_vb(v, dec))


@given(seeds)
@heavy
def test_transported_split_iso_and_gauge(seed):
    rng, g = small(seed)
    v, _ = to_split_vb(random_module(rng, g))
    vt, _ = random_transport(rng, v)
    dec = default_decomposition(vt)
    m = from_split_vb(vt, dec)
    assert check_homotopy_module(m).ok
    _, iso = split_iso(vt, dec, m)
    assert check_vb_morphism(iso).ok and iso.is_invertible()
    d2 = redecompose(vt, dec, random_gauge(rng, vt))
    gauge = decomposition_gauge(vt, dec, d2)
    assert check_hm2_morphism(gauge).ok
    assert gauge_relations(gauge).ok


def test_zero_gauge_is_identity():
    rng, g = small(3)
    v, dec = to_split_vb(random_module(rng, g))
    mu = [Matrix.zeros(v.cdims[g.tgt[a]], v.edims[g.src[a]]) for a in range(g.n_arrows)]
    gauge = decomposition_gauge(v, dec, redecompose(v, dec, mu))
    assert all(x.is_zero() for x in gauge.mu)
    assert same_module(gauge.source, gauge.target)


@given(seeds)
@heavy
def test_vb_morphisms_and_homotopies_transfer(seed):
    rng, g = small(seed)
    eq = random_vb_equivalence(rng, g)
    v1, v2 = eq.phi.source, eq.phi.target
    d1, d2 = default_decomposition(v1), default_decomposition(v2)
    F = vb_morphism_to_hm2(eq.phi, d1, d2)
    G = vb_morphism_to_hm2(eq.psi, d2, d1)
    assert check_hm2_morphism(F).ok and check_hm2_morphism(G).ok
    GF = compose_hm2(G, F)
    assert check_hm2_homotopy(GF, HM2Morphism.identity(F.source), eq.h1).ok
    GF2 = vb_morphism_to_hm2(compose_vb(eq.psi, eq.phi), d1, d1, F.source, F.source)
    assert GF2.phiC == GF.phiC and GF2.phiE == GF.phiE and GF2.mu == GF.mu


@given(seeds)
@heavy
def test_homotopy_as_morphism_matches_vb(seed):
    rng, g = small(seed)
    eq = random_vb_equivalence(rng, g)
    v1, v2 = eq.phi.source, eq.phi.target
    d1, d2 = default_decomposition(v1), default_decomposition(v2)
    m1, m2 = from_split_vb(v1, d1), from_split_vb(v2, d2)
    h = tuple(rand_matrix(rng, v2.cdims[m], v1.edims[m], 2) for m in range(g.n_objects))
    J = vb_morphism_to_hm2(apply_vb_homotopy(v1, v2, h), d1, d2, m1, m2)
    H = homotopy_as_morphism(m1, m2, h)
    assert J.phiC == H.phiC and J.phiE == H.phiE and J.mu == H.mu


# pullbacks and Morita witnesses

@given(seeds)
@heavy
def test_pullback_commutes_with_dictionary(seed):
    rng, g = small(seed)
    v, _ = to_split_vb(random_module(rng, g))
    dec = default_decomposition(v)
    X, phi = fold_map(g)
    pm, n, iso, _ = pulled_module_iso(v, dec, X, phi)
    assert check_homotopy_module(pm).ok and check_homotopy_module(n).ok
    assert check_hm2_morphism(iso).ok


@given(seeds)
@settings(max_examples=4)
def test_module_witnesses(seed):
    rng, g = small(seed)
    v, _ = to_split_vb(random_module(rng, g))
    dec = default_decomposition(v)
    m = from_split_vb(v, dec)
    X = tuple(g.objects)
    ident = {o: o for o in X}
    assert morita_module_witness(m, m, X, ident, ident, tuple(range(g.n_arrows)),
                                 identity_module_equivalence(m, X, ident)).ok
    Xp, phi, ex, ph = _pullback_data(rng, v)
    w, wit = pullback_witness(v, Xp, phi, ex, ph)
    ma, mb, meq = module_witness_from_vb(v, dec, w, default_decomposition(w), wit)
    assert morita_module_witness(ma, mb, wit.X, wit.phi1, wit.phi2, wit.arrow_iso, meq).ok


def test_module_witness_rejects_wrong_source():
    g = pair_groupoid(2)
    m = line_module(g, [1, 1])
    X = tuple(g.objects)
    ident = {o: o for o in X}
    other = HomotopyModule2.zero(g)
    eq = identity_module_equivalence(other, X, ident)
    assert "source" in morita_module_witness(m, m, X, ident, ident, tuple(range(g.n_arrows)), eq).tags()

