"""Quasi-Poisson structures: frames, the conjugation model, rank and non-degeneracy."""
import pytest
from hypothesis import given, settings

from conftest import rng_of, seeds
from hsw.linalg import Matrix, q
from hsw.qpois import (FrameCalculus, abelian, alg_schouten, amm_structure, cartan_trivector, check_lie_algebra,
                       check_quasi_poisson, check_quasitriple, double_quasitriple, exact_polyvector, group_point,
                       identity_point, matrix_lie_algebra, nondegenerate_at, orbit_point, phi_from_pairing,
                       quasi_poisson_group, random_bivector, random_sl2_point, random_so3_point, rank_at,
                       rank_twist_invariance, schouten, signature, sl2, so3, twist_framed)
from hsw.report import DegenerateForm, FrameMismatch, PointNotInGroup
from hsw.scalars import ScalarBackend

FLOAT = ScalarBackend("float")


@pytest.fixture(scope="module")
def amm():
    return amm_structure(sl2())


def sl2_pair(rng):
    g = sl2()
    return group_point(g, random_sl2_point(rng)), group_point(g, random_sl2_point(rng))


# algebras and the Manin double

def test_algebras_valid():
    for g in (sl2(), so3(), abelian(2)):
        assert check_lie_algebra(g).ok


def test_degenerate_form():
    g = matrix_lie_algebra("zero-form", sl2().basis, Matrix.zeros(3, 3))
    assert "K-nondegenerate" in check_lie_algebra(g).tags()
    with pytest.raises(DegenerateForm):
        g.K_inv


def test_cartan_trivector_values():
    # trace form on (h, e, f): K(h, h) = 2, K(e, f) = 1, so phi(h, e, f) = -1/4
    assert cartan_trivector(sl2()) == {(0, 1, 2): q("-1/4")}
    # so(3) with an orthonormal basis and [L1, L2] = L3
    assert cartan_trivector(so3()) == {(0, 1, 2): q("1/4")}
    assert cartan_trivector(abelian(3)) == {}


@pytest.mark.parametrize("make", [sl2, so3])
def test_double_recovers_cartan(make):
    g = make()
    t = double_quasitriple(g)
    assert check_quasitriple(t).ok
    assert signature(t.form) == (3, 3, 0)
    assert phi_from_pairing(t) == cartan_trivector(g)


def test_signature_small_cases():
    assert signature(Matrix([[0, 1], [1, 0]], 2)) == (1, 1, 0)
    assert signature(Matrix([[1, 0], [0, 0]], 2)) == (1, 0, 1)
    assert signature(Matrix.eye(3).scale(-2)) == (0, 3, 0)


# group points and frames

def test_point_not_in_group():
    g = sl2()
    with pytest.raises(PointNotInGroup):
        group_point(g, Matrix([[1, 0], [0, 0]], 2))
    with pytest.raises(PointNotInGroup):
        group_point(g, Matrix.eye(3))


def test_conjugation_leaving_the_span():
    # diagonal matrices are not stable under a shear
    g = abelian(2)
    with pytest.raises(PointNotInGroup):
        group_point(g, Matrix([[1, 1], [0, 1]], 2))


def test_frame_mismatch():
    g = sl2()
    d = amm_structure(g)
    e = identity_point(g)
    with pytest.raises(FrameMismatch):
        d.Pi.evaluate((e,))
    with pytest.raises(FrameMismatch):
        d.Pi + quasi_poisson_group(g).Pi


def test_frame_bracket_follows_structure_constants():
    g = sl2()
    c = FrameCalculus(g, 2)
    # [h, e] = 2e on either factor; factors commute
    assert c.frame_bracket(0, 1) == {1: 2}
    assert c.frame_bracket(3, 4) == {4: 2}
    assert c.frame_bracket(0, 4) == {}


def test_schouten_on_right_invariant_vectors():
    # coefficients are polynomials in Ad entries, so compare at group points
    g = sl2()
    c = FrameCalculus(g, 1)
    x, y = c.right(0, (1, 0, 0)), c.right(0, (0, 1, 0))
    for p in (identity_point(g), group_point(g, random_sl2_point(rng_of(5)))):
        assert (schouten(x, y) + schouten(y, x)).evaluate((p,)) == {}
        # [->h, ->e] = -2 ->e
        assert (schouten(x, y) + y.scale(2)).evaluate((p,)) == {}


def test_algebraic_schouten_of_e_wedge_f():
    assert alg_schouten(sl2(), {(1, 2): 1}, {(1, 2): 1}) == {(0, 1, 2): 2}


def test_exact_polyvector_vanishes_at_identity():
    g = sl2()
    d = amm_structure(g)
    T = {(0, 1): q(1), (1, 2): q(3)}
    e = identity_point(g)
    s = group_point(g, Matrix([[2, 1], [1, 1]], 2))
    assert exact_polyvector(d.model, T).evaluate((e, e)) == {}
    assert exact_polyvector(d.model, T).evaluate((s, e)) != {}


# the conjugation model

def test_amm_bivector_at_identity(amm):
    e = identity_point(sl2())
    assert amm.Pi.evaluate((e, e)) == {(0, 3): q("1/2"), (2, 4): q(1), (1, 5): q(1)}


@given(seeds)
@settings(max_examples=5)
def test_amm_is_quasi_poisson_at_random_points(amm, seed):
    assert check_quasi_poisson(amm, [sl2_pair(rng_of(seed))]).ok


def test_wrong_trivector_detected(amm):
    bad = type(amm)(amm.model, amm.Pi, {(0, 1, 2): q("1/4")})
    assert "pi-pi" in check_quasi_poisson(bad, [sl2_pair(rng_of(1))]).tags()


@given(seeds)
@settings(max_examples=5)
def test_rank_zero_nondegenerate_and_orbit(amm, seed):
    g = sl2()
    a, s = sl2_pair(rng_of(seed))
    r = rank_at(amm, s)
    assert r.rank == 0 and r.rank_dual_form == 0
    assert nondegenerate_at(amm, s)[0]
    assert rank_at(amm, orbit_point(a, s, g)).rank == 0


@given(seeds)
@settings(max_examples=3)
def test_twist_keeps_rank(amm, seed):
    rng = rng_of(seed)
    a, s = sl2_pair(rng)
    T = random_bivector(rng, sl2())
    rep, readings = rank_twist_invariance(amm, T, s, [(a, s)])
    assert rep.ok
    assert readings["rho_star_minus_rho_T"]


def test_twisted_structure_is_quasi_poisson(amm):
    rng = rng_of(2)
    pts = [sl2_pair(rng)]
    tw, rep = twist_framed(amm, {(1, 2): q(1)}, pts)
    assert rep.ok
    assert check_quasi_poisson(tw, pts).ok


def test_so3_conjugation_model():
    g = so3()
    d = amm_structure(g)
    rng = rng_of(3)
    pts = [(group_point(g, random_so3_point(rng)), group_point(g, random_so3_point(rng)))]
    assert check_quasi_poisson(d, pts).ok
    assert rank_at(d, pts[0][1]).rank == 0


# group over a point

def test_group_over_point():
    g = sl2()
    d = quasi_poisson_group(g)
    assert check_quasi_poisson(d, [(group_point(g, random_sl2_point(rng_of(4))),)]).ok
    r = rank_at(d)
    nd, cert = nondegenerate_at(d)
    assert r.rank == -3 and not nd and cert.dim_stack == -3


# float backend

def test_float_backend_agrees(amm):
    g = sl2()
    pts = [(group_point(g, [[1, 0.3], [0.2, 1.06]], FLOAT), group_point(g, [[2, 1], [1, 1]], FLOAT))]
    assert check_quasi_poisson(amm, pts, FLOAT).ok
    r = rank_at(amm, pts[0][1], FLOAT)
    assert r.rank == 0 and r.nondegenerate


def test_float_backend_rejects_singular_point():
    with pytest.raises(PointNotInGroup):
        group_point(sl2(), [[1, 2], [2, 4]], FLOAT)


def test_backend_validation():
    with pytest.raises(ValueError):
        ScalarBackend("complex")
    with pytest.raises(ValueError):
        ScalarBackend("float", 0.0)
