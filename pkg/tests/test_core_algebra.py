"""Exact linear algebra, graded maps, exterior algebra and the JSON layer."""
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import matrices, naive_product, rng_of, seeds
from hsw import io
from hsw.graded import (ExteriorElement, GradedLinearMap, GradedVectorSpace, glm_compose, shift_space, sp_add,
                        sp_scale, wedge)
from hsw.linalg import Matrix, ShapeMismatch, det, inverse, kernel, q, rank, solve
from hsw.random_instances import rand_graded_map, rand_invertible


def E(n, terms):
    return ExteriorElement.of(n, terms)


# linear algebra

@given(matrices())
def test_rank_nullity(a):
    K = kernel(a)
    assert rank(a) + K.ncols == a.ncols
    assert (a @ K).is_zero()


@given(st.integers(1, 4).flatmap(lambda k: st.tuples(matrices(n=k), matrices(m=k))))
def test_product_matches_naive(pair):
    a, b = pair
    got = [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in (a @ b).rows]
    assert got == naive_product(a, b)


@given(seeds)
def test_inverse_and_det(seed):
    p = rand_invertible(rng_of(seed), 4)
    assert p @ inverse(p) == Matrix.eye(4)
    assert det(p) * det(inverse(p)) == 1


@given(matrices(), seeds)
def test_solve_consistent(a, seed):
    x0 = Matrix([[q(seed % 7 - 3)] for _ in range(a.ncols)], 1)
    b = a @ x0
    x = solve(a, b)
    assert x is not None and a @ x == b


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        Matrix.eye(2) @ Matrix.eye(3)


# graded maps

def test_compose_with_identity():
    V = GradedVectorSpace.of({0: 2, 1: 1})
    f = rand_graded_map(rng_of(1), V, V)
    assert glm_compose(f, GradedLinearMap.identity(V)) == f
    assert glm_compose(GradedLinearMap.identity(V), f) == f


def test_compose_scalars():
    V = GradedVectorSpace.of({0: 1})
    f = GradedLinearMap.of(V, V, 0, {0: Matrix([[2]])})
    g = GradedLinearMap.of(V, V, 0, {0: Matrix([[3]])})
    assert glm_compose(f, g).block(0) == Matrix([[6]])


@given(seeds)
def test_compose_blockwise_naive(seed):
    rng = rng_of(seed)
    U = GradedVectorSpace.of({0: rng.randint(1, 3), 1: rng.randint(1, 3)})
    V = GradedVectorSpace.of({0: rng.randint(1, 3), 1: rng.randint(1, 3)})
    W = GradedVectorSpace.of({0: rng.randint(1, 3), 1: rng.randint(1, 3)})
    f, g = rand_graded_map(rng, V, W), rand_graded_map(rng, U, V)
    c = glm_compose(f, g)
    for d in (0, 1):
        got = [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in c.block(d).rows]
        assert got == naive_product(f.block(d), g.block(d))


def test_apply_is_linear():
    V = GradedVectorSpace.of({0: 2, 1: 2})
    f = rand_graded_map(rng_of(3), V, V)
    x, y = {(0, 0): q(1), (1, 1): q(2)}, {(0, 1): q(-1)}
    assert f(sp_add(x, sp_scale(3, y))) == sp_add(f(x), sp_scale(3, f(y)))


def test_shift_space():
    V = GradedVectorSpace.of({2: 3})
    assert shift_space(V, 1).dims == {1: 3}
    assert shift_space(V, 0) == V
    assert shift_space(shift_space(V, 1), -1) == V


# exterior algebra

def test_wedge_small_cases():
    e1, e2 = ExteriorElement.generator(3, 0), ExteriorElement.generator(3, 1)
    assert wedge(e1, e1).terms == {}
    assert wedge(e1, e2).terms == {(0, 1): 1}
    assert wedge(e2, e1).terms == {(0, 1): -1}


def test_wedge_multilinearity_oracle():
    # (e1 + e2) ^ e3 ^ e2 = e1 e3 e2 = -e123
    a = E(3, {(0,): 1, (1,): 1})
    out = wedge(wedge(a, ExteriorElement.generator(3, 2)), ExteriorElement.generator(3, 1))
    assert out.terms == {(0, 1, 2): -1}


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_wedge_graded_commutativity(i, j):
    a, b = E(4, {tuple(i): 1}), E(4, {tuple(j): 1})
    sign = -1 if (len(i) * len(j)) % 2 else 1
    assert wedge(a, b) == wedge(b, a).scale(sign)


# serialization

def test_rational_roundtrip():
    assert io.dec_q(io.enc_q(q("-7/3"))) == q("-7/3")
    assert io.enc_q(q(5)) == "5"


@given(matrices())
def test_matrix_roundtrip(a):
    assert io.dec_matrix(io.loads(io.dumps(io.enc_matrix(a)))) == a


def test_document_schema_checked():
    doc = io.document("space", GradedVectorSpace.of({0: 1}))
    doc["schema"] = "other/9"
    with pytest.raises(io.SchemaError):
        io.parse_document(doc, "space")
    with pytest.raises(io.SchemaError):
        io.parse_document(io.document("space", GradedVectorSpace.of({0: 1})), "groupoid")
