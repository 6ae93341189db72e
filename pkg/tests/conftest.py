import random
from fractions import Fraction

from hypothesis import settings, strategies as st

from hsw.linalg import Matrix

settings.register_profile("hsw", max_examples=40, deadline=None)
settings.load_profile("hsw")

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def matrices(draw, m=None, n=None, max_dim=4):
    m = draw(st.integers(1, max_dim)) if m is None else m
    n = draw(st.integers(1, max_dim)) if n is None else n
    rows = draw(st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=m, max_size=m))
    return Matrix(rows, n)


seeds = st.integers(0, 2**32 - 1)


def rng_of(seed: int) -> random.Random:
    return random.Random(seed)


def naive_product(a, b):
    """Triple-loop product over Fraction, independent of the library code."""
    fa = [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in a.rows]
    fb = [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in b.rows]
    return [[sum((fa[i][k] * fb[k][j] for k in range(a.ncols)), Fraction(0)) for j in range(b.ncols)]
            for i in range(a.nrows)]
