"""Quasi-Poisson structures on matrix Lie groups in left-invariant frames.

Multivector fields on a product of ``nf`` copies of a matrix group ``G`` are
written in the left-invariant frame ``X_{f n + i} = <-e_i`` on factor ``f``.
Coefficients are polynomials in the entries of ``Ad_{g_f^{-1}}`` (variables
``A{f}_{jk}``) and ``Ad_{g_f}`` (``B{f}_{jk}``); left-invariant derivatives act by
``X_i(A) = -ad_{e_i} A`` and ``X_i(B) = B ad_{e_i}``, and right-invariant fields
expand as ``->x = sum_j (Ad_{g^{-1}} x)_j <-e_j``. Every identity is then an
identity of polynomials, checked exactly at rational group points.

Two groupoid models are provided: the conjugation groupoid ``G x G`` (factor 0
is the acting element, factor 1 the base point) carrying the AMM structure,
and a group over a point.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.rings import ring

from .graded import sort_sign
from .linalg import ONE, ZERO, Matrix, det, hstack, inverse, kernel, rank, solve, vstack
from .report import DegenerateForm, FrameMismatch, InvalidTriple, PointNotInGroup, ValidationReport
from .scalars import EXACT, ScalarBackend

# ---------------------------------------------------------------- Lie algebras


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return a @ b


def _trace(m: Matrix):
    return sum((m.rows[i][i] for i in range(m.nrows)), ZERO)


@dataclass(eq=False)
class MatrixLieAlgebra:
    """Lie algebra spanned by ``basis`` matrices, with invariant form ``K``."""

    name: str
    basis: tuple
    K: Matrix
    casimir: Optional[Matrix] = None

    @property
    def n(self) -> int:
        return len(self.basis)

    @property
    def d(self) -> int:
        return self.basis[0].nrows if self.basis else 0

    @cached_property
    def _flat(self) -> Matrix:
        cols = [tuple(x for r in b.rows for x in r) for b in self.basis]
        return Matrix.from_columns(cols, self.d * self.d)

    def coords(self, x: Matrix) -> Optional[tuple]:
        """Coordinates of a matrix in the basis, or ``None`` outside the span."""
        sol = solve(self._flat, Matrix.column([v for r in x.rows for v in r]))
        return None if sol is None else sol.col(0)

    @cached_property
    def structure(self) -> tuple:
        """``structure[i][j][k]``: coefficient of ``e_k`` in ``[e_i, e_j]``."""
        out = []
        for a in self.basis:
            row = []
            for b in self.basis:
                c = self.coords(a @ b - b @ a)
                if c is None:
                    raise InvalidTriple("basis does not span a Lie subalgebra")
                row.append(c)
            out.append(tuple(row))
        return tuple(out)

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        C, n = self.structure, self.n
        return tuple(sum((x[i] * y[j] * C[i][j][k] for i in range(n) for j in range(n) if x[i] and y[j]), ZERO)
                     for k in range(n))

    @cached_property
    def ad(self) -> tuple:
        """``ad[i]`` is the matrix of ``ad_{e_i}`` (column ``l`` = coordinates of ``[e_i, e_l]``)."""
        C, n = self.structure, self.n
        return tuple(Matrix([[C[i][l][j] for l in range(n)] for j in range(n)], n) for i in range(n))

    def form(self, x: Sequence, y: Sequence):
        return sum((x[i] * self.K.rows[i][j] * y[j] for i in range(self.n) for j in range(self.n)), ZERO)

    @cached_property
    def K_inv(self) -> Matrix:
        if det(self.K) == 0:
            raise DegenerateForm(f"form on {self.name} is degenerate")
        return inverse(self.K)


def trace_form(basis: Sequence[Matrix]) -> Matrix:
    n = len(basis)
    return Matrix([[_trace(basis[i] @ basis[j]) for j in range(n)] for i in range(n)], n)


def matrix_lie_algebra(name: str, basis: Sequence[Matrix], K: Optional[Matrix] = None,
                       casimir: Optional[Matrix] = None) -> MatrixLieAlgebra:
    return MatrixLieAlgebra(name, tuple(basis), K if K is not None else trace_form(basis), casimir)


def sl2() -> MatrixLieAlgebra:
    """``sl(2, Q)`` with basis ``(h, e, f)`` and the trace form."""
    h = Matrix([[1, 0], [0, -1]], 2)
    e = Matrix([[0, 1], [0, 0]], 2)
    f = Matrix([[0, 0], [1, 0]], 2)
    return matrix_lie_algebra("sl2", [h, e, f])


def so3() -> MatrixLieAlgebra:
    """``so(3)`` with the rotation basis and ``K = -tr/2`` (positive definite)."""
    def m(rows):
        return Matrix(rows, 3)
    L = [m([[0, 0, 0], [0, 0, -1], [0, 1, 0]]), m([[0, 0, 1], [0, 0, 0], [-1, 0, 0]]),
         m([[0, -1, 0], [1, 0, 0], [0, 0, 0]])]
    return matrix_lie_algebra("so3", L, trace_form(L).scale(QQ(-1, 2)))


def abelian(n: int) -> MatrixLieAlgebra:
    """Diagonal ``n x n`` matrices with the trace form (orthonormal basis)."""
    basis = [Matrix([[ONE if i == j == k else ZERO for j in range(n)] for i in range(n)], n) for k in range(n)]
    return matrix_lie_algebra(f"abelian{n}", basis)


def check_lie_algebra(g: MatrixLieAlgebra, nondegenerate: bool = True) -> ValidationReport:
    """Antisymmetry, Jacobi, symmetry and invariance of ``K`` (and ``det K != 0`` when flagged)."""
    rep = ValidationReport()
    n = g.n
    C = g.structure
    E = [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        rep.check("antisymmetry", (i, j), C[i][j], tuple(-x for x in C[j][i]))
    for i, j, k in itertools.combinations(range(n), 3):
        t = [g.bracket(E[i], g.bracket(E[j], E[k])), g.bracket(E[j], g.bracket(E[k], E[i])),
             g.bracket(E[k], g.bracket(E[i], E[j]))]
        rep.check("jacobi", (i, j, k), tuple(a + b + c for a, b, c in zip(*t)), (ZERO,) * n)
    rep.check("K-symmetric", None, g.K, g.K.T())
    for i, j, k in itertools.product(range(n), repeat=3):
        lhs = g.form(g.bracket(E[i], E[j]), E[k]) + g.form(E[j], g.bracket(E[i], E[k]))
        if lhs != 0:
            rep.add("K-invariant", (i, j, k), lhs, 0)
            break
    if nondegenerate and det(g.K) == 0:
        rep.add("K-nondegenerate", None, 0, "nonzero determinant")
    return rep


# ---------------------------------------------------------------- group points


@dataclass(eq=False)
class GroupPoint:
    """Invertible matrix with its adjoint matrices in the algebra basis."""

    matrix: object
    Ad: object
    Ad_inv: object


def group_point(g: MatrixLieAlgebra, mat, backend: ScalarBackend = EXACT) -> GroupPoint:
    """Exact for rational entries; the float backend accepts any real entries."""
    if backend.exact:
        M = mat if isinstance(mat, Matrix) else Matrix(mat, g.d)
        if M.shape != (g.d, g.d) or det(M) == 0:
            raise PointNotInGroup("point must be an invertible matrix of the representation size")
        Mi = inverse(M)
        cols = []
        for b in g.basis:
            c = g.coords(M @ b @ Mi)
            if c is None:
                raise PointNotInGroup("conjugation leaves the span of the basis")
            cols.append(c)
        Ad = Matrix.from_columns(cols, g.n)
        return GroupPoint(M, Ad, inverse(Ad))
    import numpy as np
    M = np.array(mat, dtype=float)
    if M.shape != (g.d, g.d) or abs(np.linalg.det(M)) <= backend.tol:
        raise PointNotInGroup("point must be an invertible matrix of the representation size")
    Mi = np.linalg.inv(M)
    flat = np.array([[float(x) for x in r] for r in g._flat.rows])
    cols = []
    for b in g.basis:
        bm = np.array([[float(x) for x in r] for r in b.rows])
        target = (M @ bm @ Mi).reshape(-1)
        c, *_ = np.linalg.lstsq(flat, target, rcond=None)
        if np.max(np.abs(flat @ c - target), initial=0.0) > backend.tol:
            raise PointNotInGroup("conjugation leaves the span of the basis")
        cols.append(c)
    Ad = np.array(cols).T
    return GroupPoint(M, Ad, np.linalg.inv(Ad))


def identity_point(g: MatrixLieAlgebra) -> GroupPoint:
    return group_point(g, Matrix.eye(g.d))


def random_sl2_point(rng: random.Random, bound: int = 5) -> Matrix:
    while True:
        a, b, c = (QQ(rng.randint(-bound, bound), rng.randint(1, 4)) for _ in range(3))
        if a != 0:
            return Matrix([[a, b], [c, (1 + b * c) / a]], 2)


def random_so3_point(rng: random.Random, bound: int = 4) -> Matrix:
    """Rational rotation via the Cayley transform of a random skew matrix."""
    x, y, z = (QQ(rng.randint(-bound, bound), rng.randint(1, 3)) for _ in range(3))
    S = Matrix([[0, -z, y], [z, 0, -x], [-y, x, 0]], 3)
    eye = Matrix.eye(3)
    return (eye + S) @ inverse(eye - S)


def random_point(rng: random.Random, g: MatrixLieAlgebra) -> Matrix:
    if g.name == "sl2":
        return random_sl2_point(rng)
    if g.name == "so3":
        return random_so3_point(rng)
    if g.name.startswith("abelian"):
        return Matrix([[QQ(rng.choice([1, 2, 3, -1, -2]), rng.randint(1, 3)) if i == j else ZERO
                        for j in range(g.d)] for i in range(g.d)], g.d)
    raise ValueError(f"no random point generator for {g.name}")


# ---------------------------------------------------------------- frame calculus


class FrameCalculus:
    """Polyvector calculus on ``G^nf`` in the left-invariant frame."""

    def __init__(self, g: MatrixLieAlgebra, nfactors: int):
        self.g = g
        self.nf = nfactors
        n = g.n
        names = [f"{M}{f}_{j}{k}" for f in range(nfactors) for M in "AB" for j in range(n) for k in range(n)]
        self.ring, *gens = ring(",".join(names), QQ) if names else (None,)
        self._var = dict(zip(names, gens))
        ad = [[[g.structure[i][l][j] for l in range(n)] for j in range(n)] for i in range(n)]
        self._deriv = {}
        for f in range(nfactors):
            for i in range(n):
                d = {}
                for j in range(n):
                    for k in range(n):
                        d[self.A(f, j, k)] = -sum((ad[i][j][l] * self.A(f, l, k) for l in range(n)), self.ring.zero)
                        d[self.B(f, j, k)] = sum((self.B(f, j, l) * ad[i][l][k] for l in range(n)), self.ring.zero)
                self._deriv[f * n + i] = [(gens.index(v), dv) for v, dv in d.items() if dv]

    def A(self, f: int, j: int, k: int):
        return self._var[f"A{f}_{j}{k}"]

    def B(self, f: int, j: int, k: int):
        return self._var[f"B{f}_{j}{k}"]

    @property
    def dim(self) -> int:
        return self.nf * self.g.n

    def frame_bracket(self, a: int, b: int) -> dict:
        n = self.g.n
        fa, i = divmod(a, n)
        fb, j = divmod(b, n)
        if fa != fb:
            return {}
        C = self.g.structure
        return {fa * n + k: C[i][j][k] for k in range(n) if C[i][j][k]}

    def derive(self, a: int, p):
        """Left-invariant derivative of a coefficient along frame direction ``a``."""
        out = self.ring.zero
        gens = self.ring.gens
        for idx, dv in self._deriv[a]:
            pd = p.diff(gens[idx])
            if pd:
                out += pd * dv
        return out

    # ---- construction

    def zero(self, grade: int) -> "FramedPolyvector":
        return FramedPolyvector(self, grade, {})

    def constant(self, f: int, coeffs: Dict[tuple, object]) -> "FramedPolyvector":
        """Left-invariant polyvector ``<-a`` on factor ``f`` from ``{(i, j, ...): c}``."""
        n = self.g.n
        grade = len(next(iter(coeffs))) if coeffs else 0
        out = {}
        for idx, c in coeffs.items():
            _add(out, tuple(f * n + i for i in idx), self.ring(c))
        return FramedPolyvector(self, grade, out)

    def left(self, f: int, x: Sequence) -> "FramedPolyvector":
        n = self.g.n
        return FramedPolyvector(self, 1, {(f * n + j,): self.ring(x[j]) for j in range(n) if x[j]})

    def right(self, f: int, x: Sequence) -> "FramedPolyvector":
        """``->x`` on factor ``f``: left-frame coefficients ``Ad_{g_f^{-1}} x``."""
        n = self.g.n
        out = {}
        for j in range(n):
            c = sum((self.A(f, j, k) * x[k] for k in range(n) if x[k]), self.ring.zero)
            if c:
                out[(f * n + j,)] = c
        return FramedPolyvector(self, 1, out)

    def evaluation_values(self, points: Sequence[GroupPoint]) -> list:
        if len(points) != self.nf:
            raise FrameMismatch(f"expected {self.nf} group points, got {len(points)}")
        vals = []
        n = self.g.n
        for p in points:
            for M in (p.Ad_inv, p.Ad):
                rows = M.rows if isinstance(M, Matrix) else M
                for j in range(n):
                    for k in range(n):
                        vals.append(rows[j][k])
        return vals


def _add(P: dict, key: tuple, c) -> None:
    if not c:
        return
    s, k = sort_sign(key)
    if s == 0:
        return
    v = P.get(k)
    v = s * c if v is None else v + s * c
    if v:
        P[k] = v
    else:
        P.pop(k, None)


@dataclass(eq=False)
class FramedPolyvector:
    """``sum_I c_I X_I`` with sorted frame multi-indices and polynomial coefficients."""

    calc: FrameCalculus
    grade: int
    coeffs: dict

    def _same(self, other: "FramedPolyvector"):
        if self.calc is not other.calc:
            raise FrameMismatch("polyvectors live on different frames")

    def __add__(self, other: "FramedPolyvector") -> "FramedPolyvector":
        self._same(other)
        if self.grade != other.grade and self.coeffs and other.coeffs:
            raise FrameMismatch("grades differ")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            _add(out, k, v)
        return FramedPolyvector(self.calc, max(self.grade, other.grade), out)

    def __neg__(self) -> "FramedPolyvector":
        return FramedPolyvector(self.calc, self.grade, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "FramedPolyvector") -> "FramedPolyvector":
        return self + (-other)

    def scale(self, c) -> "FramedPolyvector":
        if not c:
            return FramedPolyvector(self.calc, self.grade, {})
        return FramedPolyvector(self.calc, self.grade, {k: v * c for k, v in self.coeffs.items()})

    def wedge(self, other: "FramedPolyvector") -> "FramedPolyvector":
        self._same(other)
        out = {}
        for I, f in self.coeffs.items():
            for J, g in other.coeffs.items():
                _add(out, I + J, f * g)
        return FramedPolyvector(self.calc, self.grade + other.grade, out)

    def evaluate(self, points: Sequence[GroupPoint], backend: ScalarBackend = EXACT) -> dict:
        """Frame coefficients at the given point (one group point per factor)."""
        vals = self.calc.evaluation_values(points)
        out = {}
        for k, p in self.coeffs.items():
            v = p(*vals) if backend.exact else _eval_float(p, vals)
            if not backend.is_zero(v):
                out[k] = v
        return out


def _eval_float(p, vals) -> float:
    total = 0.0
    for mon, c in p.terms():
        t = float(c)
        for v, e in zip(vals, mon):
            if e:
                t *= float(v) ** e
        total += t
    return total


def schouten(P: FramedPolyvector, Q: FramedPolyvector) -> FramedPolyvector:
    """Schouten bracket in the frame: frame brackets plus coefficient derivatives."""
    P._same(Q)
    calc = P.calc
    out = {}
    for I, f in P.coeffs.items():
        p = len(I)
        for J, g in Q.coeffs.items():
            qq = len(J)
            fg = f * g
            for k in range(p):
                for l in range(qq):
                    for c, cc in calc.frame_bracket(I[k], J[l]).items():
                        _add(out, (c,) + I[:k] + I[k + 1:] + J[:l] + J[l + 1:], fg * cc * (-1) ** (k + l))
            for k in range(p):
                dg = calc.derive(I[k], g)
                if dg:
                    _add(out, I[:k] + I[k + 1:] + J, f * dg * (-1) ** (p - 1 - k))
            for l in range(qq):
                df = calc.derive(J[l], f)
                if df:
                    _add(out, J[:l] + J[l + 1:] + I, -(-1) ** ((p - 1) * (qq - 1)) * g * df * (-1) ** (qq - 1 - l))
    return FramedPolyvector(calc, P.grade + Q.grade - 1, out)


def schouten_bracket_framed(P: FramedPolyvector, Q: FramedPolyvector, at: Sequence[Sequence[GroupPoint]],
                            backend: ScalarBackend = EXACT) -> list:
    """``[P, Q]`` evaluated at each supplied point."""
    R = schouten(P, Q)
    return [R.evaluate(pt, backend) for pt in at]


# ---------------------------------------------------------------- exterior algebra of g

Trivector = Dict[tuple, object]


def alg_schouten(g: MatrixLieAlgebra, a: dict, b: dict) -> dict:
    """Schouten bracket on the exterior algebra of ``g`` (via constant left-invariant fields)."""
    calc = _single_factor(g)
    R = schouten(calc.constant(0, a), calc.constant(0, b)) if a and b else calc.zero(0)
    return {k: QQ.convert(v.LC) if hasattr(v, "LC") else v for k, v in R.coeffs.items()}


_SINGLE = {}


def _single_factor(g: MatrixLieAlgebra) -> FrameCalculus:
    key = id(g)
    if key not in _SINGLE or _SINGLE[key][0] is not g:
        _SINGLE[key] = (g, FrameCalculus(g, 1))
    return _SINGLE[key][1]


def cartan_trivector(g: MatrixLieAlgebra) -> dict:
    """Trivector dual to ``(x, y, z) -> K(x, [y, z]) / 4`` (indices raised with ``K^-1``)."""
    Ki = g.K_inv
    n = g.n
    col = [Ki.col(a) for a in range(n)]
    out = {}
    for a, b, c in itertools.combinations(range(n), 3):
        v = QQ(1, 4) * g.form(col[a], g.bracket(col[b], col[c]))
        if v:
            out[(a, b, c)] = v
    return out


def trivector_full(t: dict, n: int) -> dict:
    """All index orderings of a sorted-key exterior element (for antisymmetry checks)."""
    out = {}
    for k, v in t.items():
        for perm in itertools.permutations(range(len(k))):
            idx = tuple(k[p] for p in perm)
            s, _ = sort_sign(idx)
            out[idx] = s * v
    return out


@dataclass(eq=False)
class DoubleQuasiTriple:
    """``d = g + g`` with form ``K + (-K)``, diagonal ``Delta`` and complement ``Delta_-``."""

    g: MatrixLieAlgebra
    form: Matrix
    diagonal: Matrix  # columns (e_i, e_i)
    complement: Matrix  # columns dual to the diagonal: (u_a, -u_a), u_a = K^-1 eps^a / 2

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        n = self.g.n
        return self.g.bracket(x[:n], y[:n]) + self.g.bracket(x[n:], y[n:])

    def pair(self, x: Sequence, y: Sequence):
        return sum((x[i] * self.form.rows[i][j] * y[j] for i in range(len(x)) for j in range(len(y))), ZERO)


def signature(m: Matrix) -> tuple:
    """``(positive, negative, zero)`` counts of a symmetric rational matrix by congruence."""
    rows = [list(r) for r in m.rows]
    n = len(rows)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if rows[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and rows[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(n):
                rows[i][k] += rows[j][k]
            for k in range(n):
                rows[k][i] += rows[k][j]
            piv = i
        d = rows[piv][piv]
        pos, neg = (pos + 1, neg) if d > 0 else (pos, neg + 1)
        active.remove(piv)
        for i in active:
            f = rows[i][piv] / d
            if f:
                for k in range(n):
                    rows[i][k] -= f * rows[piv][k]
                for k in range(n):
                    rows[k][i] -= f * rows[k][piv]
    return pos, neg, n - pos - neg


def double_quasitriple(g: MatrixLieAlgebra) -> DoubleQuasiTriple:
    n = g.n
    Ki = g.K_inv
    form = vstack(hstack(g.K, Matrix.zeros(n, n)), hstack(Matrix.zeros(n, n), -g.K))
    diag = vstack(Matrix.eye(n), Matrix.eye(n))
    half = Ki.scale(QQ(1, 2))
    comp = vstack(half, -half)
    return DoubleQuasiTriple(g, form, diag, comp)


def check_quasitriple(t: DoubleQuasiTriple) -> ValidationReport:
    rep = ValidationReport()
    n = t.g.n
    F = t.form
    rep.check("diagonal-isotropic", None, (t.diagonal.T() @ F @ t.diagonal).is_zero(), True)
    rep.check("complement-isotropic", None, (t.complement.T() @ F @ t.complement).is_zero(), True)
    rep.check("complementary", None, rank(hstack(t.diagonal, t.complement)), 2 * n)
    rep.check("dual-pairing", None, t.diagonal.T() @ F @ t.complement, Matrix.eye(n))
    pos, neg, zero = signature(F)
    rep.check("signature", None, (pos, neg, zero), (n, n, 0))
    for i, j in itertools.combinations(range(n), 2):
        br = t.bracket(t.diagonal.col(i), t.diagonal.col(j))
        if solve(t.diagonal, Matrix.column(br)) is None:
            rep.add("diagonal-subalgebra", (i, j), None, None)
    return rep


def phi_from_pairing(t: DoubleQuasiTriple) -> dict:
    """``phi(xi, eta, zeta) = <[xi, eta], zeta>`` on the complement, identified with ``g^*``."""
    rep = check_quasitriple(t)
    if not rep.ok:
        raise InvalidTriple(str(rep[0]))
    n = t.g.n
    cols = [t.complement.col(a) for a in range(n)]
    out = {}
    for a, b, c in itertools.combinations(range(n), 3):
        v = t.pair(t.bracket(cols[a], cols[b]), cols[c])
        if v:
            out[(a, b, c)] = v
    return out


def dressing_class(g_prime: Matrix, g0: Matrix) -> Matrix:
    """``D/G -> G``, ``[(g', g)] -> g' g^-1``."""
    return g_prime @ inverse(g0)


# ---------------------------------------------------------------- groupoid models


class ConjugationGroupoid:
    """``G x G => G``, arrow ``(g, s)`` (factor 0 acting, factor 1 base point)."""

    name = "conjugation"

    def __init__(self, g: MatrixLieAlgebra):
        self.g = g
        self.calc = FrameCalculus(g, 2)

    @property
    def dim_base(self) -> int:
        return self.g.n

    def left_field(self, x: Sequence) -> FramedPolyvector:
        c = self.calc
        return c.left(0, x) + c.left(1, x) - c.right(1, x)

    def right_field(self, x: Sequence) -> FramedPolyvector:
        return self.calc.right(0, x)

    def unit(self, s: GroupPoint) -> tuple:
        return (identity_point(self.g), s)

    def arrow(self, a: GroupPoint, s: GroupPoint) -> tuple:
        return (a, s)

    def rho(self, s: GroupPoint, backend: ScalarBackend = EXACT):
        """``rho(xi)|_s = Ad_{s^-1} xi - xi`` in the left frame at ``s``."""
        n = self.g.n
        if backend.exact:
            return s.Ad_inv - Matrix.eye(n)
        import numpy as np
        return np.asarray(s.Ad_inv, dtype=float) - np.eye(n)

    def rho_star(self, Pi: FramedPolyvector, s: GroupPoint, backend: ScalarBackend = EXACT):
        """``Pi^#`` at the unit ``(e, s)`` on conormal (factor-0) covectors, projected to factor 1."""
        n = self.g.n
        vals = Pi.evaluate(self.unit(s), backend)
        M = [[0] * n for _ in range(n)]
        for (i, j), v in vals.items():
            if i < n <= j:  # Pi(eps_0^i, eps_1^{j-n}) = v
                M[j - n][i] += v
            elif j < n <= i:
                M[i - n][j] -= v
        if backend.exact:
            return Matrix([[QQ.convert(x) for x in r] for r in M], n)
        import numpy as np
        return np.array(M, dtype=float)


class GroupOverPoint:
    """``G => pt``: the quasi-Poisson group model with ``TM = 0``."""

    name = "group"

    def __init__(self, g: MatrixLieAlgebra):
        self.g = g
        self.calc = FrameCalculus(g, 1)

    @property
    def dim_base(self) -> int:
        return 0

    def left_field(self, x: Sequence) -> FramedPolyvector:
        return self.calc.left(0, x)

    def right_field(self, x: Sequence) -> FramedPolyvector:
        return self.calc.right(0, x)

    def unit(self, s=None) -> tuple:
        return (identity_point(self.g),)

    def rho(self, s=None, backend: ScalarBackend = EXACT):
        return _empty(self.g.n, backend)

    def rho_star(self, Pi: FramedPolyvector, s=None, backend: ScalarBackend = EXACT):
        return _empty(self.g.n, backend)


def _empty(n: int, backend: ScalarBackend):
    if backend.exact:
        return Matrix.zeros(0, n)
    import numpy as np
    return np.zeros((0, n))


def lift(model, a: dict, side: str) -> FramedPolyvector:
    """``<-a`` (``side='left'``) or ``->a`` (``'right'``) for ``a`` in an exterior power of ``g``."""
    n = model.g.n
    fld = model.left_field if side == "left" else model.right_field
    E = [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)]
    fields = [fld(E[i]) for i in range(n)]
    grade = len(next(iter(a))) if a else 0
    out = model.calc.zero(grade)
    for idx, c in a.items():
        term = fields[idx[0]]
        for i in idx[1:]:
            term = term.wedge(fields[i])
        out = out + term.scale(c)
    return out


def exact_polyvector(model, a: dict) -> FramedPolyvector:
    """``d(a) = <-a - ->a``."""
    return lift(model, a, "left") - lift(model, a, "right")


def amm_bivector(model: ConjugationGroupoid) -> FramedPolyvector:
    """AMM bivector on ``G x G`` with ``K^-1`` in place of an orthonormal basis:

    ``1/2 sum K^ij (<-e_i^2 ^ ->e_j^2 - <-e_i^2 ^ <-e_j^1 - ->(Ad_{g^-1} e_i)^2 ^ ->e_j^1)``
    (superscripts ``1, 2`` are factors 0 and 1).
    """
    g = model.g
    c = model.calc
    n = g.n
    Ki = g.K_inv
    E = [tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)]
    Pi = c.zero(2)
    for i in range(n):
        # ->(Ad_{g^-1} e_i) on factor 1: coefficients Ad_{s^-1} Ad_{g^-1} e_i
        adg = {}
        for j in range(n):
            y = [c.A(0, k, i) for k in range(n)]
            cf = sum((c.A(1, j, k) * y[k] for k in range(n)), c.ring.zero)
            if cf:
                adg[(n + j,)] = cf
        right_adg = FramedPolyvector(c, 1, adg)
        for j in range(n):
            kij = Ki.rows[i][j]
            if not kij:
                continue
            t = (c.left(1, E[i]).wedge(c.right(1, E[j]))
                 - c.left(1, E[i]).wedge(c.left(0, E[j]))
                 - right_adg.wedge(c.right(0, E[j])))
            Pi = Pi + t.scale(QQ(1, 2) * kij)
    return Pi


@dataclass(eq=False)
class QuasiPoissonData:
    model: object
    Pi: FramedPolyvector
    Lambda: dict


def amm_structure(g: MatrixLieAlgebra) -> QuasiPoissonData:
    model = ConjugationGroupoid(g)
    return QuasiPoissonData(model, amm_bivector(model), cartan_trivector(g))


def quasi_poisson_group(g: MatrixLieAlgebra, Pi: Optional[FramedPolyvector] = None) -> QuasiPoissonData:
    """``G => pt`` with ``Pi = 0`` and the Cartan trivector (Ad-invariant, so ``<-Lambda = ->Lambda``)."""
    model = GroupOverPoint(g)
    return QuasiPoissonData(model, Pi if Pi is not None else model.calc.zero(2), cartan_trivector(g))


def _first(vals: dict):
    k = sorted(vals)[0]
    return k, vals[k]


def check_quasi_poisson(data: QuasiPoissonData, points: Sequence[tuple],
                        backend: ScalarBackend = EXACT) -> ValidationReport:
    """``1/2 [Pi, Pi] = <-Lambda - ->Lambda`` and ``[Pi, ->Lambda] = 0`` at every point."""
    model, Pi, Lam = data.model, data.Pi, data.Lambda
    rep = ValidationReport()
    lhs = schouten(Pi, Pi).scale(QQ(1, 2)) - (lift(model, Lam, "left") - lift(model, Lam, "right"))
    dl = schouten(Pi, lift(model, Lam, "right"))
    for k, pt in enumerate(points):
        v = lhs.evaluate(pt, backend)
        if v:
            idx, val = _first(v)
            rep.add("pi-pi", (k, idx), val, 0)
        w = dl.evaluate(pt, backend)
        if w:
            idx, val = _first(w)
            rep.add("delta-lambda", (k, idx), val, 0)
    return rep


def right_invariant_part(model, P: FramedPolyvector, probe: Sequence[tuple],
                         backend: ScalarBackend = EXACT) -> Tuple[dict, ValidationReport]:
    """Read ``b`` with ``P = ->b`` from the unit of the acting factor and verify at ``probe``."""
    n = model.g.n
    base = model.unit(identity_point(model.g)) if isinstance(model, ConjugationGroupoid) else model.unit()
    vals = P.evaluate(base, backend)
    b = {}
    for k, v in vals.items():
        if all(i < n for i in k):
            b[k] = v
    rep = ValidationReport()
    diff = P - lift(model, b, "right")
    for j, pt in enumerate(probe):
        w = diff.evaluate(pt, backend)
        if w:
            idx, val = _first(w)
            rep.add("right-invariant", (j, idx), val, 0)
    return b, rep


def twist_framed(data: QuasiPoissonData, T: dict, probe: Sequence[tuple] = ()) -> Tuple[QuasiPoissonData, ValidationReport]:
    """``Pi_T = Pi + <-T - ->T`` and ``Lambda_T = Lambda + delta_Pi T + 1/2 [T, T]``.

    ``[T, T]`` is the bracket of the left-invariant extensions; in the
    right-invariant convention both correction terms change sign.

    ``delta_Pi T`` is read off from ``[Pi, ->T] = ->(delta_Pi T)``; the report
    records whether that field is right-invariant at the probe points.
    """
    model = data.model
    g = model.g
    dT, rep = right_invariant_part(model, schouten(data.Pi, lift(model, T, "right")), probe)
    TT = alg_schouten(g, T, T)
    lam = dict(data.Lambda)
    for k, v in dT.items():
        lam[k] = lam.get(k, ZERO) + v
    for k, v in TT.items():
        lam[k] = lam.get(k, ZERO) + QQ(1, 2) * v
    lam = {k: v for k, v in lam.items() if v}
    return QuasiPoissonData(model, data.Pi + exact_polyvector(model, T), lam), rep


def random_bivector(rng: random.Random, g: MatrixLieAlgebra, bound: int = 3) -> dict:
    out = {}
    for k in itertools.combinations(range(g.n), 2):
        v = QQ(rng.randint(-bound, bound), rng.randint(1, 3))
        if v:
            out[k] = v
    return out


# ---------------------------------------------------------------- rank and non-degeneracy


def _rank(m, backend: ScalarBackend):
    if backend.exact:
        return rank(m)
    import numpy as np
    a = np.asarray(m, dtype=float)
    return 0 if a.size == 0 else int(np.linalg.matrix_rank(a, tol=backend.tol))


def _hstack(a, b, backend):
    if backend.exact:
        return hstack(a, b)
    import numpy as np
    return np.hstack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)])


def _kernel(m, backend):
    if backend.exact:
        return kernel(m)
    import numpy as np
    a = np.asarray(m, dtype=float)
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, sv, vt = np.linalg.svd(a)
    r = int(np.sum(sv > backend.tol))
    return vt[r:].T


def _T(m, backend):
    return m.T() if backend.exact else m.T


def _ncols(m):
    return m.ncols if isinstance(m, Matrix) else m.shape[1]


def anchor_and_rho_star(data: QuasiPoissonData, s: Optional[GroupPoint] = None,
                        backend: ScalarBackend = EXACT) -> tuple:
    return data.model.rho(s, backend), data.model.rho_star(data.Pi, s, backend)


@dataclass(frozen=True)
class RankReport:
    dim_im_rho: int
    dim_im_rho_star: int
    dim_sum: int
    rk_A: int
    dim_base: int
    rank: int
    rank_dual_form: int
    nondegenerate: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def rank_at(data: QuasiPoissonData, s: Optional[GroupPoint] = None, backend: ScalarBackend = EXACT) -> RankReport:
    """``dim(im rho + im rho_*) - rk A``, cross-checked against ``dim X - dim(ker rho^* cap ker rho_*^*)``."""
    rho, rs = anchor_and_rho_star(data, s, backend)
    n = data.model.g.n
    m = data.model.dim_base
    r1, r2 = _rank(rho, backend), _rank(rs, backend)
    rs_sum = _rank(_hstack(rho, rs, backend), backend) if m else 0
    dual_ker = m - rs_sum  # dim(ker rho^T cap ker rho_*^T)
    rank_val = rs_sum - n
    alt = (m - n) - dual_ker
    if alt != rank_val:
        raise AssertionError("rank formulas disagree")
    nd = nondegenerate_at(data, s, backend)[0]
    return RankReport(r1, r2, rs_sum, n, m, rank_val, alt, nd)


@dataclass(frozen=True)
class NondegeneracyCertificate:
    h_minus1_source: int
    h_minus1_target: int
    h0_source: int
    h0_target: int
    rank_on_h_minus1: int
    rank_on_h0: int
    chain_map: bool
    dim_stack: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def nondegenerate_at(data: QuasiPoissonData, s: Optional[GroupPoint] = None,
                     backend: ScalarBackend = EXACT) -> Tuple[bool, NondegeneracyCertificate]:
    """Quasi-isomorphism test of ``(-rho_*^T, rho_*)`` from ``T^*M -> A^*`` (shifted) to ``A -> TM``."""
    rho, rs = anchor_and_rho_star(data, s, backend)
    n = data.model.g.n
    m = data.model.dim_base
    dS = _T(rho, backend)  # T^*M -> A^*
    f_minus = -_T(rs, backend)  # T^*M -> A
    if backend.exact:
        chain = (rho @ f_minus) == (rs @ dS)
    else:
        import numpy as np
        chain = m == 0 or bool(np.max(np.abs(rho @ f_minus - rs @ dS)) <= backend.tol)
    kS = _kernel(dS, backend)  # H^-1 of the source
    kT = _kernel(rho, backend)
    h0S = n - _rank(dS, backend)
    h0T = m - _rank(rho, backend)
    r_minus = _rank(f_minus @ kS, backend) if m and _ncols(kS) else 0
    r0 = _rank(_hstack(rho, rs, backend), backend) - _rank(rho, backend) if m else 0
    ok = (_ncols(kS) == _ncols(kT) == r_minus) and (h0S == h0T == r0) and chain
    cert = NondegeneracyCertificate(_ncols(kS), _ncols(kT), h0S, h0T, r_minus, r0, chain, m - n)
    if ok and cert.dim_stack != 0:
        raise AssertionError("quasi-isomorphism with nonzero stack dimension")
    return ok, cert


def sharp(g: MatrixLieAlgebra, T: dict) -> Matrix:
    """``T^#: g^* -> g``, ``xi -> T(xi, .)``."""
    n = g.n
    M = [[ZERO] * n for _ in range(n)]
    for (i, j), v in T.items():
        M[j][i] += v
        M[i][j] -= v
    return Matrix(M, n)


def rank_twist_invariance(data: QuasiPoissonData, T: dict, s: Optional[GroupPoint] = None,
                          probe: Sequence[tuple] = ()) -> Tuple[ValidationReport, dict]:
    """Ranks before and after the twist agree; ``T^#`` is a chain homotopy between the two squares.

    Both printed readings of the twisted anchor are tested; the dict reports which holds.
    """
    rep = ValidationReport()
    twisted, r = twist_framed(data, T, probe)
    rep.extend_prefixed("twist", r)
    rho, rs = anchor_and_rho_star(data, s)
    _, rsT = anchor_and_rho_star(twisted, s)
    rep.check("rank", None, rank_at(twisted, s).rank, rank_at(data, s).rank)
    g = data.model.g
    H = sharp(g, T)
    readings = {}
    if data.model.dim_base:
        readings["rho_star_plus_rho_T"] = rsT == rs + rho @ H
        readings["rho_star_minus_rho_T"] = rsT == rs - rho @ H
        # reading with rho in place of rho_* (needs A^* = A through K^-1)
        readings["rho_plus_rho_T"] = rsT == rho @ g.K_inv + rho @ H
        # chain homotopy: degree 0 and degree -1 components
        sgn = ONE if readings["rho_star_plus_rho_T"] else -ONE
        rep.check("homotopy-degree-0", None, rsT - rs, (rho @ H).scale(sgn))
        rep.check("homotopy-degree-minus1", None, -(rsT.T()) + rs.T(), (H @ rho.T()).scale(sgn))
    return rep, readings


def orbit_point(a: GroupPoint, s: GroupPoint, g: MatrixLieAlgebra) -> GroupPoint:
    """``a s a^-1``."""
    return group_point(g, a.matrix @ s.matrix @ inverse(a.matrix))
