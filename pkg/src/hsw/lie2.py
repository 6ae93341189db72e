"""Graded Lie algebras, crossed modules, their dglas, morphisms and homotopies.

Structure tensors are dictionaries on ordered pairs of basis keys
``(degree, index)`` with sparse values.  Bilinear maps use the same layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from .graded import (GradedLinearMap, GradedVectorSpace, Key, Sparse, glm_compose, sp_add,
                     sp_basis, sp_bilinear, sp_clean, sp_linear, sp_neg, sp_scale, sp_sub)
from .linalg import Matrix, hstack, q, rank
from .report import (InvalidCrossedModule, NotAChainHomotopyInverse, ShapeMismatchError,
                     SourceTargetMismatch, ValidationReport)

Table = Dict[Tuple[Key, Key], Sparse]


def sgn(n: int) -> int:
    return -1 if n % 2 else 1


def clean_table(t: Mapping) -> Table:
    out = {}
    for k, v in t.items():
        v = sp_clean({kk: q(c) for kk, c in v.items()})
        if v:
            out[(tuple(k[0]), tuple(k[1]))] = v
    return out


def bilinear(table: Mapping, x: Mapping, y: Mapping) -> Sparse:
    return sp_bilinear(lambda a, b: table.get((a, b), {}), x, y)


def table_from_function(left: GradedVectorSpace, right: GradedVectorSpace, f) -> Table:
    """Tabulate a bilinear function on all basis pairs."""
    out = {}
    for a in left.basis():
        for b in right.basis():
            v = sp_clean(f(a, b))
            if v:
                out[(a, b)] = v
    return out


def table_add(*ts: Mapping) -> Table:
    out: Table = {}
    for t in ts:
        for k, v in t.items():
            out[k] = sp_add(out.get(k, {}), v)
    return {k: v for k, v in out.items() if v}


def table_scale(c, t: Mapping) -> Table:
    return {k: sp_scale(c, v) for k, v in t.items() if sp_scale(c, v)}


def tables_equal(a: Mapping, b: Mapping) -> bool:
    return clean_table(a) == clean_table(b)


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    """Graded Lie algebra with a bracket tensor on all ordered basis pairs."""

    space: GradedVectorSpace
    table: Table = field(default_factory=dict)

    @classmethod
    def abelian(cls, space: GradedVectorSpace) -> "GradedLieAlgebra":
        return cls(space, {})

    @classmethod
    def from_upper(cls, space: GradedVectorSpace, upper: Mapping) -> "GradedLieAlgebra":
        """Fill the table by graded antisymmetry from brackets on some ordered pairs."""
        t: Table = {}
        for (a, b), v in upper.items():
            t[(a, b)] = sp_clean({k: q(c) for k, c in v.items()})
            if a != b:
                t[(b, a)] = sp_scale(-sgn(a[0] * b[0]), t[(a, b)])
        return cls(space, clean_table(t))

    def br(self, x: Mapping, y: Mapping) -> Sparse:
        return bilinear(self.table, x, y)

    def __eq__(self, other):
        return isinstance(other, GradedLieAlgebra) and self.space == other.space and tables_equal(self.table, other.table)


def check_graded_jacobi(g: GradedLieAlgebra) -> ValidationReport:
    """Degree, antisymmetry and Jacobi checks over all basis tuples."""
    rep = ValidationReport()
    basis = list(g.space.basis())
    for (a, b), v in sorted(g.table.items()):
        for k in v:
            if k[0] != a[0] + b[0] or k[1] >= g.space.dim(k[0]):
                rep.add("degree", (a, b), k, a[0] + b[0])
    for i, a in enumerate(basis):
        for b in basis[i:]:
            lhs = g.table.get((a, b), {})
            rhs = sp_scale(-sgn(a[0] * b[0]), g.table.get((b, a), {}))
            rep.check("antisymmetry", (a, b), lhs, rhs)
    for x in basis:
        X = sp_basis(x)
        for y in basis:
            Y = sp_basis(y)
            for z in basis:
                Z = sp_basis(z)
                k, l, m = x[0], y[0], z[0]
                tot = sp_add(sp_scale(sgn(k * m), g.br(X, g.br(Y, Z))),
                             sp_scale(sgn(l * k), g.br(Y, g.br(Z, X))),
                             sp_scale(sgn(m * l), g.br(Z, g.br(X, Y))))
                rep.check("jacobi", (x, y, z), tot, {})
    return rep


@dataclass(frozen=True, eq=False)
class CrossedModule:
    """Crossed module ``A --d--> G`` with action ``G x A -> A``."""

    A: GradedLieAlgebra
    G: GradedLieAlgebra
    d: GradedLinearMap
    action: Table = field(default_factory=dict)

    def __post_init__(self):
        if self.d.source != self.A.space or self.d.target != self.G.space or self.d.shift != 0:
            raise ShapeMismatchError("d must be a degree 0 map from A to G")

    def act(self, pi: Mapping, a: Mapping) -> Sparse:
        """``pi . a``."""
        return bilinear(self.action, pi, a)

    def ract(self, a: Mapping, pi: Mapping) -> Sparse:
        """``a . pi = (-1)^{k(l+1)} pi . a`` for homogeneous ``pi`` in ``G_k``, ``a`` in ``A_l``."""
        out: Sparse = {}
        for ka, va in a.items():
            for kp, vp in pi.items():
                c = va * vp * sgn(kp[0] * (ka[0] + 1))
                out = sp_add(out, sp_scale(c, self.action.get((kp, ka), {})))
        return out

    def __eq__(self, other):
        return (isinstance(other, CrossedModule) and self.A == other.A and self.G == other.G
                and self.d == other.d and tables_equal(self.action, other.action))


def check_crossed_module(cm: CrossedModule) -> ValidationReport:
    rep = ValidationReport()
    rep.extend_prefixed("A", check_graded_jacobi(cm.A))
    rep.extend_prefixed("G", check_graded_jacobi(cm.G))
    Ab = list(cm.A.space.basis())
    Gb = list(cm.G.space.basis())
    for (p, a), v in sorted(cm.action.items()):
        for k in v:
            if k[0] != p[0] + a[0] or k[1] >= cm.A.space.dim(k[0]):
                rep.add("action-degree", (p, a), k, p[0] + a[0])
    for a1 in Ab:
        for a2 in Ab:
            x, y = sp_basis(a1), sp_basis(a2)
            rep.check("d-morphism", (a1, a2), cm.d(cm.A.br(x, y)), cm.G.br(cm.d(x), cm.d(y)))
            rep.check("axiom-b", (a1, a2), cm.A.br(x, y), cm.act(cm.d(x), y))
    for p in Gb:
        P = sp_basis(p)
        for a in Ab:
            X = sp_basis(a)
            rep.check("axiom-a", (p, a), cm.d(cm.act(P, X)), cm.G.br(P, cm.d(X)))
    for p1 in Gb:
        P1 = sp_basis(p1)
        for p2 in Gb:
            P2 = sp_basis(p2)
            for a in Ab:
                X = sp_basis(a)
                lhs = cm.act(cm.G.br(P1, P2), X)
                rhs = sp_sub(cm.act(P1, cm.act(P2, X)), sp_scale(sgn(p1[0] * p2[0]), cm.act(P2, cm.act(P1, X))))
                rep.check("action", (p1, p2, a), lhs, rhs)
    for p in Gb:
        P = sp_basis(p)
        for a1 in Ab:
            X = sp_basis(a1)
            for a2 in Ab:
                Y = sp_basis(a2)
                lhs = cm.act(P, cm.A.br(X, Y))
                rhs = sp_add(cm.A.br(cm.act(P, X), Y), sp_scale(sgn(p[0] * a1[0]), cm.A.br(X, cm.act(P, Y))))
                rep.check("derivation", (p, a1, a2), lhs, rhs)
    return rep


@dataclass(frozen=True, eq=False)
class Dgla:
    """Differential graded Lie algebra.

    For one built from a crossed module, ``V_k = A_{k+1} + G_k`` with the A
    coordinates listed first in each degree.
    """

    lie: GradedLieAlgebra
    differential: GradedLinearMap
    cm: Optional[CrossedModule] = None

    @property
    def V(self) -> GradedVectorSpace:
        return self.lie.space

    def br(self, x, y) -> Sparse:
        return self.lie.br(x, y)

    def dif(self, x) -> Sparse:
        return self.differential(x)

    def embed(self, a: Mapping, pi: Mapping) -> Sparse:
        """``a (+) pi`` as an element of V."""
        out = {(k[0] - 1, k[1]): v for k, v in a.items() if v}
        for k, v in pi.items():
            if v:
                out[(k[0], self.cm.A.space.dim(k[0] + 1) + k[1])] = v
        return out

    def split(self, x: Mapping) -> Tuple[Sparse, Sparse]:
        a, pi = {}, {}
        for (d, i), v in x.items():
            if not v:
                continue
            na = self.cm.A.space.dim(d + 1)
            if i < na:
                a[(d + 1, i)] = v
            else:
                pi[(d, i - na)] = v
        return a, pi


def _dgla_space(cm: CrossedModule) -> GradedVectorSpace:
    degs = set(d - 1 for d in cm.A.space.degrees()) | set(cm.G.space.degrees())
    return GradedVectorSpace.of({k: cm.A.space.dim(k + 1) + cm.G.space.dim(k) for k in degs})


def associated_dgla(cm: CrossedModule, validate: bool = True) -> Dgla:
    if validate:
        rep = check_crossed_module(cm)
        if not rep.ok:
            raise InvalidCrossedModule(str(rep[0]))
    V = _dgla_space(cm)
    proto = Dgla(GradedLieAlgebra(V, {}), GradedLinearMap.zero(V, V, 1), cm)

    def diff(key):
        a, _ = proto.split(sp_basis(key))
        return proto.embed({}, cm.d(a))

    def brk(x, y):
        a1, p1 = proto.split(sp_basis(x))
        a2, p2 = proto.split(sp_basis(y))
        k, l = x[0], y[0]
        apart = sp_sub(sp_scale(sgn(k), cm.act(p1, a2)), sp_scale(sgn((k + 1) * l), cm.act(p2, a1)))
        return proto.embed(apart, cm.G.br(p1, p2))

    d = GradedLinearMap.from_function(V, V, 1, diff)
    return Dgla(GradedLieAlgebra(V, table_from_function(V, V, brk)), d, cm)


def check_dgla(dg: Dgla) -> ValidationReport:
    rep = check_graded_jacobi(dg.lie)
    basis = list(dg.V.basis())
    for x in basis:
        rep.check("d-squared", x, dg.dif(dg.dif(sp_basis(x))), {})
    for x in basis:
        X = sp_basis(x)
        for y in basis:
            Y = sp_basis(y)
            lhs = dg.dif(dg.br(X, Y))
            rhs = sp_add(dg.br(dg.dif(X), Y), sp_scale(sgn(x[0]), dg.br(X, dg.dif(Y))))
            rep.check("d-derivation", (x, y), lhs, rhs)
    return rep


@dataclass(frozen=True, eq=False)
class Lie2Morphism:
    """Linear parts on A and G plus a quadratic term ``G x G -> A'``.

    The quadratic term sends ``G_k x G_l`` to ``A'_{k+l}``, which is degree +1
    once ``A'`` is shifted into the dgla.
    """

    source: CrossedModule
    target: CrossedModule
    phi1A: GradedLinearMap
    phi1G: GradedLinearMap
    phi2: Table = field(default_factory=dict)

    def __post_init__(self):
        if (self.phi1A.source != self.source.A.space or self.phi1A.target != self.target.A.space
                or self.phi1G.source != self.source.G.space or self.phi1G.target != self.target.G.space):
            raise ShapeMismatchError("linear parts do not match source/target spaces")

    def p2(self, x, y) -> Sparse:
        return bilinear(self.phi2, x, y)

    @classmethod
    def identity(cls, cm: CrossedModule) -> "Lie2Morphism":
        return cls(cm, cm, GradedLinearMap.identity(cm.A.space), GradedLinearMap.identity(cm.G.space), {})

    @property
    def is_strict(self) -> bool:
        return not clean_table(self.phi2)

    def __eq__(self, other):
        return (isinstance(other, Lie2Morphism) and self.phi1A == other.phi1A and self.phi1G == other.phi1G
                and tables_equal(self.phi2, other.phi2))


def check_lie2_morphism(m: Lie2Morphism) -> ValidationReport:
    rep = ValidationReport()
    S, T = m.source, m.target
    Ab = list(S.A.space.basis())
    Gb = list(S.G.space.basis())
    for (p1, p2), v in sorted(m.phi2.items()):
        for k in v:
            if k[0] != p1[0] + p2[0]:
                rep.add("phi2-degree", (p1, p2), k, p1[0] + p2[0])
    for i, p1 in enumerate(Gb):
        for p2 in Gb[i:]:
            rep.check("phi2-antisymmetry", (p1, p2), m.phi2.get((p1, p2), {}),
                      sp_scale(-sgn(p1[0] * p2[0]), m.phi2.get((p2, p1), {})))
    for a in Ab:
        X = sp_basis(a)
        rep.check("a-chain", a, T.d(m.phi1A(X)), m.phi1G(S.d(X)))
    for p1 in Gb:
        P1 = sp_basis(p1)
        for p2 in Gb:
            P2 = sp_basis(p2)
            lhs = T.d(m.p2(P1, P2))
            rhs = sp_sub(m.phi1G(S.G.br(P1, P2)), T.G.br(m.phi1G(P1), m.phi1G(P2)))
            rep.check("b-bracket", (p1, p2), lhs, rhs)
    for p in Gb:
        P = sp_basis(p)
        for a in Ab:
            X = sp_basis(a)
            lhs = m.p2(P, S.d(X))
            rhs = sp_sub(m.phi1A(S.act(P, X)), T.act(m.phi1G(P), m.phi1A(X)))
            rep.check("c-action", (p, a), lhs, rhs)

    for x in Gb:
        for y in Gb:
            for z in Gb:
                rep.check("d-cyclic", (x, y, z), cyclic_defect(m, x, y, z), {})
    return rep


def cyclic_defect(m: Lie2Morphism, x: Key, y: Key, z: Key, action_sign: int = 1) -> Sparse:
    """Cyclic sum of ``(-1)^{|x||z|} (Phi2(x,[y,z]) + s Phi1(x).Phi2(y,z))``.

    The arity-3 condition of an L-infinity morphism gives ``s = +1``;
    ``s = -1`` is the variant with the opposite action sign.
    """
    S, T = m.source, m.target

    def term(a, b, c):
        A, B, C = sp_basis(a), sp_basis(b), sp_basis(c)
        t = sp_add(m.p2(A, S.G.br(B, C)), sp_scale(action_sign, T.act(m.phi1G(A), m.p2(B, C))))
        return sp_scale(sgn(a[0] * c[0]), t)

    return sp_add(term(x, y, z), term(y, z, x), term(z, x, y))


def _pull_table(table: Mapping, f: GradedLinearMap, g: GradedLinearMap, space_l, space_r) -> Table:
    """``table(f x, g y)`` tabulated on basis pairs."""
    return table_from_function(space_l, space_r, lambda a, b: bilinear(table, f.on_basis(a), g.on_basis(b)))


def _post_table(f: GradedLinearMap, table: Mapping) -> Table:
    return {k: f(v) for k, v in table.items() if f(v)}


def compose_lie2(outer: Lie2Morphism, inner: Lie2Morphism) -> Lie2Morphism:
    if inner.target != outer.source:
        raise SourceTargetMismatch("inner target differs from outer source")
    Gs = inner.source.G.space
    phi2 = table_add(_post_table(outer.phi1A, inner.phi2),
                     _pull_table(outer.phi2, inner.phi1G, inner.phi1G, Gs, Gs))
    return Lie2Morphism(inner.source, outer.target, glm_compose(outer.phi1A, inner.phi1A),
                        glm_compose(outer.phi1G, inner.phi1G), phi2)


def theta(phi: Lie2Morphism, h: GradedLinearMap) -> Table:
    """Quadratic correction term of a homotopy ``h: G -> A'`` starting at ``phi``."""
    S, T = phi.source, phi.target
    if h.source != S.G.space or h.target != T.A.space or h.shift != 0:
        raise ShapeMismatchError("h must be a degree 0 map G -> A'")

    def f(p1, p2):
        P1, P2 = sp_basis(p1), sp_basis(p2)
        l = p2[0]
        return sp_add(h(S.G.br(P1, P2)), sp_neg(T.A.br(h(P1), h(P2))),
                      sp_neg(T.act(phi.phi1G(P1), h(P2))), sp_scale(sgn(l), T.ract(h(P1), phi.phi1G(P2))))

    return table_from_function(S.G.space, S.G.space, f)


@dataclass(frozen=True, eq=False)
class Lie2Homotopy:
    phi: Lie2Morphism
    psi: Lie2Morphism
    h: GradedLinearMap


def apply_homotopy(phi: Lie2Morphism, h: GradedLinearMap) -> Lie2Morphism:
    """The morphism reached from ``phi`` along ``h``."""
    T = phi.target
    psi1G = phi.phi1G + glm_compose(T.d, h)
    psi1A = phi.phi1A + glm_compose(h, phi.source.d)
    return Lie2Morphism(phi.source, T, psi1A, psi1G, table_add(phi.phi2, theta(phi, h)))


def check_homotopy(hty: Lie2Homotopy) -> ValidationReport:
    rep = ValidationReport()
    phi, psi, h = hty.phi, hty.psi, hty.h
    S, T = phi.source, phi.target
    for p in S.G.space.basis():
        P = sp_basis(p)
        rep.check("alpha-G", p, psi.phi1G(P), sp_add(phi.phi1G(P), T.d(h(P))))
    for a in S.A.space.basis():
        X = sp_basis(a)
        rep.check("alpha-A", a, psi.phi1A(X), sp_add(phi.phi1A(X), h(S.d(X))))
    th = theta(phi, h)
    for p1 in S.G.space.basis():
        for p2 in S.G.space.basis():
            rep.check("beta", (p1, p2), sp_clean(psi.phi2.get((p1, p2), {})),
                      sp_add(phi.phi2.get((p1, p2), {}), th.get((p1, p2), {})))
    return rep


def _homotopy_identity_report(tag, f1A, f1G, dA, dG, h, Aspace, Gspace) -> ValidationReport:
    """Checks ``f1 = id + d h`` on G and ``f1 = id + h d`` on A."""
    rep = ValidationReport()
    for p in Gspace.basis():
        P = sp_basis(p)
        rep.check(f"{tag}-G", p, f1G(P), sp_add(P, dG(h(P))))
    for a in Aspace.basis():
        X = sp_basis(a)
        rep.check(f"{tag}-A", a, f1A(X), sp_add(X, h(dA(X))))
    return rep


def inversion_preconditions(phi: Lie2Morphism, psi1A, psi1G, h, hprime) -> ValidationReport:
    S, T = phi.source, phi.target
    rep = ValidationReport()
    for a in T.A.space.basis():
        X = sp_basis(a)
        rep.check("psi-chain", a, S.d(psi1A(X)), psi1G(T.d(X)))
    rep.extend(_homotopy_identity_report("h", glm_compose(psi1A, phi.phi1A), glm_compose(psi1G, phi.phi1G),
                                         S.d, S.d, h, S.A.space, S.G.space))
    rep.extend(_homotopy_identity_report("hprime", glm_compose(phi.phi1A, psi1A), glm_compose(phi.phi1G, psi1G),
                                         T.d, T.d, hprime, T.A.space, T.G.space))
    return rep


def inversion_constraints(phi: Lie2Morphism, psi: Lie2Morphism, h, hprime) -> ValidationReport:
    """The four identities characterising the quadratic term of the inverse."""
    S, T = phi.source, phi.target
    rep = ValidationReport()
    th_hp = theta(Lie2Morphism.identity(T), hprime)
    th_h = theta(Lie2Morphism.identity(S), h)
    Gt = list(T.G.space.basis())
    for p1 in Gt:
        P1 = sp_basis(p1)
        for p2 in Gt:
            P2 = sp_basis(p2)
            lhs = S.d(psi.p2(P1, P2))
            rhs = sp_sub(psi.phi1G(T.G.br(P1, P2)), S.G.br(psi.phi1G(P1), psi.phi1G(P2)))
            rep.check("constraint-1", (p1, p2), lhs, rhs)
            lhs = phi.phi1A(psi.p2(P1, P2))
            rhs = sp_sub(th_hp.get((p1, p2), {}), phi.p2(psi.phi1G(P1), psi.phi1G(P2)))
            rep.check("constraint-3", (p1, p2), lhs, rhs)
    for p in Gt:
        P = sp_basis(p)
        for a in T.A.space.basis():
            X = sp_basis(a)
            lhs = psi.p2(P, T.d(X))
            rhs = sp_sub(psi.phi1A(T.act(P, X)), S.act(psi.phi1G(P), psi.phi1A(X)))
            rep.check("constraint-2", (p, a), lhs, rhs)
    Gs = list(S.G.space.basis())
    for p1 in Gs:
        P1 = sp_basis(p1)
        for p2 in Gs:
            P2 = sp_basis(p2)
            lhs = psi.phi1A(phi.p2(P1, P2))
            rhs = sp_sub(th_h.get((p1, p2), {}), psi.p2(phi.phi1G(P1), phi.phi1G(P2)))
            rep.check("constraint-4", (p1, p2), lhs, rhs)
    return rep


def invert_lie2_morphism(phi: Lie2Morphism, psi1A: GradedLinearMap, psi1G: GradedLinearMap,
                         h: GradedLinearMap, hprime: GradedLinearMap) -> Lie2Morphism:
    """Homotopy inverse with prescribed linear part.

    ``h`` and ``hprime`` satisfy ``psi1 phi1 = id + d h`` (and ``id + h d`` on A),
    ``phi1 psi1 = id + d' hprime`` (and ``id + hprime d'`` on A').
    """
    pre = inversion_preconditions(phi, psi1A, psi1G, h, hprime)
    if not pre.ok:
        raise NotAChainHomotopyInverse(str(pre[0]))
    S, T = phi.source, phi.target
    Gt = T.G.space
    th_hp = theta(Lie2Morphism.identity(T), hprime)

    def f(p1, p2):
        P1, P2 = sp_basis(p1), sp_basis(p2)
        x1, x2 = psi1G(P1), psi1G(P2)
        kappa = sp_sub(S.G.br(x1, x2), psi1G(T.G.br(P1, P2)))
        return sp_add(psi1A(th_hp.get((p1, p2), {})), h(kappa), sp_neg(psi1A(phi.p2(x1, x2))))

    return Lie2Morphism(T, S, psi1A, psi1G, table_from_function(Gt, Gt, f))


def two_term_cohomology(cm: CrossedModule) -> Dict[int, Tuple[int, int]]:
    """``{k: (dim ker d on A_{k+1}, dim coker d on G_k)}``."""
    out = {}
    degs = sorted(set(d - 1 for d in cm.A.space.degrees()) | set(cm.G.space.degrees()))
    for k in degs:
        na, ng = cm.A.space.dim(k + 1), cm.G.space.dim(k)
        ker = na - rank(cm.d.block(k + 1))
        coker = ng - rank(cm.d.block(k))
        out[k] = (ker, coker)
    return out
