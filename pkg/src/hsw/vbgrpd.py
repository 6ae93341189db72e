"""VB groupoids over finite groupoids.

A VB groupoid stores, per arrow ``a``, a fiber ``V_a`` and linear maps
``sV[a]: V_a -> E_{s a}``, ``tV[a]: V_a -> E_{t a}``, ``invV[a]: V_a -> V_{a^-1}``;
per object ``m`` a unit map ``uV[m]: E_m -> V_{1_m}``; per composable pair a
matrix ``mV[(a, b)]`` on ``V_a + V_b`` whose restriction to the fiber product
``{(v, w): sV v = tV w}`` is the multiplication. Only that restriction is ever
compared.

Core embeddings follow ``R(c) = c . 0_a`` and ``L(c) = -0_a . c^{-1}`` with the
groupoid inverse; the VB homotopy of ``h: E1 -> C2`` is
``J_h = R h t - L h s`` which is the per-vector formula
``J_h(v) = 0 . h(s v)^{-1} + h(t v) . 0``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .fingrpd import FiniteGroupoid, PullbackGroupoid, check_functor, pullback_groupoid
from .linalg import (
    ONE,
    ZERO,
    Matrix,
    det,
    hstack,
    inverse,
    kernel,
    left_inverse,
    rank,
    right_inverse,
    solve,
    sparse_kernel,
    vstack,
)
from .report import InvalidVB, NotAHomotopyEquivalence, NotProjectable, NotSurjective, ShapeMismatchError, ValidationReport


def _z(m: int, n: int) -> Matrix:
    return Matrix.zeros(m, n)


def _first_diff(a: Matrix, b: Matrix):
    for i in range(a.nrows):
        for j in range(a.ncols):
            if a.rows[i][j] != b.rows[i][j]:
                return (i, j), a.rows[i][j], b.rows[i][j]
    return None


def _check(rep: ValidationReport, tag: str, loc, a: Matrix, b: Matrix) -> bool:
    if a.shape != b.shape:
        rep.add(tag, loc, f"shape {a.shape}", f"shape {b.shape}")
        return False
    d = _first_diff(a, b)
    if d is not None:
        rep.add(tag, (loc, d[0]), d[1], d[2])
        return False
    return True


@dataclass(frozen=True)
class FiniteVectorBundle:
    """Fiber dimension per point of a finite base (objects or arrows)."""

    base: tuple
    dims: tuple

    def __post_init__(self):
        if len(self.base) != len(self.dims) or any(d < 0 for d in self.dims):
            raise ShapeMismatchError("bundle needs one nonnegative dimension per base point")


@dataclass(eq=False)
class VBGroupoid:
    base: FiniteGroupoid
    vdims: tuple
    edims: tuple
    sV: tuple
    tV: tuple
    mV: dict
    invV: tuple
    uV: tuple

    @property
    def V(self) -> FiniteVectorBundle:
        return FiniteVectorBundle(tuple(self.base.arrows), tuple(self.vdims))

    @property
    def E(self) -> FiniteVectorBundle:
        return FiniteVectorBundle(tuple(self.base.objects), tuple(self.edims))

    # ---- derived structure, computed once per instance

    def fiber(self, a: int, b: int) -> Matrix:
        """Basis (columns in V_a + V_b) of the composable pairs over ``(a, b)``."""
        return self._fibers(a, b)

    def _fibers(self, a, b):
        cache = self.__dict__.setdefault("_fiber_cache", {})
        if (a, b) not in cache:
            cache[(a, b)] = kernel(hstack(self.sV[a], -self.tV[b]))
        return cache[(a, b)]

    @cached_property
    def core_basis(self) -> tuple:
        """Per object, columns spanning ``C_m = ker sV`` inside ``V_{1_m}``."""
        return tuple(kernel(self.sV[self.base.unit[m]]) for m in range(self.base.n_objects))

    @cached_property
    def cdims(self) -> tuple:
        return tuple(k.ncols for k in self.core_basis)

    @cached_property
    def core_coords(self) -> tuple:
        """Per object, a left inverse of the core basis."""
        return tuple(left_inverse(k) for k in self.core_basis)

    @cached_property
    def core_projection(self) -> tuple:
        """Per object, ``V_{1m} -> C_m``, ``v -> v - u(s v)`` in core coordinates."""
        g = self.base
        out = []
        for m in range(g.n_objects):
            u = g.unit[m]
            p = Matrix.eye(self.vdims[u]) - self.uV[m] @ self.sV[u]
            out.append(self.core_coords[m] @ p)
        return tuple(out)

    @cached_property
    def R(self) -> tuple:
        """Right core embedding ``C_{t a} -> V_a``, ``c -> c . 0_a``."""
        g = self.base
        out = []
        for a in range(g.n_arrows):
            t = g.tgt[a]
            k = self.core_basis[t]
            out.append(self.mV[(g.unit[t], a)] @ vstack(k, _z(self.vdims[a], k.ncols)))
        return tuple(out)

    @cached_property
    def L(self) -> tuple:
        """Left core embedding ``C_{s a} -> V_a``, ``c -> -0_a . c^{-1}``."""
        g = self.base
        out = []
        for a in range(g.n_arrows):
            s = g.src[a]
            u = g.unit[s]
            k = self.core_basis[s]
            inv_c = self.invV[u] @ k
            out.append(-(self.mV[(a, u)] @ vstack(_z(self.vdims[a], k.ncols), inv_c)))
        return tuple(out)

    @cached_property
    def rho(self) -> tuple:
        """Core anchor ``C_m -> E_m`` (target map on the core)."""
        g = self.base
        return tuple(self.tV[g.unit[m]] @ self.core_basis[m] for m in range(g.n_objects))

    def core_coordinates(self, a: int, vec_matrix: Matrix) -> Matrix:
        """Solve ``R_a x = vec`` for columns lying in the image of ``R_a``."""
        x = solve(self.R[a], vec_matrix)
        if x is None:
            raise InvalidVB("vector is not in the right core image")
        return x


# ---------------------------------------------------------------- validation

def check_vb_groupoid(v: VBGroupoid) -> ValidationReport:
    """All VB groupoid axioms on basis vectors of every fiber and composable pair."""
    g = v.base
    rep = ValidationReport()
    lab = g.arrows
    for a in range(g.n_arrows):
        n = v.vdims[a]
        for tag, mat, rows in (("shape-s", v.sV[a], v.edims[g.src[a]]), ("shape-t", v.tV[a], v.edims[g.tgt[a]]),
                               ("shape-inv", v.invV[a], v.vdims[g.inv[a]])):
            if mat.shape != (rows, n):
                rep.add(tag, lab[a], mat.shape, (rows, n))
    for m in range(g.n_objects):
        if v.uV[m].shape != (v.vdims[g.unit[m]], v.edims[m]):
            rep.add("shape-u", g.objects[m], v.uV[m].shape, (v.vdims[g.unit[m]], v.edims[m]))
    for (a, b), c in g.comp.items():
        if v.mV[(a, b)].shape != (v.vdims[c], v.vdims[a] + v.vdims[b]):
            rep.add("shape-m", (lab[a], lab[b]), v.mV[(a, b)].shape, (v.vdims[c], v.vdims[a] + v.vdims[b]))
    if not rep.ok:
        return rep
    for a in range(g.n_arrows):
        if rank(v.sV[a]) != v.edims[g.src[a]]:
            rep.add("s-surjective", lab[a], rank(v.sV[a]), v.edims[g.src[a]])
    for m in range(g.n_objects):
        u = g.unit[m]
        _check(rep, "unit-source", g.objects[m], v.sV[u] @ v.uV[m], Matrix.eye(v.edims[m]))
        _check(rep, "unit-target", g.objects[m], v.tV[u] @ v.uV[m], Matrix.eye(v.edims[m]))
    for (a, b), c in g.comp.items():
        f = v.fiber(a, b)
        prod = v.mV[(a, b)] @ f
        na, nb = v.vdims[a], v.vdims[b]
        pa = hstack(Matrix.eye(na), _z(na, nb)) @ f
        pb = hstack(_z(nb, na), Matrix.eye(nb)) @ f
        _check(rep, "mult-source", (lab[a], lab[b]), v.sV[c] @ prod, v.sV[b] @ pb)
        _check(rep, "mult-target", (lab[a], lab[b]), v.tV[c] @ prod, v.tV[a] @ pa)
    for a in range(g.n_arrows):
        n = v.vdims[a]
        s, t = g.src[a], g.tgt[a]
        ut, us = g.unit[t], g.unit[s]
        left = v.mV[(ut, a)] @ vstack(v.uV[t] @ v.tV[a], Matrix.eye(n))
        _check(rep, "unit-left", lab[a], left, Matrix.eye(n))
        right = v.mV[(a, us)] @ vstack(Matrix.eye(n), v.uV[s] @ v.sV[a])
        _check(rep, "unit-right", lab[a], right, Matrix.eye(n))
        ia = g.inv[a]
        _check(rep, "inverse-source", lab[a], v.sV[ia] @ v.invV[a], v.tV[a])
        _check(rep, "inverse-target", lab[a], v.tV[ia] @ v.invV[a], v.sV[a])
        _check(rep, "inverse-left", lab[a], v.mV[(a, ia)] @ vstack(Matrix.eye(n), v.invV[a]), v.uV[t] @ v.tV[a])
        _check(rep, "inverse-right", lab[a], v.mV[(ia, a)] @ vstack(v.invV[a], Matrix.eye(n)), v.uV[s] @ v.sV[a])
    if not rep.ok:
        return rep
    for (a, b, c) in g.nerve(3):
        na, nb, nc = v.vdims[a], v.vdims[b], v.vdims[c]
        cons = vstack(hstack(v.sV[a], -v.tV[b], _z(v.edims[g.src[a]], nc)),
                      hstack(_z(v.edims[g.src[b]], na), v.sV[b], -v.tV[c]))
        tr = kernel(cons)
        if tr.ncols == 0:
            continue
        ab, bc = g.mul(a, b), g.mul(b, c)
        lhs = v.mV[(ab, c)] @ block_rows(v.mV[(a, b)] @ rows_of(tr, 0, na + nb), rows_of(tr, na + nb, na + nb + nc))
        rhs = v.mV[(a, bc)] @ block_rows(rows_of(tr, 0, na), v.mV[(b, c)] @ rows_of(tr, na, na + nb + nc))
        _check(rep, "associativity", (lab[a], lab[b], lab[c]), lhs, rhs)
    return rep


def rows_of(m: Matrix, i0: int, i1: int) -> Matrix:
    return Matrix._raw(m.rows[i0:i1], i1 - i0, m.ncols)


def block_rows(*ms: Matrix) -> Matrix:
    return vstack(*ms)


@dataclass(frozen=True)
class CoreBundle:
    C: FiniteVectorBundle
    basis: tuple  # per object, columns in V_{1_m}
    canonical_split: bool


@dataclass(frozen=True)
class RightDecomposition:
    """Per arrow a section ``E_{s a} -> V_a`` of the source map, canonical on units."""

    sections: tuple


def core(v: VBGroupoid) -> CoreBundle:
    """Core bundle with basis and a check of the canonical unit splitting."""
    g = v.base
    split_ok = all(
        v.vdims[g.unit[m]] == v.cdims[m] + v.edims[m]
        and rank(hstack(v.core_basis[m], v.uV[m])) == v.vdims[g.unit[m]]
        for m in range(g.n_objects)
    )
    return CoreBundle(FiniteVectorBundle(tuple(g.objects), v.cdims), v.core_basis, split_ok)


def check_decomposition(v: VBGroupoid, dec: RightDecomposition) -> ValidationReport:
    rep = ValidationReport()
    g = v.base
    if len(dec.sections) != g.n_arrows:
        rep.add("length", None, len(dec.sections), g.n_arrows)
        return rep
    for a in range(g.n_arrows):
        p = dec.sections[a]
        if p.shape != (v.vdims[a], v.edims[g.src[a]]):
            rep.add("shape", g.arrows[a], p.shape, (v.vdims[a], v.edims[g.src[a]]))
            continue
        _check(rep, "section", g.arrows[a], v.sV[a] @ p, Matrix.eye(v.edims[g.src[a]]))
    for m in range(g.n_objects):
        u = g.unit[m]
        if dec.sections[u].shape == v.uV[m].shape:
            _check(rep, "canonical-on-units", g.objects[m], dec.sections[u], v.uV[m])
    return rep


def core_embeddings(v: VBGroupoid) -> tuple:
    """``(L, R)`` per arrow, after checking exactness of ``0 -> t*C -> V -> s*E -> 0``."""
    g = v.base
    for a in range(g.n_arrows):
        r = v.R[a]
        if rank(r) != r.ncols or not (v.sV[a] @ r).is_zero() \
                or v.vdims[a] != v.cdims[g.tgt[a]] + v.edims[g.src[a]]:
            raise InvalidVB(f"core sequence not exact at arrow {g.arrows[a]}")
    return v.L, v.R


def exactness_report(v: VBGroupoid) -> ValidationReport:
    rep = ValidationReport()
    g = v.base
    for a in range(g.n_arrows):
        rep.check("exact-dims", g.arrows[a], v.vdims[a], v.cdims[g.tgt[a]] + v.edims[g.src[a]])
        rep.check("R-injective", g.arrows[a], rank(v.R[a]), v.cdims[g.tgt[a]])
        rep.check("R-in-kernel", g.arrows[a], (v.sV[a] @ v.R[a]).is_zero(), True)
        rep.check("L-injective", g.arrows[a], rank(v.L[a]), v.cdims[g.src[a]])
        rep.check("L-in-t-kernel", g.arrows[a], (v.tV[a] @ v.L[a]).is_zero(), True)
    return rep


# ---------------------------------------------------------------- morphisms

@dataclass(eq=False)
class VBMorphism:
    source: VBGroupoid
    target: VBGroupoid
    arrow_map: tuple
    object_map: tuple
    maps: tuple  # per source arrow
    obj_maps: tuple  # per source object

    @classmethod
    def identity(cls, v: VBGroupoid) -> "VBMorphism":
        g = v.base
        return cls(v, v, tuple(range(g.n_arrows)), tuple(range(g.n_objects)),
                   tuple(Matrix.eye(n) for n in v.vdims), tuple(Matrix.eye(n) for n in v.edims))

    @classmethod
    def zero(cls, v1: VBGroupoid, v2: VBGroupoid) -> "VBMorphism":
        g = v1.base
        return cls(v1, v2, tuple(range(g.n_arrows)), tuple(range(g.n_objects)),
                   tuple(_z(v2.vdims[a], v1.vdims[a]) for a in range(g.n_arrows)),
                   tuple(_z(v2.edims[m], v1.edims[m]) for m in range(g.n_objects)))

    def _same_shape(self, other: "VBMorphism"):
        if self.source is not other.source or self.target is not other.target \
                or self.arrow_map != other.arrow_map:
            raise ShapeMismatchError("morphisms have different source, target or base map")

    def __add__(self, other: "VBMorphism") -> "VBMorphism":
        self._same_shape(other)
        return VBMorphism(self.source, self.target, self.arrow_map, self.object_map,
                          tuple(x + y for x, y in zip(self.maps, other.maps)),
                          tuple(x + y for x, y in zip(self.obj_maps, other.obj_maps)))

    def __neg__(self) -> "VBMorphism":
        return VBMorphism(self.source, self.target, self.arrow_map, self.object_map,
                          tuple(-x for x in self.maps), tuple(-x for x in self.obj_maps))

    def __sub__(self, other: "VBMorphism") -> "VBMorphism":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return (isinstance(other, VBMorphism) and self.arrow_map == other.arrow_map
                and self.maps == other.maps and self.obj_maps == other.obj_maps)

    __hash__ = None

    def is_invertible(self) -> bool:
        return all(m.nrows == m.ncols and det(m) != 0 for m in self.maps + self.obj_maps)


def compose_vb(outer: VBMorphism, inner: VBMorphism) -> VBMorphism:
    if inner.target is not outer.source:
        raise ShapeMismatchError("inner target differs from outer source")
    return VBMorphism(inner.source, outer.target,
                      tuple(outer.arrow_map[a] for a in inner.arrow_map),
                      tuple(outer.object_map[m] for m in inner.object_map),
                      tuple(outer.maps[inner.arrow_map[a]] @ inner.maps[a] for a in range(len(inner.maps))),
                      tuple(outer.obj_maps[inner.object_map[m]] @ inner.obj_maps[m] for m in range(len(inner.obj_maps))))


def check_vb_morphism(f: VBMorphism) -> ValidationReport:
    """Vector bundle map over the base functor that respects all structure maps."""
    v1, v2 = f.source, f.target
    g1, g2 = v1.base, v2.base
    rep = ValidationReport()
    rep.extend_prefixed("base", check_functor(g1, g2, f.object_map, f.arrow_map))
    if not rep.ok:
        return rep
    lab = g1.arrows
    for a in range(g1.n_arrows):
        fa = f.arrow_map[a]
        if f.maps[a].shape != (v2.vdims[fa], v1.vdims[a]):
            rep.add("shape", lab[a], f.maps[a].shape, (v2.vdims[fa], v1.vdims[a]))
    if not rep.ok:
        return rep
    for a in range(g1.n_arrows):
        fa = f.arrow_map[a]
        _check(rep, "commute-source", lab[a], v2.sV[fa] @ f.maps[a], f.obj_maps[g1.src[a]] @ v1.sV[a])
        _check(rep, "commute-target", lab[a], v2.tV[fa] @ f.maps[a], f.obj_maps[g1.tgt[a]] @ v1.tV[a])
        _check(rep, "commute-inverse", lab[a], f.maps[g1.inv[a]] @ v1.invV[a], v2.invV[fa] @ f.maps[a])
    for m in range(g1.n_objects):
        fm = f.object_map[m]
        _check(rep, "commute-unit", g1.objects[m], f.maps[g1.unit[m]] @ v1.uV[m], v2.uV[fm] @ f.obj_maps[m])
    for (a, b), c in g1.comp.items():
        fib = v1.fiber(a, b)
        lhs = f.maps[c] @ v1.mV[(a, b)] @ fib
        from .linalg import block_diag
        rhs = v2.mV[(f.arrow_map[a], f.arrow_map[b])] @ block_diag(f.maps[a], f.maps[b]) @ fib
        _check(rep, "commute-mult", (lab[a], lab[b]), lhs, rhs)
    return rep


# ---------------------------------------------------------------- homotopies

def _check_same_base(v1: VBGroupoid, v2: VBGroupoid):
    if v1.base is not v2.base:
        raise ShapeMismatchError("VB groupoids must share the base groupoid")


def apply_vb_homotopy(v1: VBGroupoid, v2: VBGroupoid, h: Sequence[Matrix]) -> VBMorphism:
    """``J_h`` for ``h_m: E1_m -> C2_m`` (core coordinates)."""
    _check_same_base(v1, v2)
    g = v1.base
    for m in range(g.n_objects):
        if h[m].shape != (v2.cdims[m], v1.edims[m]):
            raise ShapeMismatchError(f"h at object {g.objects[m]} has shape {h[m].shape}")
    maps = tuple(v2.R[a] @ h[g.tgt[a]] @ v1.tV[a] - v2.L[a] @ h[g.src[a]] @ v1.sV[a] for a in range(g.n_arrows))
    objs = tuple(v2.sV[g.unit[m]] @ maps[g.unit[m]] @ v1.uV[m] for m in range(g.n_objects))
    return VBMorphism(v1, v2, tuple(range(g.n_arrows)), tuple(range(g.n_objects)), maps, objs)


def find_homotopy(phi: VBMorphism, psi: VBMorphism):
    """Solve ``phi - psi = J_h``; return ``(h, None)`` or ``(None, residual_rank)``."""
    v1, v2 = phi.source, phi.target
    _check_same_base(v1, v2)
    g = v1.base
    target = phi - psi
    rhs = []
    for a in range(g.n_arrows):
        for row in target.maps[a].rows:
            rhs.extend(row)
    unknowns = [(m, i, j) for m in range(g.n_objects) for i in range(v2.cdims[m]) for j in range(v1.edims[m])]
    cols = []
    for (m, i, j) in unknowns:
        hm = [_z(v2.cdims[k], v1.edims[k]) for k in range(g.n_objects)]
        rows = [[ZERO] * v1.edims[m] for _ in range(v2.cdims[m])]
        rows[i][j] = ONE
        hm[m] = Matrix(rows, v1.edims[m])
        jm = apply_vb_homotopy(v1, v2, hm)
        col = []
        for a in range(g.n_arrows):
            for row in jm.maps[a].rows:
                col.extend(row)
        cols.append(col)
    n = len(rhs)
    if not unknowns:
        return ((tuple(_z(v2.cdims[m], v1.edims[m]) for m in range(g.n_objects)), None)
                if all(x == 0 for x in rhs) else (None, sum(1 for x in rhs if x)))
    a_mat = Matrix.from_columns(cols, n)
    x = solve(a_mat, Matrix.column(rhs))
    if x is None:
        return None, rank(hstack(a_mat, Matrix.column(rhs))) - rank(a_mat)
    vals = x.col(0)
    out, k = [], 0
    for m in range(g.n_objects):
        r, c = v2.cdims[m], v1.edims[m]
        out.append(Matrix([[vals[k + i * c + j] for j in range(c)] for i in range(r)], c))
        k += r * c
    return tuple(out), None


def is_vb_homotopy(phi: VBMorphism, psi: VBMorphism, h) -> ValidationReport:
    """Check ``phi - psi = J_h`` arrowwise."""
    rep = ValidationReport()
    j = apply_vb_homotopy(phi.source, phi.target, h)
    diff = phi - psi
    g = phi.source.base
    for a in range(g.n_arrows):
        _check(rep, "homotopy", g.arrows[a], diff.maps[a], j.maps[a])
    return rep


@dataclass(eq=False)
class HomotopyEquivalence:
    """``phi: V1 -> V2``, ``psi: V2 -> V1`` with ``psi phi - id = J_h1`` and ``phi psi - id = J_h2``."""

    phi: VBMorphism
    psi: VBMorphism
    h1: tuple
    h2: tuple


def check_homotopy_equivalence(eq: HomotopyEquivalence) -> ValidationReport:
    rep = ValidationReport()
    rep.extend_prefixed("phi", check_vb_morphism(eq.phi))
    rep.extend_prefixed("psi", check_vb_morphism(eq.psi))
    if not rep.ok:
        return rep
    v1, v2 = eq.phi.source, eq.phi.target
    rep.extend_prefixed("h1", is_vb_homotopy(compose_vb(eq.psi, eq.phi), VBMorphism.identity(v1), eq.h1))
    rep.extend_prefixed("h2", is_vb_homotopy(compose_vb(eq.phi, eq.psi), VBMorphism.identity(v2), eq.h2))
    return rep


# ---------------------------------------------------------------- duals

def dualize(v: VBGroupoid) -> VBGroupoid:
    """The dual VB groupoid ``V^* => C^*`` in dual bases."""
    g = v.base
    mv = {}
    for (a, b), c in g.comp.items():
        f = v.fiber(a, b)
        prod = v.mV[(a, b)] @ f
        if rank(prod) != v.vdims[c]:
            raise InvalidVB(f"multiplication not onto at {(g.arrows[a], g.arrows[b])}")
        sec = f @ right_inverse(prod)
        mv[(a, b)] = sec.T()
    return VBGroupoid(
        base=g,
        vdims=v.vdims,
        edims=v.cdims,
        sV=tuple(l.T() for l in v.L),
        tV=tuple(r.T() for r in v.R),
        mV=mv,
        invV=tuple(-(v.invV[g.inv[a]].T()) for a in range(g.n_arrows)),
        uV=tuple(p.T() for p in v.core_projection),
    )


def double_dual_iso(v: VBGroupoid) -> VBMorphism:
    """Canonical isomorphism ``V -> V^**``: identity on fibers, evaluation on units."""
    w = dualize(dualize(v))
    g = v.base
    maps = tuple(Matrix.eye(n) for n in v.vdims)
    objs = tuple(w.sV[g.unit[m]] @ v.uV[m] for m in range(g.n_objects))
    return VBMorphism(v, w, tuple(range(g.n_arrows)), tuple(range(g.n_objects)), maps, objs)


def dualize_morphism(f: VBMorphism, v1d: Optional[VBGroupoid] = None, v2d: Optional[VBGroupoid] = None) -> VBMorphism:
    """Transpose of a morphism over the identity, ``V2^* -> V1^*``."""
    v1, v2 = f.source, f.target
    g = v1.base
    v1d = v1d or dualize(v1)
    v2d = v2d or dualize(v2)
    maps = tuple(m.T() for m in f.maps)
    objs = []
    for m in range(g.n_objects):
        # induced map on cores, transposed
        fc = v2.core_coords[m] @ f.maps[g.unit[m]] @ v1.core_basis[m]
        objs.append(fc.T())
    return VBMorphism(v2d, v1d, tuple(range(g.n_arrows)), tuple(range(g.n_objects)), maps, tuple(objs))


def dual_homotopy(v1: VBGroupoid, v2: VBGroupoid, h: Sequence[Matrix]) -> tuple:
    """``h^*: C2^* -> E1^*`` expressed in the dual cores (``E1^*`` via ``xi -> xi o t``)."""
    g = v1.base
    v1d = dualize(v1)
    out = []
    for m in range(g.n_objects):
        # core of V1^* at m, in coordinates dual to E1 through xi -> xi o t
        k = v1d.core_basis[m]
        t_dual = v1.tV[g.unit[m]].T()  # E1_m^* -> V_{1m}^*
        coords = solve(k, t_dual)
        if coords is None:
            raise InvalidVB("dual core does not match E^*")
        out.append(coords @ h[m].T())
    return tuple(out)


# ---------------------------------------------------------------- pullbacks

@dataclass(eq=False)
class VBPullback:
    """``V[calE]`` with the fiber bases used to express its arrows."""

    vb: VBGroupoid
    groupoid: PullbackGroupoid
    bases: tuple  # per arrow of g[X], columns in calE_x + V_gamma + calE_y
    projection: VBMorphism


def vb_pullback(v: VBGroupoid, X: Sequence, phi, edims_x: Sequence[int], phi_hat: Sequence[Matrix]) -> VBPullback:
    """Pull back along ``phi_hat_x: calE_x -> E_{phi x}``, fiberwise surjective over ``phi``."""
    g = v.base
    pb = pullback_groupoid(g, X, phi)
    gx = pb.groupoid
    for x in range(gx.n_objects):
        if rank(phi_hat[x]) != v.edims[pb.phi[x]]:
            raise NotSurjective(f"bundle map not surjective over point {X[x]}")
    ex = tuple(edims_x)
    bases = []
    for k, (x, a, y) in enumerate(pb.triples):
        ni, nv, nj = ex[x], v.vdims[a], ex[y]
        cons = vstack(hstack(phi_hat[x], -v.tV[a], _z(v.edims[g.tgt[a]], nj)),
                      hstack(_z(v.edims[g.src[a]], ni), -v.sV[a], phi_hat[y]))
        bases.append(kernel(cons))
    lefts = [left_inverse(b) for b in bases]
    vdims = tuple(b.ncols for b in bases)

    def parts(k):
        x, a, y = pb.triples[k]
        b = bases[k]
        return (rows_of(b, 0, ex[x]), rows_of(b, ex[x], ex[x] + v.vdims[a]),
                rows_of(b, ex[x] + v.vdims[a], ex[x] + v.vdims[a] + ex[y]))

    P = [parts(k) for k in range(gx.n_arrows)]
    sV = tuple(P[k][2] for k in range(gx.n_arrows))
    tV = tuple(P[k][0] for k in range(gx.n_arrows))
    mV = {}
    for (i, j), c in gx.comp.items():
        _, a, _ = pb.triples[i]
        _, b, _ = pb.triples[j]
        ex_i, mid_i, _ = P[i]
        _, mid_j, ey_j = P[j]
        ni, nj = vdims[i], vdims[j]
        amb = vstack(hstack(ex_i, _z(ex_i.nrows, nj)),
                     v.mV[(a, b)] @ block_diag2(mid_i, mid_j),
                     hstack(_z(ey_j.nrows, ni), ey_j))
        mV[(i, j)] = lefts[c] @ amb
    invV = []
    for k, (x, a, y) in enumerate(pb.triples):
        ex_k, mid_k, ey_k = P[k]
        ki = gx.inv[k]
        amb = vstack(ey_k, v.invV[a] @ mid_k, ex_k)
        invV.append(lefts[ki] @ amb)
    uV = []
    for x in range(gx.n_objects):
        m = pb.phi[x]
        amb = vstack(Matrix.eye(ex[x]), v.uV[m] @ phi_hat[x], Matrix.eye(ex[x]))
        uV.append(lefts[gx.unit[x]] @ amb)
    w = VBGroupoid(gx, vdims, ex, sV, tV, mV, tuple(invV), tuple(uV))
    proj = VBMorphism(w, v, pb.proj, pb.phi, tuple(P[k][1] for k in range(gx.n_arrows)), tuple(phi_hat))
    return VBPullback(w, pb, tuple(bases), proj)


def block_diag2(a: Matrix, b: Matrix) -> Matrix:
    from .linalg import block_diag
    return block_diag(a, b)


def pullback_along(v: VBGroupoid, X: Sequence, phi) -> VBPullback:
    """``V[phi^* E]``: the pullback with ``calE = phi^* E`` and identity bundle maps."""
    g = v.base
    oi = {o: i for i, o in enumerate(g.objects)}
    f = phi if callable(phi) else phi.__getitem__
    dims = [v.edims[oi[f(x)]] for x in X]
    return vb_pullback(v, X, phi, dims, [Matrix.eye(d) for d in dims])


def reindex_vb(v: VBGroupoid, new_base: FiniteGroupoid, arrow_map: Sequence[int], object_map: Sequence[int]) -> VBGroupoid:
    """Transport along a groupoid isomorphism: arrow ``a`` of ``new_base`` uses data of ``arrow_map[a]``."""
    g = new_base
    inv_obj = {object_map[m]: m for m in range(g.n_objects)}
    vd = tuple(v.vdims[arrow_map[a]] for a in range(g.n_arrows))
    ed = tuple(v.edims[object_map[m]] for m in range(g.n_objects))
    mV = {(a, b): v.mV[(arrow_map[a], arrow_map[b])] for (a, b) in g.comp}
    return VBGroupoid(g, vd, ed,
                      tuple(v.sV[arrow_map[a]] for a in range(g.n_arrows)),
                      tuple(v.tV[arrow_map[a]] for a in range(g.n_arrows)),
                      mV,
                      tuple(v.invV[arrow_map[a]] for a in range(g.n_arrows)),
                      tuple(v.uV[object_map[m]] for m in range(g.n_objects)))


def dual_pullback_iso(v: VBGroupoid, X: Sequence, phi) -> VBMorphism:
    """Explicit isomorphism ``V[phi^*E]^* -> V^*[phi^*C^*]``."""
    p1 = pullback_along(v, X, phi)
    vd = dualize(v)
    p2 = pullback_along(vd, X, phi)
    d1 = dualize(p1.vb)
    gx = p1.vb.base
    maps = []
    for k, (x, a, y) in enumerate(p1.groupoid.triples):
        mid1 = p1.projection.maps[k]  # V[phi^*E]_k -> V_a, invertible
        mid2 = p2.projection.maps[k]  # V^*[..]_k -> V_a^*, invertible
        maps.append(inverse(mid2) @ inverse(mid1).T())
    objs = tuple(p2.vb.sV[gx.unit[x]] @ maps[gx.unit[x]] @ d1.uV[x] for x in range(gx.n_objects))
    return VBMorphism(d1, p2.vb, tuple(range(gx.n_arrows)), tuple(range(gx.n_objects)), tuple(maps), objs)


# ---------------------------------------------------------------- Morita morphisms

def check_morita_morphism(f: VBMorphism) -> ValidationReport:
    """Surjective on units and cartesian: ``w -> (t w, f w, s w)`` is a fiberwise iso."""
    rep = check_vb_morphism(f)
    if not rep.ok:
        return rep
    w, v = f.source, f.target
    gw, g = w.base, v.base
    for m in range(gw.n_objects):
        rep.check("unit-surjective", gw.objects[m], rank(f.obj_maps[m]), v.edims[f.object_map[m]])
    if set(f.object_map) != set(range(g.n_objects)):
        rep.add("base-surjective", None, sorted(set(f.object_map)), list(range(g.n_objects)))
    seen = {}
    for a in range(gw.n_arrows):
        key = (gw.tgt[a], f.arrow_map[a], gw.src[a])
        if key in seen:
            rep.add("base-cartesian", gw.arrows[a], "duplicate", gw.arrows[seen[key]])
        seen[key] = a
    for x in range(gw.n_objects):
        for y in range(gw.n_objects):
            for b in range(g.n_arrows):
                if g.tgt[b] == f.object_map[x] and g.src[b] == f.object_map[y] and (x, b, y) not in seen:
                    rep.add("base-cartesian", (gw.objects[x], g.arrows[b], gw.objects[y]), "missing", None)
    if not rep.ok:
        return rep
    for a in range(gw.n_arrows):
        b = f.arrow_map[a]
        x, y = gw.tgt[a], gw.src[a]
        emb = vstack(w.tV[a], f.maps[a], w.sV[a])
        cons = vstack(hstack(f.obj_maps[x], -v.tV[b], _z(v.edims[g.tgt[b]], w.edims[y])),
                      hstack(_z(v.edims[g.src[b]], w.edims[x]), -v.sV[b], f.obj_maps[y]))
        target_dim = kernel(cons).ncols
        rep.check("fiber-injective", gw.arrows[a], rank(emb), w.vdims[a])
        rep.check("fiber-onto", gw.arrows[a], w.vdims[a], target_dim)
    return rep


def morita_factorization(f: VBMorphism, X: Sequence) -> tuple:
    """``f = Phi_phi o f'`` with ``f'(w) = (f0 t w, f w, f0 s w)`` into ``V[phi^*E]``."""
    w, v = f.source, f.target
    gw = w.base
    phi = {X[x]: v.base.objects[f.object_map[x]] for x in range(gw.n_objects)}
    pb = pullback_along(v, X, phi)
    index = {t: k for k, t in enumerate(pb.groupoid.triples)}
    amap = tuple(index[(gw.tgt[a], f.arrow_map[a], gw.src[a])] for a in range(gw.n_arrows))
    maps = []
    for a in range(gw.n_arrows):
        x, y = gw.tgt[a], gw.src[a]
        amb = vstack(f.obj_maps[x] @ w.tV[a], f.maps[a], f.obj_maps[y] @ w.sV[a])
        maps.append(left_inverse(pb.bases[amap[a]]) @ amb)
    fprime = VBMorphism(w, pb.vb, amap, tuple(range(gw.n_objects)), tuple(maps), tuple(f.obj_maps))
    return fprime, pb


def connection_equivalence(v: VBGroupoid, X: Sequence, phi, edims_x, phi_hat, connection=None):
    """Homotopy equivalence between ``V[calE]`` and ``V[phi^*E]`` from a splitting of ``phi_hat``.

    Returns ``(W, V[phi^*E], HomotopyEquivalence)`` with ``phi = Phi'`` and
    ``psi = nabla`` (horizontal lift).
    """
    W = vb_pullback(v, X, phi, edims_x, phi_hat)
    P = pullback_along(v, X, phi)
    g = v.base
    gx = W.vb.base
    nab = tuple(connection[x] if connection is not None else right_inverse(phi_hat[x]) for x in range(gx.n_objects))
    ex = W.vb.edims
    fmaps, nmaps = [], []
    for k, (x, a, y) in enumerate(W.groupoid.triples):
        mid = W.projection.maps[k]
        fmaps.append(left_inverse(P.bases[k]) @ vstack(phi_hat[x] @ W.vb.tV[k], mid, phi_hat[y] @ W.vb.sV[k]))
        vmid = P.projection.maps[k]
        amb = vstack(nab[x] @ v.tV[a] @ vmid, vmid, nab[y] @ v.sV[a] @ vmid)
        nmaps.append(left_inverse(W.bases[k]) @ amb)
    ids = tuple(range(gx.n_arrows)), tuple(range(gx.n_objects))
    fprime = VBMorphism(W.vb, P.vb, ids[0], ids[1], tuple(fmaps), tuple(phi_hat))
    nabla = VBMorphism(P.vb, W.vb, ids[0], ids[1], tuple(nmaps), nab)
    # psi o phi - id = J_h1 with h1 = -(vertical part), phi o psi = id
    h1 = []
    for x in range(gx.n_objects):
        vert = Matrix.eye(ex[x]) - nab[x] @ phi_hat[x]
        k = W.vb.core_basis[x]
        # core element (vert e, 0, 0) of V[calE] at x
        amb = vstack(vert, _z(v.vdims[g.unit[W.groupoid.phi[x]]] + ex[x], ex[x]))
        unit_coords = left_inverse(W.bases[gx.unit[x]]) @ amb
        h1.append(-(left_inverse(k) @ unit_coords))
    h2 = tuple(_z(P.vb.cdims[x], P.vb.edims[x]) for x in range(gx.n_objects))
    return W, P, HomotopyEquivalence(fprime, nabla, tuple(h1), h2)


@dataclass(eq=False)
class MoritaWitness:
    """Bitorsor base ``X`` with legs and a homotopy equivalence of the pullbacks.

    ``arrow_iso[a]`` is the arrow of ``Gamma_2[X]`` identified with arrow ``a``
    of ``Gamma_1[X]``; ``equivalence`` lives over ``Gamma_1[X]``.
    """

    X: tuple
    phi1: dict
    phi2: dict
    arrow_iso: tuple
    equivalence: HomotopyEquivalence
    pull1: VBGroupoid
    pull2: VBGroupoid


def morita_witness_check(v1: VBGroupoid, v2: VBGroupoid, wit: MoritaWitness) -> ValidationReport:
    """Verify the legs, the base identification and the homotopy equivalence."""
    rep = ValidationReport()
    p1 = pullback_along(v1, wit.X, wit.phi1)
    p2 = pullback_along(v2, wit.X, wit.phi2)
    g1x, g2x = p1.vb.base, p2.vb.base
    iso = wit.arrow_iso
    if sorted(iso) != list(range(g2x.n_arrows)) or len(iso) != g1x.n_arrows:
        rep.add("bitorsor-bijection", None, len(iso), g2x.n_arrows)
        return rep
    rep.extend_prefixed("bitorsor", check_functor(g1x, g2x, tuple(range(g1x.n_objects)), iso))
    if not rep.ok:
        return rep
    moved = reindex_vb(p2.vb, g1x, iso, tuple(range(g1x.n_objects)))
    for tag, a, b in (("pull1", wit.pull1, p1.vb), ("pull2", wit.pull2, moved)):
        if a.vdims != b.vdims or a.sV != b.sV or a.tV != b.tV or a.invV != b.invV or a.uV != b.uV:
            rep.add(tag, None, "supplied pullback differs from recomputed", None)
    rep.extend_prefixed("equivalence", check_homotopy_equivalence(wit.equivalence))
    return rep


def dual_equivalence(eq: HomotopyEquivalence) -> HomotopyEquivalence:
    """Transpose a homotopy equivalence: ``(psi^*, phi^*)`` with dual homotopies."""
    v1, v2 = eq.phi.source, eq.phi.target
    d1, d2 = dualize(v1), dualize(v2)
    phid = dualize_morphism(eq.phi, d1, d2)  # V2^* -> V1^*
    psid = dualize_morphism(eq.psi, d2, d1)  # V1^* -> V2^*
    # (psi phi)^* = phi^* psi^* = id + J_{h1}^*, so the roles swap
    h1d = dual_homotopy(v1, v1, eq.h1)
    h2d = dual_homotopy(v2, v2, eq.h2)
    return HomotopyEquivalence(psid, phid, h1d, h2d)


def dual_witness(v1: VBGroupoid, v2: VBGroupoid, wit: MoritaWitness) -> tuple:
    """Dual VB groupoids with a witness built from the transposed equivalence.

    The transposed equivalence lives on the duals of the pullbacks; it is moved to
    the pullbacks of the duals through :func:`dual_pullback_iso`.
    """
    d1, d2 = dualize(v1), dualize(v2)
    de = dual_equivalence(wit.equivalence)
    g1x = wit.equivalence.phi.source.base
    ids = tuple(range(g1x.n_arrows)), tuple(range(g1x.n_objects))
    i1 = dual_pullback_iso(v1, wit.X, wit.phi1)
    i2 = dual_pullback_iso(v2, wit.X, wit.phi2)
    P1 = i1.target
    P2 = reindex_vb(i2.target, g1x, wit.arrow_iso, ids[1])
    A1 = VBMorphism(de.phi.source, P1, *ids, i1.maps, i1.obj_maps)
    A2 = VBMorphism(de.phi.target, P2, *ids, tuple(i2.maps[wit.arrow_iso[a]] for a in ids[0]), i2.obj_maps)
    phi = compose_vb(A2, compose_vb(de.phi, invert_vb_iso(A1)))
    psi = compose_vb(A1, compose_vb(de.psi, invert_vb_iso(A2)))
    new = HomotopyEquivalence(phi, psi, transport_homotopy(de.h1, A1), transport_homotopy(de.h2, A2))
    return d1, d2, MoritaWitness(wit.X, wit.phi1, wit.phi2, wit.arrow_iso, new, P1, P2)


def invert_vb_iso(f: VBMorphism) -> VBMorphism:
    g = f.source.base
    inv_arrow = [0] * len(f.arrow_map)
    for a, b in enumerate(f.arrow_map):
        inv_arrow[b] = a
    inv_obj = [0] * len(f.object_map)
    for m, n in enumerate(f.object_map):
        inv_obj[n] = m
    return VBMorphism(f.target, f.source, tuple(inv_arrow), tuple(inv_obj),
                      tuple(inverse(f.maps[inv_arrow[b]]) for b in range(len(inv_arrow))),
                      tuple(inverse(f.obj_maps[inv_obj[n]]) for n in range(len(inv_obj))))


def transport_homotopy(h: Sequence[Matrix], iso: VBMorphism) -> tuple:
    """Conjugate ``h: E -> C`` of a VB groupoid along an isomorphism over the identity."""
    v, w = iso.source, iso.target
    g = v.base
    out = []
    for m in range(g.n_objects):
        core_map = w.core_coords[m] @ iso.maps[g.unit[m]] @ v.core_basis[m]
        out.append(core_map @ h[m] @ inverse(iso.obj_maps[m]))
    return tuple(out)


# ---------------------------------------------------------------- bridge

def homotopy_to_morita_bridge(eq: HomotopyEquivalence):
    """Maps ``A``, ``B`` between ``V1[E1 x_M E2]`` and ``V2[E1 x_M E2]`` and ``h_tilde``.

    ``B o A = id + J_h_tilde`` with ``h_tilde(e, e~) = ((psi h2 - h1 psi0)(e~), 0)``.
    """
    rep = check_homotopy_equivalence(eq)
    if not rep.ok:
        raise NotAHomotopyEquivalence(str(rep[0]))
    phi, psi, h1, h2 = eq.phi, eq.psi, eq.h1, eq.h2
    v1, v2 = phi.source, phi.target
    g = v1.base
    X = list(g.objects)
    ident = {o: o for o in X}
    n = g.n_objects
    ed = [v1.edims[m] + v2.edims[m] for m in range(n)]
    pr1 = [hstack(Matrix.eye(v1.edims[m]), _z(v1.edims[m], v2.edims[m])) for m in range(n)]
    pr2 = [hstack(_z(v2.edims[m], v1.edims[m]), Matrix.eye(v2.edims[m])) for m in range(n)]
    W1 = vb_pullback(v1, X, ident, ed, pr1)
    W2 = vb_pullback(v2, X, ident, ed, pr2)
    gx = W1.vb.base
    psi_core = [v1.core_coords[m] @ psi.maps[g.unit[m]] @ v2.core_basis[m] for m in range(n)]
    Amaps, Bmaps = [], []
    for k, (x, a, y) in enumerate(W1.groupoid.triples):
        n1, n2 = v1.edims, v2.edims
        b1 = W1.bases[k]
        e_t = rows_of(b1, 0, n1[x] + n2[x])
        vmid = rows_of(b1, n1[x] + n2[x], n1[x] + n2[x] + v1.vdims[a])
        e_s = rows_of(b1, n1[x] + n2[x] + v1.vdims[a], b1.nrows)
        et2, es2 = pr2[x] @ e_t, pr2[y] @ e_s
        mid = phi.maps[a] @ vmid + v2.R[a] @ h2[x] @ et2 - v2.L[a] @ h2[y] @ es2
        new_t = vstack(psi.obj_maps[x] @ et2 + v1.tV[a] @ vmid, v2.tV[a] @ mid)
        new_s = vstack(psi.obj_maps[y] @ es2 + v1.sV[a] @ vmid, v2.sV[a] @ mid)
        Amaps.append(left_inverse(W2.bases[k]) @ vstack(new_t, mid, new_s))
        b2 = W2.bases[k]
        f_t = rows_of(b2, 0, n1[x] + n2[x])
        wmid = rows_of(b2, n1[x] + n2[x], n1[x] + n2[x] + v2.vdims[a])
        f_s = rows_of(b2, n1[x] + n2[x] + v2.vdims[a], b2.nrows)
        e1t, e1s = pr1[x] @ f_t, pr1[y] @ f_s
        mid2 = psi.maps[a] @ wmid - v1.R[a] @ h1[x] @ e1t + v1.L[a] @ h1[y] @ e1s
        out_t = vstack(v1.tV[a] @ mid2, phi.obj_maps[x] @ e1t - v2.tV[a] @ wmid)
        out_s = vstack(v1.sV[a] @ mid2, phi.obj_maps[y] @ e1s - v2.sV[a] @ wmid)
        Bmaps.append(left_inverse(W1.bases[k]) @ vstack(out_t, mid2, out_s))
    A0, B0 = [], []
    for x in range(n):
        A0.append(vstack(hstack(Matrix.eye(v1.edims[x]), psi.obj_maps[x]),
                         hstack(phi.obj_maps[x], v2.rho[x] @ h2[x])))
        B0.append(vstack(hstack(-(v1.rho[x] @ h1[x]), psi.obj_maps[x]),
                         hstack(phi.obj_maps[x], -Matrix.eye(v2.edims[x]))))
    ids = tuple(range(gx.n_arrows)), tuple(range(gx.n_objects))
    A = VBMorphism(W1.vb, W2.vb, ids[0], ids[1], tuple(Amaps), tuple(A0))
    B = VBMorphism(W2.vb, W1.vb, ids[0], ids[1], tuple(Bmaps), tuple(B0))
    htil = []
    for x in range(n):
        c = psi_core[x] @ h2[x] - h1[x] @ psi.obj_maps[x]  # E2 -> C1
        # core element of W1 at x: ((rho c, 0), c, 0) in ambient coordinates
        K1 = v1.core_basis[x]
        amb = vstack(v1.rho[x] @ c, _z(v2.edims[x], c.ncols), K1 @ c, _z(ed[x], c.ncols))
        unit_coords = left_inverse(W1.bases[gx.unit[x]]) @ amb
        full = hstack(_z(W1.vb.cdims[x], v1.edims[x]), W1.vb.core_coords[x] @ unit_coords)
        htil.append(full)
    return A, B, tuple(htil), W1.vb, W2.vb


def check_bridge(eq: HomotopyEquivalence) -> ValidationReport:
    A, B, htil, W1, W2 = homotopy_to_morita_bridge(eq)
    rep = ValidationReport()
    rep.extend_prefixed("A", check_vb_morphism(A))
    rep.extend_prefixed("B", check_vb_morphism(B))
    J = apply_vb_homotopy(W1, W1, htil)
    lhs = compose_vb(B, A)
    rhs = VBMorphism.identity(W1) + J
    g = W1.base
    for a in range(g.n_arrows):
        _check(rep, "BA-identity", g.arrows[a], lhs.maps[a], rhs.maps[a])
    for x in range(g.n_objects):
        _check(rep, "BA-identity-units", g.objects[x], lhs.obj_maps[x], rhs.obj_maps[x])
    if not rhs.is_invertible():
        rep.add("id+J-invertible", None, False, True)
    return rep


# ---------------------------------------------------------------- VB cochains

def _first_arrow(g: FiniteGroupoid, k: int, c) -> int:
    return c[0]


def vb_ambient_dims(v: VBGroupoid, k: int) -> list:
    g = v.base
    if k == 0:
        return list(v.cdims)
    return [v.vdims[c[0]] for c in g.nerve(k)]


def _offsets(dims):
    out, o = [], 0
    for d in dims:
        out.append(o)
        o += d
    return out, o


def vb_cochains(v: VBGroupoid, k: int) -> Matrix:
    """Basis of ``C^k_VB`` as columns in the ambient space ``(+)_c V_{c_1}`` (``k = 0``: ``(+)_m C_m``)."""
    g = v.base
    dims = vb_ambient_dims(v, k)
    offs, total = _offsets(dims)
    if k == 0:
        return Matrix.eye(total)
    idx = g.nerve_index(k)
    ent, row = {}, 0
    for i, c in enumerate(g.nerve(k)):
        a = c[0]
        u = g.unit[g.src[a]]
        base = (u,) + c[1:]
        j = idx[base]
        if j == i:
            continue
        s1, s2 = v.sV[a], v.sV[u]
        for r in range(s1.nrows):
            for col in range(s1.ncols):
                if s1.rows[r][col]:
                    ent[(row + r, offs[i] + col)] = ent.get((row + r, offs[i] + col), ZERO) + s1.rows[r][col]
            for col in range(s2.ncols):
                if s2.rows[r][col]:
                    ent[(row + r, offs[j] + col)] = ent.get((row + r, offs[j] + col), ZERO) - s2.rows[r][col]
        row += s1.nrows
    return sparse_kernel(ent, row, total)


def split_cochain(v: VBGroupoid, k: int, vec: Sequence) -> dict:
    g = v.base
    dims = vb_ambient_dims(v, k)
    offs, _ = _offsets(dims)
    keys = list(range(g.n_objects)) if k == 0 else g.nerve(k)
    return {c: tuple(vec[offs[i]:offs[i] + dims[i]]) for i, c in enumerate(keys)}


def join_cochain(v: VBGroupoid, k: int, sec: dict) -> tuple:
    g = v.base
    keys = list(range(g.n_objects)) if k == 0 else g.nerve(k)
    out = []
    for c in keys:
        out.extend(sec[c])
    return tuple(out)


def is_projectable(v: VBGroupoid, k: int, sec: dict) -> bool:
    if k == 0:
        return True
    g = v.base
    for c in g.nerve(k):
        a = c[0]
        u = g.unit[g.src[a]]
        if v.sV[a].apply(sec[c]) != v.sV[u].apply(sec[(u,) + c[1:]]):
            return False
    return True


def _vadd(*vs):
    return tuple(sum(x, ZERO) for x in zip(*vs))


def vb_coboundary(v: VBGroupoid, k: int, sec: dict, check: bool = True) -> dict:
    """Coboundary of a VB cochain of level ``k`` (a dict over the nerve)."""
    g = v.base
    if check and not is_projectable(v, k, sec):
        raise NotProjectable(f"level-{k} section is not left projectable")
    out = {}
    if k == 0:
        for a in range(g.n_arrows):
            out[(a,)] = _vadd(v.L[a].apply(sec[g.src[a]]), tuple(-x for x in v.R[a].apply(sec[g.tgt[a]])))
        return out
    for c in g.nerve(k + 1):
        c0, c1 = c[0], c[1]
        prod = g.mul(c0, c1)
        s01 = sec[(prod,) + c[2:]]
        s1 = sec[c[1:]]
        inv1 = v.invV[c1].apply(s1)
        first = v.mV[(prod, g.inv[c1])].apply(tuple(s01) + tuple(inv1))
        terms = [tuple(-x for x in first)]
        for i in range(2, k + 1):
            merged = c[:i - 1] + (g.mul(c[i - 1], c[i]),) + c[i + 1:]
            sgn = ONE if i % 2 == 0 else -ONE
            terms.append(tuple(sgn * x for x in sec[merged]))
        sgn = ONE if (k + 1) % 2 == 0 else -ONE
        terms.append(tuple(sgn * x for x in sec[c[:-1]]))
        out[c] = _vadd(*terms)
    return out


def vb_dual_intertwining(v: VBGroupoid, k: int, sec: dict, vd: Optional[VBGroupoid] = None) -> ValidationReport:
    """Check ``i(delta sigma) = delta(i sigma)`` on a basis of composable dual tuples."""
    g = v.base
    vd = vd or dualize(v)
    rep = ValidationReport()
    dsec = vb_coboundary(v, k, sec)

    def pair(eta, vec):
        return sum((x * y for x, y in zip(eta, vec)), ZERO)

    if k == 0:
        for a in range(g.n_arrows):
            for j in range(v.vdims[a]):
                eta = tuple(ONE if i == j else ZERO for i in range(v.vdims[a]))
                lhs = pair(eta, dsec[(a,)])
                rhs = pair(vd.sV[a].apply(eta), sec[g.src[a]]) - pair(vd.tV[a].apply(eta), sec[g.tgt[a]])
                rep.check("intertwine-0", (g.arrows[a], j), lhs, rhs)
        return rep
    for c in g.nerve(k + 1):
        dims = [v.vdims[a] for a in c]
        offs, total = _offsets(dims)
        blocks = []
        for j in range(1, len(c)):
            row = []
            for i, a in enumerate(c):
                if i == j - 1:
                    row.append(vd.sV[a])
                elif i == j:
                    row.append(-vd.tV[a])
                else:
                    row.append(_z(vd.sV[c[j - 1]].nrows, dims[i]))
            blocks.append(hstack(*row))
        basis = kernel(vstack(*blocks)) if blocks else Matrix.eye(total)
        for b in basis.cols():
            etas = [tuple(b[offs[i]:offs[i] + dims[i]]) for i in range(len(c))]
            lhs = pair(etas[0], dsec[c])
            rhs = pair(etas[1], sec[c[1:]])
            prod = g.mul(c[0], c[1])
            eta01 = vd.mV[(c[0], c[1])].apply(etas[0] + etas[1])
            rhs -= pair(eta01, sec[(prod,) + c[2:]])
            for j in range(2, k + 1):
                merged = c[:j - 1] + (g.mul(c[j - 1], c[j]),) + c[j + 1:]
                sgn = ONE if j % 2 == 0 else -ONE
                rhs += sgn * pair(etas[0], sec[merged])
            sgn = ONE if (k + 1) % 2 == 0 else -ONE
            rhs += sgn * pair(etas[0], sec[c[:-1]])
            rep.check(f"intertwine-{k}", tuple(g.arrows[a] for a in c), lhs, rhs)
    return rep


def vb_hat(f: VBMorphism, k: int, sec: dict) -> dict:
    """``Phi^ sigma = Phi o sigma``; on level 0 the induced map of cores."""
    v1, v2 = f.source, f.target
    g = v1.base
    if k == 0:
        return {m: (v2.core_coords[m] @ f.maps[g.unit[m]] @ v1.core_basis[m]).apply(sec[m])
                for m in range(g.n_objects)}
    return {c: f.maps[c[0]].apply(sec[c]) for c in g.nerve(k)}


def h_hat(v1: VBGroupoid, v2: VBGroupoid, h, k: int, sec: dict) -> dict:
    """``h^: C^{k+1}_VB(V1) -> C^k_VB(V2)``, ``-h(s sigma(1_{t g1}, g1, ...)) . 0_{g1}``."""
    g = v1.base
    if k == 0:
        return {m: tuple(-x for x in (h[m] @ v1.sV[g.unit[m]]).apply(sec[(g.unit[m],)]))
                for m in range(g.n_objects)}
    out = {}
    for c in g.nerve(k):
        a = c[0]
        t = g.tgt[a]
        u = g.unit[t]
        val = (v2.R[a] @ h[t] @ v1.sV[u]).apply(sec[(u,) + c])
        out[c] = tuple(-x for x in val)
    return out


def vb_chain_map_and_homotopy(phi: VBMorphism, psi: VBMorphism, h, max_level: int = 2) -> ValidationReport:
    """``delta h^ + h^ delta = Phi^ - Psi^`` and chain-map property through ``max_level``."""
    rep = is_vb_homotopy(phi, psi, h)
    if not rep.ok:
        return rep
    v1, v2 = phi.source, phi.target
    for k in range(max_level + 1):
        basis = vb_cochains(v1, k)
        for j, col in enumerate(basis.cols()):
            sec = split_cochain(v1, k, col)
            dsec = vb_coboundary(v1, k, sec)
            for name, f in (("phi", phi), ("psi", psi)):
                lhs = vb_coboundary(v2, k, vb_hat(f, k, sec))
                rhs = vb_hat(f, k + 1, dsec)
                if lhs != rhs:
                    rep.add(f"chain-map-{name}", (k, j), None, None)
            total = {c: x for c, x in h_hat(v1, v2, h, k, dsec).items()}
            if k > 0:
                dh = vb_coboundary(v2, k - 1, h_hat(v1, v2, h, k - 1, sec))
                total = {c: _vadd(total[c], dh[c]) for c in total}
            fp, fs = vb_hat(phi, k, sec), vb_hat(psi, k, sec)
            want = {c: tuple(x - y for x, y in zip(fp[c], fs[c])) for c in fp}
            if total != want:
                bad = next(c for c in want if total[c] != want[c])
                rep.add(f"homotopy-{k}", (k, j, bad), total[bad], want[bad])
    return rep


# ---------------------------------------------------------------- multiplicative sections

def _minor(m: Matrix, rows: Sequence[int], cols: Sequence[int]):
    if not rows:
        return ONE
    return det(m.submatrix(rows, cols))


def multiplicative_sections(v: VBGroupoid, k: int) -> Matrix:
    """Basis of multiplicative ``P in Gamma(wedge^k V^*)``, as columns over ``(+)_a wedge^k V_a^*``."""
    from .graded import ExteriorIndex
    if k < 1:
        raise ValueError("k must be at least 1")
    g = v.base
    idx = [list(ExteriorIndex(v.vdims[a], k).enumerate()) for a in range(g.n_arrows)]
    offs, total = _offsets([len(i) for i in idx])
    ent, row = {}, 0
    for (a, b), c in g.comp.items():
        f = v.fiber(a, b)
        nf = f.ncols
        prod = v.mV[(a, b)] @ f
        na = v.vdims[a]
        pa = rows_of(f, 0, na)
        pb = rows_of(f, na, f.nrows)
        for I in ExteriorIndex(nf, k).enumerate():
            for mat, arrow, sgn in ((prod, c, ONE), (pa, a, -ONE), (pb, b, -ONE)):
                for jj, J in enumerate(idx[arrow]):
                    val = _minor(mat, list(J), list(I))
                    if val:
                        key = (row, offs[arrow] + jj)
                        ent[key] = ent.get(key, ZERO) + sgn * val
            row += 1
    return sparse_kernel({k2: x for k2, x in ent.items() if x}, row, total)


def multiplicative_linear_via_cochains(v: VBGroupoid) -> int:
    """Independent count for ``k = 1``: cocycles in ``C^1_VB(V^*)``."""
    vd = dualize(v)
    basis = vb_cochains(vd, 1)
    g = v.base
    rows = []
    for col in basis.cols():
        d = vb_coboundary(vd, 1, split_cochain(vd, 1, col), check=False)
        rows.append(join_cochain(vd, 2, d))
    if not rows:
        return 0
    m = Matrix.from_columns(rows, len(rows[0]))
    return basis.ncols - rank(m)


# ---------------------------------------------------------------- split models

def split_vb(base: FiniteGroupoid, cdims: Sequence[int], edims: Sequence[int], rho, RE, RC, Omega) -> VBGroupoid:
    """``t*C x s*E`` with ``s(c, e) = e``, ``t(c, e) = rho c + RE e`` and
    ``(c1, e1)(c2, e2) = (c1 + RC_1 c2 - Omega(1, 2) e2, e2)``.
    """
    g = base
    vd = tuple(cdims[g.tgt[a]] + edims[g.src[a]] for a in range(g.n_arrows))
    sV, tV = [], []
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        sV.append(hstack(_z(edims[s], cdims[t]), Matrix.eye(edims[s])))
        tV.append(hstack(rho[t], RE[a]))
    mV = {}
    for (a, b), c in g.comp.items():
        ta, sa, sb = g.tgt[a], g.src[a], g.src[b]
        tb = g.tgt[b]
        top = hstack(Matrix.eye(cdims[ta]), _z(cdims[ta], edims[sa]), RC[a], -Omega[(a, b)])
        bot = hstack(_z(edims[sb], cdims[ta] + edims[sa] + cdims[tb]), Matrix.eye(edims[sb]))
        mV[(a, b)] = vstack(top, bot)
    uV = tuple(vstack(_z(cdims[m], edims[m]), Matrix.eye(edims[m])) for m in range(g.n_objects))
    partial = VBGroupoid(g, vd, tuple(edims), tuple(sV), tuple(tV), mV, tuple(_z(vd[g.inv[a]], vd[a]) for a in range(g.n_arrows)), uV)
    return VBGroupoid(g, vd, tuple(edims), tuple(sV), tuple(tV), mV, solve_inverses(partial), uV)


def solve_inverses(v: VBGroupoid) -> tuple:
    """Groupoid inverse per arrow from ``s, t, m, u`` alone."""
    g = v.base
    out = []
    for a in range(g.n_arrows):
        ia = g.inv[a]
        n, ni = v.vdims[a], v.vdims[ia]
        t = g.tgt[a]
        m = v.mV[(a, ia)]
        m_left = rows_of(m.T(), 0, n).T()
        m_right = rows_of(m.T(), n, n + ni).T()
        # unknown W: composable (tV[ia] W = sV[a]), sV[ia] W = tV[a] and v . W v = u(t v)
        lhs = vstack(v.tV[ia], v.sV[ia], m_right)
        rhs = vstack(v.sV[a], v.tV[a], v.uV[t] @ v.tV[a] - m_left)
        w = solve(lhs, rhs)
        if w is None:
            raise InvalidVB(f"no inverse at arrow {g.arrows[a]}")
        out.append(w)
    return tuple(out)


def transport_vb(v: VBGroupoid, T: Sequence[Matrix], S: Sequence[Matrix]) -> tuple:
    """Change fiber bases by invertible ``T_a`` (arrows) and ``S_m`` (objects).

    Returns the new VB groupoid and the isomorphism from ``v`` to it.
    """
    g = v.base
    Ti = [inverse(t) for t in T]
    Si = [inverse(s) for s in S]
    sV = tuple(S[g.src[a]] @ v.sV[a] @ Ti[a] for a in range(g.n_arrows))
    tV = tuple(S[g.tgt[a]] @ v.tV[a] @ Ti[a] for a in range(g.n_arrows))
    from .linalg import block_diag
    mV = {(a, b): T[c] @ v.mV[(a, b)] @ block_diag(Ti[a], Ti[b]) for (a, b), c in g.comp.items()}
    invV = tuple(T[g.inv[a]] @ v.invV[a] @ Ti[a] for a in range(g.n_arrows))
    uV = tuple(T[g.unit[m]] @ v.uV[m] @ Si[m] for m in range(g.n_objects))
    w = VBGroupoid(g, v.vdims, v.edims, sV, tV, mV, invV, uV)
    iso = VBMorphism(v, w, tuple(range(g.n_arrows)), tuple(range(g.n_objects)), tuple(T), tuple(S))
    return w, iso


def random_transport(rng: random.Random, v: VBGroupoid, max_coeff: int = 2) -> tuple:
    from .random_instances import rand_invertible
    T = [rand_invertible(rng, n, max_coeff) for n in v.vdims]
    S = [rand_invertible(rng, n, max_coeff) for n in v.edims]
    return transport_vb(v, T, S)


# ---------------------------------------------------------------- random homotopy equivalences

def vb_direct_sum(v1: VBGroupoid, v2: VBGroupoid) -> tuple:
    """``V1 + V2`` with inclusions and projections (fibers ordered ``V1_a + V2_a``)."""
    from .linalg import block_diag
    _check_same_base(v1, v2)
    g = v1.base
    vd = tuple(a + b for a, b in zip(v1.vdims, v2.vdims))
    ed = tuple(a + b for a, b in zip(v1.edims, v2.edims))
    mV = {}
    for (a, b) in g.comp:
        n1a, n2a, n1b, n2b = v1.vdims[a], v2.vdims[a], v1.vdims[b], v2.vdims[b]
        m1, m2 = v1.mV[(a, b)], v2.mV[(a, b)]
        m1a, m1b = rows_of(m1.T(), 0, n1a).T(), rows_of(m1.T(), n1a, n1a + n1b).T()
        m2a, m2b = rows_of(m2.T(), 0, n2a).T(), rows_of(m2.T(), n2a, n2a + n2b).T()
        top = hstack(m1a, _z(m1.nrows, n2a), m1b, _z(m1.nrows, n2b))
        bot = hstack(_z(m2.nrows, n1a), m2a, _z(m2.nrows, n1b), m2b)
        mV[(a, b)] = vstack(top, bot)
    w = VBGroupoid(g, vd, ed,
                   tuple(block_diag(x, y) for x, y in zip(v1.sV, v2.sV)),
                   tuple(block_diag(x, y) for x, y in zip(v1.tV, v2.tV)), mV,
                   tuple(block_diag(x, y) for x, y in zip(v1.invV, v2.invV)),
                   tuple(block_diag(x, y) for x, y in zip(v1.uV, v2.uV)))
    ids = tuple(range(g.n_arrows)), tuple(range(g.n_objects))

    def inc(dims1, dims2, first):
        return tuple(vstack(Matrix.eye(a), _z(b, a)) if first else vstack(_z(a, b), Matrix.eye(b))
                     for a, b in zip(dims1, dims2))

    def proj(dims1, dims2, first):
        return tuple(hstack(Matrix.eye(a), _z(a, b)) if first else hstack(_z(b, a), Matrix.eye(b))
                     for a, b in zip(dims1, dims2))

    i1 = VBMorphism(v1, w, *ids, inc(v1.vdims, v2.vdims, True), inc(v1.edims, v2.edims, True))
    p1 = VBMorphism(w, v1, *ids, proj(v1.vdims, v2.vdims, True), proj(v1.edims, v2.edims, True))
    i2 = VBMorphism(v2, w, *ids, inc(v1.vdims, v2.vdims, False), inc(v1.edims, v2.edims, False))
    p2 = VBMorphism(w, v2, *ids, proj(v1.vdims, v2.vdims, False), proj(v1.edims, v2.edims, False))
    return w, i1, p1, i2, p2


def conjugate_morphism(f: VBMorphism, src_iso: VBMorphism, tgt_iso: VBMorphism) -> VBMorphism:
    """``tgt_iso o f o src_iso^-1``."""
    return compose_vb(tgt_iso, compose_vb(f, invert_vb_iso(src_iso)))


def random_homotopy_equivalence(rng: random.Random, v1: VBGroupoid, contractible: VBGroupoid,
                                bound: int = 2) -> HomotopyEquivalence:
    """``V1 -> V1 + K`` with ``K`` contractible, perturbed by random ``J_k``, ``J_l`` and moved to random bases."""
    from .random_instances import rand_matrix
    w, i1, p1, _, _ = vb_direct_sum(v1, contractible)
    g = v1.base
    k = tuple(rand_matrix(rng, w.cdims[m], v1.edims[m], bound) for m in range(g.n_objects))
    l = tuple(rand_matrix(rng, v1.cdims[m], w.edims[m], bound) for m in range(g.n_objects))
    phi = i1 + apply_vb_homotopy(v1, w, k)
    psi = p1 + apply_vb_homotopy(w, v1, l)
    w2, iso = random_transport(rng, w, bound)
    phi = compose_vb(iso, phi)
    psi = compose_vb(psi, invert_vb_iso(iso))
    h1, r1 = find_homotopy(compose_vb(psi, phi), VBMorphism.identity(v1))
    h2, r2 = find_homotopy(compose_vb(phi, psi), VBMorphism.identity(w2))
    if h1 is None or h2 is None:
        raise NotAHomotopyEquivalence(f"no homotopy found (residual ranks {r1}, {r2})")
    return HomotopyEquivalence(phi, psi, h1, h2)


# ---------------------------------------------------------------- witness constructors

def identity_witness(v: VBGroupoid) -> MoritaWitness:
    """``v`` against itself over ``X = M``."""
    g = v.base
    X = tuple(g.objects)
    ident = {o: o for o in X}
    P = pullback_along(v, X, ident)
    e = VBMorphism.identity(P.vb)
    zero = tuple(_z(P.vb.cdims[x], P.vb.edims[x]) for x in range(P.vb.base.n_objects))
    return MoritaWitness(X, ident, dict(ident), tuple(range(P.vb.base.n_arrows)),
                         HomotopyEquivalence(e, e, zero, zero), P.vb, P.vb)


def pullback_witness(v: VBGroupoid, X: Sequence, phi, edims_x, phi_hat, connection=None) -> tuple:
    """``v`` against ``V[calE]`` over ``Gamma[X]`` with legs ``phi`` and ``id_X``.

    Returns ``(V[calE], witness)``; the equivalence is the connection one composed
    with the canonical identification ``V[calE] = V[calE][id^* calE]``.
    """
    W, P, eqv = connection_equivalence(v, X, phi, edims_x, phi_hat, connection)
    w = W.vb
    gx = P.vb.base
    ident = {x: x for x in X}
    P2 = pullback_along(w, X, ident)
    index = {t: k for k, t in enumerate(P2.groupoid.triples)}
    arrow_iso = tuple(index[(gx.tgt[a], a, gx.src[a])] for a in range(gx.n_arrows))
    moved = reindex_vb(P2.vb, gx, arrow_iso, tuple(range(gx.n_objects)))
    maps = tuple(left_inverse(P2.bases[arrow_iso[a]]) @ vstack(w.tV[a], Matrix.eye(w.vdims[a]), w.sV[a])
                 for a in range(gx.n_arrows))
    iota = VBMorphism(w, moved, tuple(range(gx.n_arrows)), tuple(range(gx.n_objects)), maps,
                      tuple(Matrix.eye(d) for d in w.edims))
    phi_w = compose_vb(iota, eqv.psi)
    psi_w = compose_vb(eqv.phi, invert_vb_iso(iota))
    h2 = transport_homotopy(eqv.h1, iota)
    new = HomotopyEquivalence(phi_w, psi_w, eqv.h2, h2)
    return w, MoritaWitness(tuple(X), dict(phi) if not callable(phi) else {x: phi(x) for x in X},
                            ident, arrow_iso, new, P.vb, moved)


def fold_map(g: FiniteGroupoid, copies: int = 2) -> tuple:
    """``X = M x {0..copies-1}`` with the projection to ``M``."""
    X = tuple((o, i) for o in g.objects for i in range(copies))
    return X, {x: x[0] for x in X}
