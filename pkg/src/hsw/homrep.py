"""Two-term representations up to homotopy of finite groupoids.

A module is the quadruple ``(rho, RE, RC, Omega)`` with ``rho_m: C_m -> E_m``,
``RE_a: E_{s a} -> E_{t a}``, ``RC_a: C_{s a} -> C_{t a}`` and
``Omega[(a, b)]: E_{s b} -> C_{t a}``. Its complex in degree ``n`` is
``W_n = C^{n+1}(C) + C^n(E)`` (``n >= -1``) where cochain values over a tuple sit
over the target of its first arrow, and

    (D f)_C = -delta_RC f_C + Omega f_E,     (D f)_E = rho f_C + delta_RE f_E,

with ``(Omega g)(a1, a2, ...) = Omega(a1, a2) g(a3, ...)``. Module morphisms
``(phiC, phiE, mu)`` act by ``(F f)_C = phiC f_C + mu_{a1} f_E(a2, ...)`` and
homotopies ``h: E -> C'`` by ``(H f)_C = h f_E``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

from .fingrpd import FiniteGroupoid, PullbackGroupoid, pullback_groupoid
from .linalg import ONE, ZERO, Matrix, det, hstack, inverse, left_inverse, right_inverse, solve, vstack
from .report import InvalidDecomposition, InvalidModule, ShapeMismatchError, ValidationReport
from .vbgrpd import (
    RightDecomposition,
    VBGroupoid,
    VBMorphism,
    VBPullback,
    apply_vb_homotopy,
    check_decomposition,
    check_vb_morphism,
    pullback_along,
    split_vb,
)


def _z(m: int, n: int) -> Matrix:
    return Matrix.zeros(m, n)


def _first_diff(rep: ValidationReport, tag: str, loc, a: Matrix, b: Matrix) -> bool:
    if a.shape != b.shape:
        rep.add(tag, loc, a.shape, b.shape)
        return False
    if a != b:
        for i in range(a.nrows):
            for j in range(a.ncols):
                if a.rows[i][j] != b.rows[i][j]:
                    rep.add(tag, (loc, (i, j)), a.rows[i][j], b.rows[i][j])
                    return False
    return True


@dataclass(eq=False)
class HomotopyModule2:
    base: FiniteGroupoid
    cdims: tuple
    edims: tuple
    rho: tuple
    RE: tuple
    RC: tuple
    Omega: dict

    @classmethod
    def zero(cls, g: FiniteGroupoid) -> "HomotopyModule2":
        no = g.n_objects
        return cls(g, (0,) * no, (0,) * no, tuple(_z(0, 0) for _ in range(no)),
                   tuple(_z(0, 0) for _ in range(g.n_arrows)), tuple(_z(0, 0) for _ in range(g.n_arrows)),
                   {k: _z(0, 0) for k in g.comp})


def check_homotopy_module(m: HomotopyModule2) -> ValidationReport:
    """Shapes, normalization at units and the four structure identities."""
    g = m.base
    rep = ValidationReport()
    lab = g.arrows
    for x in range(g.n_objects):
        if m.rho[x].shape != (m.edims[x], m.cdims[x]):
            rep.add("shape-rho", g.objects[x], m.rho[x].shape, (m.edims[x], m.cdims[x]))
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        if m.RE[a].shape != (m.edims[t], m.edims[s]):
            rep.add("shape-RE", lab[a], m.RE[a].shape, (m.edims[t], m.edims[s]))
        if m.RC[a].shape != (m.cdims[t], m.cdims[s]):
            rep.add("shape-RC", lab[a], m.RC[a].shape, (m.cdims[t], m.cdims[s]))
    for (a, b) in g.comp:
        want = (m.cdims[g.tgt[a]], m.edims[g.src[b]])
        if (a, b) not in m.Omega or m.Omega[(a, b)].shape != want:
            rep.add("shape-Omega", (lab[a], lab[b]), getattr(m.Omega.get((a, b)), "shape", None), want)
    if not rep.ok:
        return rep
    for x in range(g.n_objects):
        u = g.unit[x]
        _first_diff(rep, "unit-RE", g.objects[x], m.RE[u], Matrix.eye(m.edims[x]))
        _first_diff(rep, "unit-RC", g.objects[x], m.RC[u], Matrix.eye(m.cdims[x]))
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        _first_diff(rep, "unit-Omega", lab[a], m.Omega[(g.unit[t], a)], _z(m.cdims[t], m.edims[s]))
        _first_diff(rep, "unit-Omega", lab[a], m.Omega[(a, g.unit[s])], _z(m.cdims[t], m.edims[s]))
        _first_diff(rep, "axiom-1", lab[a], m.RE[a] @ m.rho[s], m.rho[t] @ m.RC[a])
    for (a, b), c in g.comp.items():
        t, sb = g.tgt[a], g.src[b]
        om = m.Omega[(a, b)]
        _first_diff(rep, "axiom-2", (lab[a], lab[b]), m.RE[a] @ m.RE[b] - m.RE[c] + m.rho[t] @ om,
                    _z(m.edims[t], m.edims[sb]))
        _first_diff(rep, "axiom-3", (lab[a], lab[b]), m.RC[a] @ m.RC[b] - m.RC[c] + om @ m.rho[sb],
                    _z(m.cdims[t], m.cdims[sb]))
    for (a, b, c) in g.nerve(3):
        ab, bc = g.mul(a, b), g.mul(b, c)
        lhs = (m.RC[a] @ m.Omega[(b, c)] - m.Omega[(ab, c)] + m.Omega[(a, bc)]
               - m.Omega[(a, b)] @ m.RE[c])
        _first_diff(rep, "axiom-4", (lab[a], lab[b], lab[c]), lhs, _z(m.cdims[g.tgt[a]], m.edims[g.src[c]]))
    return rep


# ---------------------------------------------------------------- cochains

def _keys(g: FiniteGroupoid, p: int):
    return list(range(g.n_objects)) if p == 0 else g.nerve(p)


def _anchor(g: FiniteGroupoid, p: int, c) -> int:
    """Object over which a level-``p`` value sits: target of the first arrow."""
    return c if p == 0 else g.tgt[c[0]]


def zero_cochain(g: FiniteGroupoid, dims: Sequence[int], p: int) -> dict:
    if p < 0:
        return {}
    return {c: (ZERO,) * dims[_anchor(g, p, c)] for c in _keys(g, p)}


def _vadd(*vs):
    return tuple(sum(x, ZERO) for x in zip(*vs))


def _neg(v):
    return tuple(-x for x in v)


def rep_coboundary(g: FiniteGroupoid, R: Sequence[Matrix], p: int, f: dict) -> dict:
    """Coboundary twisted by per-arrow maps ``R`` (not necessarily functorial)."""
    out = {}
    if p < 0:
        return out
    if p == 0:
        for a in range(g.n_arrows):
            out[(a,)] = _vadd(R[a].apply(f[g.src[a]]), _neg(f[g.tgt[a]]))
        return out
    for c in g.nerve(p + 1):
        terms = [R[c[0]].apply(f[c[1:]])]
        for i in range(1, p + 1):
            merged = c[:i - 1] + (g.mul(c[i - 1], c[i]),) + c[i + 1:]
            terms.append(f[merged] if i % 2 == 0 else _neg(f[merged]))
        last = f[c[:-1]]
        terms.append(last if (p + 1) % 2 == 0 else _neg(last))
        out[c] = _vadd(*terms)
    return out


def _omega_term(m: HomotopyModule2, p: int, fE: dict) -> dict:
    """``(Omega fE)`` at level ``p + 2`` for ``fE`` of level ``p``."""
    g = m.base
    out = {}
    for c in g.nerve(p + 2):
        arg = g.src[c[1]] if p == 0 else c[2:]
        out[c] = m.Omega[(c[0], c[1])].apply(fE[arg])
    return out


def _apply_pointwise(g: FiniteGroupoid, maps: Sequence[Matrix], p: int, f: dict) -> dict:
    return {c: maps[_anchor(g, p, c)].apply(v) for c, v in f.items()}


def _dict_add(x: dict, y: dict) -> dict:
    """Sum of cochains; an empty dict stands for the zero cochain."""
    if not x:
        return dict(y)
    if not y:
        return dict(x)
    return {k: _vadd(v, y[k]) for k, v in x.items()}


@dataclass(frozen=True)
class ModuleCochain:
    """Element of ``W_n``: ``C`` part of level ``n + 1`` and ``E`` part of level ``n``."""

    n: int
    fC: dict
    fE: dict

    def __add__(self, other: "ModuleCochain") -> "ModuleCochain":
        return ModuleCochain(self.n, _dict_add(self.fC, other.fC), _dict_add(self.fE, other.fE))

    def __neg__(self) -> "ModuleCochain":
        return ModuleCochain(self.n, {k: _neg(v) for k, v in self.fC.items()},
                             {k: _neg(v) for k, v in self.fE.items()})

    def __sub__(self, other: "ModuleCochain") -> "ModuleCochain":
        return self + (-other)

    def is_zero(self) -> bool:
        return all(x == 0 for v in self.fC.values() for x in v) and all(x == 0 for v in self.fE.values() for x in v)


def module_zero(m: HomotopyModule2, n: int) -> ModuleCochain:
    g = m.base
    return ModuleCochain(n, zero_cochain(g, m.cdims, n + 1), zero_cochain(g, m.edims, n))


def module_basis(m: HomotopyModule2, n: int):
    """Yield the standard basis of ``W_n``."""
    g = m.base
    for part, dims, p in (("C", m.cdims, n + 1), ("E", m.edims, n)):
        if p < 0:
            continue
        for c in _keys(g, p):
            for i in range(dims[_anchor(g, p, c)]):
                z = module_zero(m, n)
                d = z.fC if part == "C" else z.fE
                d[c] = tuple(ONE if j == i else ZERO for j in range(len(d[c])))
                yield z


def random_module_cochain(rng: random.Random, m: HomotopyModule2, n: int, bound: int = 3) -> ModuleCochain:
    from .random_instances import rand_q
    z = module_zero(m, n)
    return ModuleCochain(n, {k: tuple(rand_q(rng, bound) for _ in v) for k, v in z.fC.items()},
                         {k: tuple(rand_q(rng, bound) for _ in v) for k, v in z.fE.items()})


def apply_D(m: HomotopyModule2, f: ModuleCochain) -> ModuleCochain:
    g = m.base
    n = f.n
    dC = rep_coboundary(g, m.RC, n + 1, f.fC)
    outC = {k: _neg(v) for k, v in dC.items()}
    if n >= 0:
        om = _omega_term(m, n, f.fE)
        outC = {k: _vadd(v, om[k]) for k, v in outC.items()}
    outE = _apply_pointwise(g, m.rho, n + 1, f.fC)
    if n >= 0:
        dE = rep_coboundary(g, m.RE, n, f.fE)
        outE = {k: _vadd(v, dE[k]) for k, v in outE.items()}
    return ModuleCochain(n + 1, outC, outE)


def scalar_coboundary(g: FiniteGroupoid, p: int, phi: dict) -> dict:
    if p == 0:
        return {(a,): phi[g.src[a]] - phi[g.tgt[a]] for a in range(g.n_arrows)}
    out = {}
    for c in g.nerve(p + 1):
        val = phi[c[1:]]
        for i in range(1, p + 1):
            merged = c[:i - 1] + (g.mul(c[i - 1], c[i]),) + c[i + 1:]
            val += phi[merged] if i % 2 == 0 else -phi[merged]
        val += phi[c[:-1]] if (p + 1) % 2 == 0 else -phi[c[:-1]]
        out[c] = val
    return out


def _cup(g: FiniteGroupoid, p: int, f: dict, q: int, phi: dict) -> dict:
    """``(f * phi)(a1..a_{p+q}) = f(a1..ap) phi(a_{p+1}..)`` with scalar ``phi``."""
    if p < 0:
        return {}
    out = {}
    for c in _keys(g, p + q):
        if p + q == 0:
            out[c] = tuple(phi[c] * x for x in f[c])
            continue
        front = (g.tgt[c[0]] if p == 0 else c[:p])
        back = (g.src[c[-1]] if q == 0 else c[p:])
        out[c] = tuple(phi[back] * x for x in f[front])
    return out


def module_cup(m: HomotopyModule2, f: ModuleCochain, q: int, phi: dict) -> ModuleCochain:
    g = m.base
    fE = _cup(g, f.n, f.fE, q, phi) if f.n >= 0 else zero_cochain(g, m.edims, f.n + q)
    return ModuleCochain(f.n + q, _cup(g, f.n + 1, f.fC, q, phi), fE)


@dataclass(eq=False)
class ModuleOperator:
    """``D`` on ``W_n`` for ``-1 <= n < max_level`` with its validation."""

    module: HomotopyModule2
    max_level: int
    report: ValidationReport

    def __call__(self, f: ModuleCochain) -> ModuleCochain:
        if f.n + 2 > self.max_level + 1:
            raise ValueError(f"degree {f.n} beyond materialized levels")
        return apply_D(self.module, f)


def build_D(m: HomotopyModule2, max_level: int = 3, rng: Optional[random.Random] = None,
            samples: int = 3) -> ModuleOperator:
    """Assemble ``D``; check ``D^2 = 0`` on basis vectors and Leibniz on samples.

    ``D^2`` on ``W_n`` reaches level ``n + 3``; degrees ``n`` with
    ``n + 3 <= max_level + 1`` are checked on the full basis for ``n <= 0`` and
    on random samples above.
    """
    rep = check_homotopy_module(m)
    if not rep.ok:
        raise InvalidModule(str(rep[0]))
    rng = rng or random.Random(0)
    g = m.base
    for n in range(-1, max_level - 1):
        fs = list(module_basis(m, n)) if n <= 0 else [random_module_cochain(rng, m, n) for _ in range(samples)]
        for k, f in enumerate(fs):
            dd = apply_D(m, apply_D(m, f))
            if not dd.is_zero():
                rep.add("D-squared", (n, k), "nonzero", 0)
                break
    from .random_instances import rand_q
    for n in range(-1, max_level - 1):
        for q in (0, 1):
            if n + q + 2 > max_level + 1:
                continue
            f = random_module_cochain(rng, m, n)
            phi = {c: rand_q(rng) for c in _keys(g, q)}
            lhs = apply_D(m, module_cup(m, f, q, phi))
            dphi = scalar_coboundary(g, q, phi)
            sgn = ONE if n % 2 == 0 else -ONE
            t2 = module_cup(m, f, q + 1, {k: sgn * v for k, v in dphi.items()})
            rhs = module_cup(m, apply_D(m, f), q, phi) + t2
            if lhs.fC != rhs.fC or lhs.fE != rhs.fE:
                rep.add("leibniz", (n, q), "mismatch", None)
    return ModuleOperator(m, max_level, rep)


# ---------------------------------------------------------------- morphisms and homotopies

@dataclass(eq=False)
class HM2Morphism:
    source: HomotopyModule2
    target: HomotopyModule2
    phiC: tuple
    phiE: tuple
    mu: tuple  # per arrow, E_{s a} -> C'_{t a}

    @classmethod
    def identity(cls, m: HomotopyModule2) -> "HM2Morphism":
        g = m.base
        return cls(m, m, tuple(Matrix.eye(d) for d in m.cdims), tuple(Matrix.eye(d) for d in m.edims),
                   tuple(_z(m.cdims[g.tgt[a]], m.edims[g.src[a]]) for a in range(g.n_arrows)))

    def __call__(self, f: ModuleCochain) -> ModuleCochain:
        g = self.source.base
        n = f.n
        outC = _apply_pointwise(g, self.phiC, n + 1, f.fC)
        if n >= 0:
            for c in outC:
                arg = g.src[c[0]] if n == 0 else c[1:]
                outC[c] = _vadd(outC[c], self.mu[c[0]].apply(f.fE[arg]))
        outE = _apply_pointwise(g, self.phiE, n, f.fE)
        return ModuleCochain(n, outC, outE)

    def __sub__(self, other: "HM2Morphism") -> "HM2Morphism":
        return HM2Morphism(self.source, self.target, tuple(x - y for x, y in zip(self.phiC, other.phiC)),
                           tuple(x - y for x, y in zip(self.phiE, other.phiE)),
                           tuple(x - y for x, y in zip(self.mu, other.mu)))


def compose_hm2(outer: HM2Morphism, inner: HM2Morphism) -> HM2Morphism:
    g = inner.source.base
    return HM2Morphism(inner.source, outer.target,
                       tuple(o @ i for o, i in zip(outer.phiC, inner.phiC)),
                       tuple(o @ i for o, i in zip(outer.phiE, inner.phiE)),
                       tuple(outer.phiC[g.tgt[a]] @ inner.mu[a] + outer.mu[a] @ inner.phiE[g.src[a]]
                             for a in range(g.n_arrows)))


def _spanning(m: HomotopyModule2, n: int, rng: random.Random, samples: int):
    if n <= 0:
        return list(module_basis(m, n))
    return [random_module_cochain(rng, m, n) for _ in range(samples)]


def check_hm2_morphism(f: HM2Morphism, max_level: int = 2, rng: Optional[random.Random] = None,
                       samples: int = 4) -> ValidationReport:
    """``F D1 = D2 F`` on spanning cochains; ``D f`` reaches level ``n + 2 <= max_level + 1``."""
    rng = rng or random.Random(0)
    rep = ValidationReport()
    m1, m2 = f.source, f.target
    g = m1.base
    for x in range(g.n_objects):
        if f.phiC[x].shape != (m2.cdims[x], m1.cdims[x]) or f.phiE[x].shape != (m2.edims[x], m1.edims[x]):
            rep.add("shape", g.objects[x], None, None)
    if not rep.ok:
        return rep
    for n in range(-1, max_level):
        for k, x in enumerate(_spanning(m1, n, rng, samples)):
            lhs = f(apply_D(m1, x))
            rhs = apply_D(m2, f(x))
            if lhs.fC != rhs.fC or lhs.fE != rhs.fE:
                bad = next((c for c in lhs.fC if lhs.fC[c] != rhs.fC[c]), None)
                rep.add("chain-map", (n + 1, k, bad), "FD != DF", None)
                break
    return rep


@dataclass(eq=False)
class HM2Homotopy:
    source: HomotopyModule2
    target: HomotopyModule2
    h: tuple  # per object, E_m -> C'_m

    def __call__(self, f: ModuleCochain) -> ModuleCochain:
        g = self.source.base
        n = f.n
        outC = _apply_pointwise(g, self.h, n, f.fE) if n >= 0 else {}
        return ModuleCochain(n - 1, outC, zero_cochain(g, self.target.edims, n - 1))


def check_hm2_homotopy(f: HM2Morphism, g2: HM2Morphism, h, max_level: int = 2,
                       rng: Optional[random.Random] = None, samples: int = 4) -> ValidationReport:
    """``F - G = D H + H D`` on ``W_n`` for ``n + 1 <= max_level``."""
    rng = rng or random.Random(0)
    rep = ValidationReport()
    m1, m2 = f.source, f.target
    H = HM2Homotopy(m1, m2, tuple(h))
    for n in range(-1, max_level):
        for k, x in enumerate(_spanning(m1, n, rng, samples)):
            lhs = f(x) - g2(x)
            hx = H(x)
            rhs = H(apply_D(m1, x))
            if n >= 0:
                rhs = rhs + apply_D(m2, hx)
            if lhs.fC != rhs.fC or lhs.fE != rhs.fE:
                rep.add("homotopy", (n, k), "F-G != DH+HD", None)
                break
    return rep


# ---------------------------------------------------------------- dictionary with split VB groupoids

def to_split_vb(m: HomotopyModule2) -> tuple:
    """Split VB groupoid ``t*C x s*E`` and its tautological decomposition ``e -> (0, e)``."""
    g = m.base
    v = split_vb(g, m.cdims, m.edims, m.rho, m.RE, m.RC, m.Omega)
    secs = tuple(vstack(_z(m.cdims[g.tgt[a]], m.edims[g.src[a]]), Matrix.eye(m.edims[g.src[a]]))
                 for a in range(g.n_arrows))
    return v, RightDecomposition(secs)


def from_split_vb(v: VBGroupoid, dec: RightDecomposition) -> HomotopyModule2:
    """Structure maps of ``v`` read through the splitting ``V_a = R(C_{t a}) + pi_a(E_{s a})``."""
    rep = check_decomposition(v, dec)
    if not rep.ok:
        raise InvalidDecomposition(str(rep[0]))
    g = v.base
    pi = dec.sections
    Rinv = [left_inverse(r) for r in v.R]
    RE = tuple(v.tV[a] @ pi[a] for a in range(g.n_arrows))
    RC = []
    for a in range(g.n_arrows):
        s = g.src[a]
        us = g.unit[s]
        k = v.core_basis[s]
        prod = v.mV[(a, us)] @ vstack(pi[a] @ v.rho[s], k)
        RC.append(Rinv[a] @ prod)
    Om = {}
    for (a, b), c in g.comp.items():
        pb = pi[b]
        prod = v.mV[(a, b)] @ vstack(pi[a] @ v.tV[b] @ pb, pb)
        Om[(a, b)] = -(Rinv[c] @ (prod - pi[c]))
    return HomotopyModule2(g, v.cdims, v.edims, v.rho, RE, tuple(RC), Om)


def split_iso(v: VBGroupoid, dec: RightDecomposition, m: Optional[HomotopyModule2] = None) -> tuple:
    """Isomorphism ``to_split_vb(from_split_vb(v, dec)) -> v``, ``(c, e) -> R c + pi e``."""
    m = m or from_split_vb(v, dec)
    w, _ = to_split_vb(m)
    g = v.base
    maps = tuple(hstack(v.R[a], dec.sections[a]) for a in range(g.n_arrows))
    objs = tuple(Matrix.eye(d) for d in v.edims)
    return w, VBMorphism(w, v, tuple(range(g.n_arrows)), tuple(range(g.n_objects)), maps, objs)


def default_decomposition(v: VBGroupoid) -> RightDecomposition:
    """Some right decomposition: a section of ``sV`` per arrow, the unit map on units."""
    g = v.base
    secs = [right_inverse(v.sV[a]) for a in range(g.n_arrows)]
    for x in range(g.n_objects):
        secs[g.unit[x]] = v.uV[x]
    return RightDecomposition(tuple(secs))


def redecompose(v: VBGroupoid, dec: RightDecomposition, mu: Sequence[Matrix]) -> RightDecomposition:
    """``pi' = pi + R mu``; ``mu`` must vanish on units."""
    g = v.base
    for x in range(g.n_objects):
        if not mu[g.unit[x]].is_zero():
            raise InvalidDecomposition("gauge must vanish on units")
    return RightDecomposition(tuple(dec.sections[a] + v.R[a] @ mu[a] for a in range(g.n_arrows)))


def decomposition_gauge(v: VBGroupoid, dec1: RightDecomposition, dec2: RightDecomposition) -> HM2Morphism:
    """Gauge ``(id, id, mu)`` from the module of ``dec2`` to that of ``dec1``, ``pi2 = pi1 + R mu``."""
    g = v.base
    mu = []
    for a in range(g.n_arrows):
        x = solve(v.R[a], dec2.sections[a] - dec1.sections[a])
        if x is None:
            raise InvalidDecomposition(f"decompositions differ outside the core at {g.arrows[a]}")
        mu.append(x)
    m1, m2 = from_split_vb(v, dec1), from_split_vb(v, dec2)
    return HM2Morphism(m2, m1, tuple(Matrix.eye(d) for d in v.cdims), tuple(Matrix.eye(d) for d in v.edims),
                       tuple(mu))


def gauge_relations(gauge: HM2Morphism) -> ValidationReport:
    """Explicit transformation rules between the two modules under ``(id, id, mu)``."""
    m2, m1 = gauge.source, gauge.target
    g = m1.base
    rep = ValidationReport()
    mu = gauge.mu
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        _first_diff(rep, "gauge-RE", g.arrows[a], m2.RE[a], m1.RE[a] + m1.rho[t] @ mu[a])
        _first_diff(rep, "gauge-RC", g.arrows[a], m2.RC[a], m1.RC[a] + mu[a] @ m1.rho[s])
    for (a, b), c in g.comp.items():
        want = (m1.Omega[(a, b)] - m1.RC[a] @ mu[b] + mu[c] - mu[a] @ m1.RE[b]
                - mu[a] @ m1.rho[g.src[a]] @ mu[b])
        _first_diff(rep, "gauge-Omega", (g.arrows[a], g.arrows[b]), m2.Omega[(a, b)], want)
    return rep


def vb_morphism_to_hm2(f: VBMorphism, dec1: RightDecomposition, dec2: RightDecomposition,
                       m1: Optional[HomotopyModule2] = None, m2: Optional[HomotopyModule2] = None) -> HM2Morphism:
    """Module morphism induced by a VB morphism over the identity and right decompositions."""
    v1, v2 = f.source, f.target
    g = v1.base
    m1 = m1 or from_split_vb(v1, dec1)
    m2 = m2 or from_split_vb(v2, dec2)
    phiC = tuple(v2.core_coords[x] @ f.maps[g.unit[x]] @ v1.core_basis[x] for x in range(g.n_objects))
    phiE = tuple(f.obj_maps)
    mu = []
    for a in range(g.n_arrows):
        diff = f.maps[a] @ dec1.sections[a] - dec2.sections[a] @ phiE[g.src[a]]
        x = solve(v2.R[a], diff)
        if x is None:
            raise InvalidDecomposition("morphism does not preserve the source sequence")
        mu.append(x)
    return HM2Morphism(m1, m2, phiC, phiE, tuple(mu))


def homotopy_as_morphism(m1: HomotopyModule2, m2: HomotopyModule2, h) -> HM2Morphism:
    """Module image of ``J_h``: ``(h rho, rho' h, h RE - RC' h)``."""
    g = m1.base
    return HM2Morphism(m1, m2, tuple(h[x] @ m1.rho[x] for x in range(g.n_objects)),
                       tuple(m2.rho[x] @ h[x] for x in range(g.n_objects)),
                       tuple(h[g.tgt[a]] @ m1.RE[a] - m2.RC[a] @ h[g.src[a]] for a in range(g.n_arrows)))


# ---------------------------------------------------------------- pullbacks and witnesses

def pullback_module(m: HomotopyModule2, X: Sequence, phi) -> tuple:
    """Pull all data back along ``Gamma[X] -> Gamma``; returns ``(module, PullbackGroupoid)``."""
    pb = pullback_groupoid(m.base, X, phi)
    gx = pb.groupoid
    ph, pr = pb.phi, pb.proj
    out = HomotopyModule2(
        gx,
        tuple(m.cdims[ph[x]] for x in range(gx.n_objects)),
        tuple(m.edims[ph[x]] for x in range(gx.n_objects)),
        tuple(m.rho[ph[x]] for x in range(gx.n_objects)),
        tuple(m.RE[pr[a]] for a in range(gx.n_arrows)),
        tuple(m.RC[pr[a]] for a in range(gx.n_arrows)),
        {(a, b): m.Omega[(pr[a], pr[b])] for (a, b) in gx.comp},
    )
    return out, pb


def pullback_decomposition(v: VBGroupoid, dec: RightDecomposition, P: VBPullback) -> RightDecomposition:
    """Decomposition of ``V[phi^*E]`` induced by ``dec``: ``e -> (t pi e, pi e, e)``."""
    secs = []
    for k, (x, a, y) in enumerate(P.groupoid.triples):
        pa = dec.sections[a]
        amb = vstack(v.tV[a] @ pa, pa, Matrix.eye(pa.ncols))
        secs.append(left_inverse(P.bases[k]) @ amb)
    return RightDecomposition(tuple(secs))


def pullback_core_iso(v: VBGroupoid, P: VBPullback) -> tuple:
    """Per point ``x``, the core of ``V[phi^*E]`` at ``x`` in coordinates of ``C_{phi x}``."""
    gx = P.vb.base
    out = []
    for x in range(gx.n_objects):
        m = P.groupoid.phi[x]
        u = gx.unit[x]
        out.append(v.core_coords[m] @ P.projection.maps[u] @ P.vb.core_basis[x])
    return tuple(out)


def reindex_module(m: HomotopyModule2, new_base: FiniteGroupoid, arrow_map: Sequence[int],
                   object_map: Sequence[int]) -> HomotopyModule2:
    g = new_base
    return HomotopyModule2(g, tuple(m.cdims[object_map[x]] for x in range(g.n_objects)),
                           tuple(m.edims[object_map[x]] for x in range(g.n_objects)),
                           tuple(m.rho[object_map[x]] for x in range(g.n_objects)),
                           tuple(m.RE[arrow_map[a]] for a in range(g.n_arrows)),
                           tuple(m.RC[arrow_map[a]] for a in range(g.n_arrows)),
                           {(a, b): m.Omega[(arrow_map[a], arrow_map[b])] for (a, b) in g.comp})


def same_module(a: HomotopyModule2, b: HomotopyModule2) -> bool:
    return (a.cdims == b.cdims and a.edims == b.edims and a.rho == b.rho and a.RE == b.RE
            and a.RC == b.RC and a.Omega == b.Omega)


@dataclass(eq=False)
class ModuleEquivalence:
    """``F: M1 -> M2``, ``G: M2 -> M1`` with ``G F - id ~ 0`` via ``h1`` and ``F G - id ~ 0`` via ``h2``."""

    F: HM2Morphism
    G: HM2Morphism
    h1: tuple
    h2: tuple


def check_module_equivalence(eq: ModuleEquivalence, max_level: int = 2) -> ValidationReport:
    rep = ValidationReport()
    rep.extend_prefixed("F", check_hm2_morphism(eq.F, max_level))
    rep.extend_prefixed("G", check_hm2_morphism(eq.G, max_level))
    m1, m2 = eq.F.source, eq.F.target
    rep.extend_prefixed("h1", check_hm2_homotopy(compose_hm2(eq.G, eq.F), HM2Morphism.identity(m1), eq.h1, max_level))
    rep.extend_prefixed("h2", check_hm2_homotopy(compose_hm2(eq.F, eq.G), HM2Morphism.identity(m2), eq.h2, max_level))
    return rep


def morita_module_witness(m1: HomotopyModule2, m2: HomotopyModule2, X: Sequence, phi1, phi2,
                          arrow_iso: Sequence[int], eq: ModuleEquivalence, max_level: int = 2) -> ValidationReport:
    """Verify ``eq`` is a homotopy equivalence between ``phi1^* m1`` and ``phi2^* m2`` over ``Gamma_1[X]``."""
    rep = ValidationReport()
    p1, pb1 = pullback_module(m1, X, phi1)
    p2, pb2 = pullback_module(m2, X, phi2)
    g1x = pb1.groupoid
    from .fingrpd import check_functor
    rep.extend_prefixed("bitorsor", check_functor(g1x, pb2.groupoid, tuple(range(g1x.n_objects)), tuple(arrow_iso)))
    if not rep.ok:
        return rep
    moved = reindex_module(p2, g1x, arrow_iso, tuple(range(g1x.n_objects)))
    if not same_module(eq.F.source, p1):
        rep.add("source", None, "equivalence source is not the pullback of m1", None)
    if not same_module(eq.F.target, moved):
        rep.add("target", None, "equivalence target is not the pullback of m2", None)
    if not rep.ok:
        return rep
    rep.extend_prefixed("equivalence", check_module_equivalence(eq, max_level))
    return rep


# ---------------------------------------------------------------- random instances

def _components(g: FiniteGroupoid) -> list:
    seen, comps = set(), []
    for x0 in range(g.n_objects):
        if x0 in seen:
            continue
        comp = [x0]
        seen.add(x0)
        for a in range(g.n_arrows):
            if g.src[a] == x0 and g.tgt[a] not in seen:
                seen.add(g.tgt[a])
                comp.append(g.tgt[a])
        comps.append(comp)
    return comps


def sign_characters(g: FiniteGroupoid, x0: int) -> list:
    """All homomorphisms from the isotropy group at ``x0`` to ``{+1, -1}``."""
    iso = [a for a in range(g.n_arrows) if g.src[a] == x0 and g.tgt[a] == x0]
    out = []
    for signs in itertools.product((1, -1), repeat=len(iso)):
        chi = dict(zip(iso, signs))
        if all(chi[g.mul(a, b)] == chi[a] * chi[b] for a in iso for b in iso):
            out.append(chi)
    return out


def random_strict_module(rng: random.Random, g: FiniteGroupoid, max_dim: int = 2) -> HomotopyModule2:
    """Genuine representation ``rho: C -> E`` built from sign characters of the isotropy groups."""
    from .random_instances import rand_invertible, rand_matrix
    no = g.n_objects
    cd, ed = [0] * no, [0] * no
    rho, RE, RC = [None] * no, [None] * g.n_arrows, [None] * g.n_arrows
    for comp in _components(g):
        x0 = comp[0]
        chi = rng.choice(sign_characters(g, x0))
        cp, cm = rng.randint(0, max_dim), rng.randint(0, 1)
        ep, em = rng.randint(0, max_dim), rng.randint(0, 1)
        rho0 = vstack(hstack(rand_matrix(rng, ep, cp, 2), _z(ep, cm)), hstack(_z(em, cp), rand_matrix(rng, em, cm, 2)))
        path = {}
        for a in range(g.n_arrows):
            if g.src[a] == x0 and g.tgt[a] not in path:
                path[g.tgt[a]] = a
        SC = {y: rand_invertible(rng, cp + cm) for y in comp}
        SE = {y: rand_invertible(rng, ep + em) for y in comp}
        for y in comp:
            cd[y], ed[y] = cp + cm, ep + em
            rho[y] = SE[y] @ rho0 @ inverse(SC[y])
        for a in range(g.n_arrows):
            y, z = g.src[a], g.tgt[a]
            if y not in SC:
                continue
            h = g.mul(g.inv[path[z]], g.mul(a, path[y]))
            sg = ONE if chi[h] == 1 else -ONE

            def diag(p, q):
                return Matrix([[ONE if i == j and i < p else (sg if i == j else ZERO) for j in range(p + q)]
                               for i in range(p + q)], p + q)
            RC[a] = SC[z] @ diag(cp, cm) @ inverse(SC[y])
            RE[a] = SE[z] @ diag(ep, em) @ inverse(SE[y])
    Om = {(a, b): _z(cd[g.tgt[a]], ed[g.src[b]]) for (a, b) in g.comp}
    return HomotopyModule2(g, tuple(cd), tuple(ed), tuple(rho), tuple(RE), tuple(RC), Om)


def random_gauge(rng: random.Random, v: VBGroupoid, bound: int = 2) -> tuple:
    from .random_instances import rand_matrix
    g = v.base
    units = set(g.unit)
    return tuple(_z(v.cdims[g.tgt[a]], v.edims[g.src[a]]) if a in units
                 else rand_matrix(rng, v.cdims[g.tgt[a]], v.edims[g.src[a]], bound) for a in range(g.n_arrows))


def random_module(rng: random.Random, g: FiniteGroupoid, max_dim: int = 2) -> HomotopyModule2:
    """Strict module re-read through a random right decomposition (generic ``Omega``)."""
    m0 = random_strict_module(rng, g, max_dim)
    v, dec = to_split_vb(m0)
    return from_split_vb(v, redecompose(v, dec, random_gauge(rng, v)))


def random_split_vb(rng: random.Random, g: FiniteGroupoid, max_dim: int = 2, transport: bool = True) -> VBGroupoid:
    """Split model of a random module, optionally moved to random fiber bases."""
    from .vbgrpd import random_transport
    v, _ = to_split_vb(random_module(rng, g, max_dim))
    if transport:
        v, _ = random_transport(rng, v)
    return v


def random_contractible_vb(rng: random.Random, g: FiniteGroupoid, max_dim: int = 2) -> VBGroupoid:
    """Split model of a strict module with ``rho = id`` (``C = E``), moved to random bases."""
    from .vbgrpd import random_transport
    m = random_strict_module(rng, g, max_dim)
    m = HomotopyModule2(g, m.cdims, m.cdims, tuple(Matrix.eye(d) for d in m.cdims), m.RC, m.RC,
                        {(a, b): _z(m.cdims[g.tgt[a]], m.cdims[g.src[b]]) for (a, b) in g.comp})
    v, _ = to_split_vb(m)
    return random_transport(rng, v)[0]


def random_vb_equivalence(rng: random.Random, g: FiniteGroupoid, max_dim: int = 2):
    from .vbgrpd import random_homotopy_equivalence
    v1 = random_split_vb(rng, g, max_dim)
    k = random_contractible_vb(rng, g, max_dim)
    return random_homotopy_equivalence(rng, v1, k)


# ---------------------------------------------------------------- dictionary for witnesses

def module_iso(m_from: HomotopyModule2, m_to: HomotopyModule2, phiC, phiE) -> HM2Morphism:
    g = m_from.base
    return HM2Morphism(m_from, m_to, tuple(phiC), tuple(phiE),
                       tuple(_z(m_to.cdims[g.tgt[a]], m_from.edims[g.src[a]]) for a in range(g.n_arrows)))


def invert_module_iso(f: HM2Morphism) -> HM2Morphism:
    """Inverse of ``(phiC, phiE, mu)`` with invertible ``phi``: ``mu' = -phiC^-1 mu phiE^-1``."""
    g = f.source.base
    ic = tuple(inverse(x) for x in f.phiC)
    ie = tuple(inverse(x) for x in f.phiE)
    mu = tuple(-(ic[g.tgt[a]] @ f.mu[a] @ ie[g.src[a]]) for a in range(g.n_arrows))
    return HM2Morphism(f.target, f.source, ic, ie, mu)


def transport_module_homotopy(h, src_iso: HM2Morphism, tgt_iso: HM2Morphism) -> tuple:
    """``h`` for ``F - G`` becomes ``tgt.phiC h src.phiE^-1`` for the conjugated maps (``mu = 0`` isos)."""
    return tuple(tgt_iso.phiC[x] @ h[x] @ inverse(src_iso.phiE[x]) for x in range(len(h)))


def pulled_module_iso(v: VBGroupoid, dec: RightDecomposition, X: Sequence, phi) -> tuple:
    """``phi^* from_split_vb(v, dec)`` against ``from_split_vb(V[phi^*E], pulled dec)``.

    Returns ``(pullback module, split module of the pulled VB, iso between them, VBPullback)``.
    """
    m = from_split_vb(v, dec)
    pm, pb = pullback_module(m, X, phi)
    P = pullback_along(v, X, phi)
    n = from_split_vb(P.vb, pullback_decomposition(v, dec, P))
    cores = pullback_core_iso(v, P)
    iso = module_iso(n, pm, cores, tuple(Matrix.eye(d) for d in pm.edims))
    return pm, n, iso, P


def module_witness_from_vb(v1: VBGroupoid, dec1: RightDecomposition, v2: VBGroupoid, dec2: RightDecomposition,
                           wit) -> tuple:
    """Transport a VB-Morita witness to modules; returns ``(m1, m2, ModuleEquivalence)``.

    The module equivalence is between ``phi1^* m1`` and ``phi2^* m2`` (moved to ``Gamma_1[X]``).
    """
    e = wit.equivalence
    m1 = from_split_vb(v1, dec1)
    m2 = from_split_vb(v2, dec2)
    pm1, n1, a1, P1 = pulled_module_iso(v1, dec1, wit.X, wit.phi1)
    pm2raw, n2raw, a2raw, P2 = pulled_module_iso(v2, dec2, wit.X, wit.phi2)
    g1x = e.phi.source.base
    ids = tuple(range(g1x.n_objects))
    n2 = reindex_module(n2raw, g1x, wit.arrow_iso, ids)
    pm2 = reindex_module(pm2raw, pm1.base, wit.arrow_iso, ids)
    a2 = module_iso(n2, pm2, a2raw.phiC, a2raw.phiE)
    dec_p1 = pullback_decomposition(v1, dec1, P1)
    dec_p2raw = pullback_decomposition(v2, dec2, P2)
    dec_p2 = RightDecomposition(tuple(dec_p2raw.sections[wit.arrow_iso[a]] for a in range(g1x.n_arrows)))
    F0 = vb_morphism_to_hm2(e.phi, dec_p1, dec_p2, n1, n2)
    G0 = vb_morphism_to_hm2(e.psi, dec_p2, dec_p1, n2, n1)
    # rebase everything on pm1's groupoid object and conjugate by the isos
    n1b = reindex_module(n1, pm1.base, tuple(range(g1x.n_arrows)), ids)
    n2b = reindex_module(n2, pm1.base, tuple(range(g1x.n_arrows)), ids)
    F0 = HM2Morphism(n1b, n2b, F0.phiC, F0.phiE, F0.mu)
    G0 = HM2Morphism(n2b, n1b, G0.phiC, G0.phiE, G0.mu)
    a1 = module_iso(n1b, pm1, a1.phiC, a1.phiE)
    a2 = module_iso(n2b, pm2, a2.phiC, a2.phiE)
    F = compose_hm2(a2, compose_hm2(F0, invert_module_iso(a1)))
    G = compose_hm2(a1, compose_hm2(G0, invert_module_iso(a2)))
    h1 = transport_module_homotopy(e.h1, a1, a1)
    h2 = transport_module_homotopy(e.h2, a2, a2)
    return m1, m2, ModuleEquivalence(F, G, h1, h2)


def identity_module_equivalence(m: HomotopyModule2, X: Sequence, phi) -> ModuleEquivalence:
    pm, _ = pullback_module(m, X, phi)
    e = HM2Morphism.identity(pm)
    z = tuple(_z(pm.cdims[x], pm.edims[x]) for x in range(pm.base.n_objects))
    return ModuleEquivalence(e, e, z, z)
