"""Maurer-Cartan elements of crossed modules: twists, gauges, pushforwards, LP complex."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Dict, Iterable, Mapping, Optional, Sequence

from sympy import QQ

from .graded import (GradedLinearMap, Sparse, sp_add, sp_basis, sp_clean, sp_neg, sp_scale, sp_sub)
from .lie2 import (CrossedModule, Dgla, Lie2Homotopy, Lie2Morphism, associated_dgla, check_homotopy,
                   check_lie2_morphism)
from .linalg import Matrix, hstack, kernel, rank, solve, vstack
from .report import DegreeMismatch, InvalidMC, InvalidMorphism, NotNilpotent, ValidationReport

HALF = QQ(1, 2)


def _require_degree(x: Mapping, degree: int, what: str) -> None:
    for k, v in x.items():
        if v and k[0] != degree:
            raise DegreeMismatch(f"{what} has a component in degree {k[0]}, expected {degree}")


@dataclass(frozen=True, eq=False)
class MCElement:
    """``Lambda`` in ``A_2`` and ``Pi`` in ``G_1``."""

    cm: CrossedModule
    Lambda: Sparse
    Pi: Sparse

    def __post_init__(self):
        _require_degree(self.Lambda, 2, "Lambda")
        _require_degree(self.Pi, 1, "Pi")

    def __eq__(self, other):
        return (isinstance(other, MCElement) and sp_clean(self.Lambda) == sp_clean(other.Lambda)
                and sp_clean(self.Pi) == sp_clean(other.Pi))

    def as_dgla_element(self, dg: Dgla) -> Sparse:
        return dg.embed(self.Lambda, self.Pi)


def mc_check(cm: CrossedModule, Lambda: Mapping, Pi: Mapping) -> ValidationReport:
    """``d Lambda + 1/2 [Pi, Pi] = 0`` and ``Pi . Lambda = 0``."""
    _require_degree(Lambda, 2, "Lambda")
    _require_degree(Pi, 1, "Pi")
    rep = ValidationReport()
    rep.check("mc-curvature", "dLambda = -1/2[Pi,Pi]", cm.d(Lambda), sp_scale(-HALF, cm.G.br(Pi, Pi)))
    rep.check("mc-action", "Pi.Lambda = 0", cm.act(Pi, Lambda), {})
    return rep


def twist(mc: MCElement, T: Mapping) -> MCElement:
    """``Pi + dT`` and ``Lambda - Pi.T - 1/2 [T,T]``."""
    _require_degree(T, 1, "T")
    cm = mc.cm
    Pi = sp_add(mc.Pi, cm.d(T))
    Lam = sp_add(mc.Lambda, sp_neg(cm.act(mc.Pi, T)), sp_scale(-HALF, cm.A.br(T, T)))
    return MCElement(cm, Lam, Pi)


def gauge(dgla: Dgla, m: Mapping, b: Mapping, nilpotency_bound: int = 8) -> Sparse:
    """``exp(b).m = m - sum_i ad_b^i / (i+1)! (db + [m,b])`` with exact termination."""
    _require_degree(m, 1, "m")
    _require_degree(b, 0, "b")
    term = sp_add(dgla.dif(b), dgla.br(m, b))
    out = dict(m)
    for i in range(nilpotency_bound + 1):
        if not term:
            return sp_clean(out)
        out = sp_sub(out, sp_scale(QQ(1, factorial(i + 1)), term))
        term = dgla.br(b, term)
    if term:
        raise NotNilpotent(f"ad_b series did not terminate within {nilpotency_bound} steps")
    return sp_clean(out)


def gauge_by_twist_element(mc: MCElement, T: Mapping, dgla: Optional[Dgla] = None) -> MCElement:
    """``exp(-T) . (Lambda + Pi)`` read back as an MC element."""
    dg = dgla or associated_dgla(mc.cm, validate=False)
    res = gauge(dg, mc.as_dgla_element(dg), dg.embed(sp_neg(T), {}))
    a, p = dg.split(res)
    return MCElement(mc.cm, a, p)


def mc_pushforward(phi: Lie2Morphism, mc: MCElement, validate: bool = False) -> MCElement:
    """``(Phi1 Lambda + 1/2 Phi2(Pi,Pi)) + Phi1 Pi``."""
    if validate:
        r = check_lie2_morphism(phi)
        if not r.ok:
            raise InvalidMorphism(str(r[0]))
        r = mc_check(mc.cm, mc.Lambda, mc.Pi)
        if not r.ok:
            raise InvalidMC(str(r[0]))
    Lam = sp_add(phi.phi1A(mc.Lambda), sp_scale(HALF, phi.p2(mc.Pi, mc.Pi)))
    return MCElement(phi.target, Lam, phi.phi1G(mc.Pi))


def mc_homotopy_transport(phi: Lie2Morphism, psi: Lie2Morphism, h, mc: MCElement) -> ValidationReport:
    """``MC(psi)(m) = MC(phi)(m)_{h(Pi)}``; ``h`` is a map or a ``Lie2Homotopy``."""
    hmap = h.h if isinstance(h, Lie2Homotopy) else h
    lhs = mc_pushforward(psi, mc)
    rhs = twist(mc_pushforward(phi, mc), hmap(mc.Pi))
    rep = ValidationReport()
    rep.check("transport-Lambda", "Lambda", lhs.Lambda, rhs.Lambda)
    rep.check("transport-Pi", "Pi", lhs.Pi, rhs.Pi)
    return rep


def twist_compatibility(phi: Lie2Morphism, mc: MCElement, T: Mapping) -> ValidationReport:
    """``MC(phi)(m_T) = (MC(phi) m)_{phi1 T}``."""
    lhs = mc_pushforward(phi, twist(mc, T))
    rhs = twist(mc_pushforward(phi, mc), phi.phi1A(T))
    rep = ValidationReport()
    rep.check("twist-Lambda", "Lambda", lhs.Lambda, rhs.Lambda)
    rep.check("twist-Pi", "Pi", lhs.Pi, rhs.Pi)
    return rep


@dataclass(frozen=True, eq=False)
class LPComplex:
    base: MCElement
    dgla: Dgla
    differential: GradedLinearMap


def lp_differential(mc: MCElement, validate: bool = True) -> LPComplex:
    """``(a + P) -> (-Pi.a - P.Lambda) + ([Pi,P] + da)`` on the associated dgla."""
    if validate:
        r = mc_check(mc.cm, mc.Lambda, mc.Pi)
        if not r.ok:
            raise InvalidMC(str(r[0]))
    cm = mc.cm
    dg = associated_dgla(cm, validate=False)

    def f(key):
        a, P = dg.split(sp_basis(key))
        apart = sp_sub(sp_neg(cm.act(mc.Pi, a)), cm.act(P, mc.Lambda))
        gpart = sp_add(cm.G.br(mc.Pi, P), cm.d(a))
        return dg.embed(apart, gpart)

    D = GradedLinearMap.from_function(dg.V, dg.V, 1, f)
    return LPComplex(mc, dg, D)


def check_lp_complex(lp: LPComplex) -> ValidationReport:
    """``D^2 = 0`` and ``D = d + [m, .]`` on every basis vector."""
    rep = ValidationReport()
    m = lp.base.as_dgla_element(lp.dgla)
    for k in lp.dgla.V.basis():
        x = sp_basis(k)
        rep.check("lp-square", k, lp.differential(lp.differential(x)), {})
        rep.check("lp-adjoint", k, lp.differential(x), sp_add(lp.dgla.dif(x), lp.dgla.br(m, x)))
    return rep


def complex_cohomology(D: GradedLinearMap) -> Dict[int, int]:
    """Degreewise cohomology dimensions of a degree +1 differential."""
    V = D.source
    out = {}
    for k, n in V.dims_items:
        out[k] = n - rank(D.block(k)) - rank(D.block(k - 1))
    return out


def lp_cohomology(mc: MCElement) -> Dict[int, int]:
    return complex_cohomology(lp_differential(mc).differential)


def twist_witness_check(m1: MCElement, m2: MCElement, T: Mapping) -> bool:
    return twist(m1, T) == m2


def search_twist(m1: MCElement, m2: MCElement, lattice: Sequence) -> Optional[Sparse]:
    """Brute-force search for ``T`` with coefficients in ``lattice`` on the basis of ``A_1``."""
    keys = list(m1.cm.A.space.basis(1))
    for coeffs in itertools.product(lattice, repeat=len(keys)):
        T = sp_clean({k: QQ(c) if not hasattr(c, "numerator") else c for k, c in zip(keys, coeffs)})
        if twist_witness_check(m1, m2, T):
            return T
    return None


def solve_mc_lambda(cm: CrossedModule, Pi: Mapping) -> Optional[Sparse]:
    """Some ``Lambda`` completing ``Pi`` to an MC element, or None."""
    A2 = list(cm.A.space.basis(2))
    rowsG = list(cm.G.space.basis(2))
    rowsA = list(cm.A.space.basis(3))
    if not A2:
        return {} if not cm.G.br(Pi, Pi) else None
    cols = []
    for k in A2:
        x = sp_basis(k)
        dx, ax = cm.d(x), cm.act(Pi, x)
        cols.append([dx.get(r, QQ(0)) for r in rowsG] + [ax.get(r, QQ(0)) for r in rowsA])
    M = Matrix.from_columns(cols, len(rowsG) + len(rowsA))
    rhs_el = sp_scale(-HALF, cm.G.br(Pi, Pi))
    rhs = Matrix.column([rhs_el.get(r, QQ(0)) for r in rowsG] + [QQ(0)] * len(rowsA)) if (rowsG or rowsA) else Matrix.zeros(0, 1)
    x = solve(M, rhs)
    if x is None:
        return None
    K = kernel(M)
    return sp_clean({k: x.rows[i][0] for i, k in enumerate(A2)}), K, A2


def random_mc(rng, cm: CrossedModule, twist_it: bool = True) -> MCElement:
    """Random MC element: random ``Pi`` with a solved ``Lambda`` (fallback ``Pi = 0``), then twisted."""
    from .random_instances import rand_element, rand_q
    for attempt in range(6):
        Pi = rand_element(rng, cm.G.space, 1) if attempt < 5 else {}
        sol = solve_mc_lambda(cm, Pi)
        if sol is None:
            continue
        if isinstance(sol, dict):
            Lam = sol
        else:
            base, K, A2 = sol
            extra = {}
            for j in range(K.ncols):
                c = rand_q(rng)
                extra = sp_add(extra, {A2[i]: c * K.rows[i][j] for i in range(K.nrows)})
            Lam = sp_add(base, extra)
        m = MCElement(cm, Lam, Pi)
        if twist_it:
            m = twist(m, rand_element(rng, cm.A.space, 1))
        return m
    return MCElement(cm, {}, {})
