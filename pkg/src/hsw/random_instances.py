"""Random valid instances built from structured cores and transported by basis changes.

Every generator takes a ``random.Random`` so instances are reproducible from a seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import QQ

from .graded import GradedLinearMap, GradedVectorSpace, Key, sp_add, sp_basis, sp_clean, sp_scale
from .lie2 import (CrossedModule, GradedLieAlgebra, Lie2Morphism, apply_homotopy, bilinear,
                   table_from_function)
from .linalg import Matrix, det, inverse


@dataclass(frozen=True)
class RandomConfig:
    """Size limits for random crossed modules."""

    min_degree: int = -3
    max_degree: int = 3
    max_dim: int = 3
    max_blocks: int = 3
    max_coeff: int = 3


def rand_q(rng: random.Random, bound: int = 3, dens: Sequence[int] = (1, 1, 2)) -> object:
    return QQ(rng.randint(-bound, bound), rng.choice(dens))


def rand_matrix(rng: random.Random, m: int, n: int, bound: int = 3) -> Matrix:
    return Matrix([[rand_q(rng, bound) for _ in range(n)] for _ in range(m)], n)


def rand_invertible(rng: random.Random, n: int, bound: int = 2) -> Matrix:
    """Product of a random unit lower and unit upper triangular matrix and a diagonal."""
    if n == 0:
        return Matrix.zeros(0, 0)
    lo = Matrix([[QQ(rng.randint(-bound, bound)) if j < i else QQ(int(i == j)) for j in range(n)] for i in range(n)], n)
    up = Matrix([[QQ(rng.randint(-bound, bound)) if j > i else QQ(int(i == j)) for j in range(n)] for i in range(n)], n)
    dg = Matrix([[QQ(rng.choice([1, -1, 2, -2, 1])) if i == j else QQ(0) for j in range(n)] for i in range(n)], n)
    m = lo @ dg @ up
    assert det(m) != 0
    return m


def rand_graded_invertible(rng: random.Random, V: GradedVectorSpace) -> GradedLinearMap:
    return GradedLinearMap.of(V, V, 0, {d: rand_invertible(rng, n) for d, n in V.dims_items})


def rand_graded_map(rng: random.Random, V: GradedVectorSpace, W: GradedVectorSpace, shift: int = 0,
                    density: float = 0.6) -> GradedLinearMap:
    blocks = {}
    for d, n in V.dims_items:
        m = W.dim(d + shift)
        blocks[d] = Matrix([[rand_q(rng) if rng.random() < density else QQ(0) for _ in range(n)] for _ in range(m)], n)
    return GradedLinearMap.of(V, W, shift, blocks)


def rand_element(rng: random.Random, V: GradedVectorSpace, degree: int, density: float = 0.8) -> dict:
    return sp_clean({(degree, i): rand_q(rng) for i in range(V.dim(degree)) if rng.random() < density})


def inverse_glm(f: GradedLinearMap) -> GradedLinearMap:
    return GradedLinearMap.of(f.target, f.source, 0, {d: inverse(f.block(d)) for d, _ in f.source.dims_items})


# Lie algebra cores

class _Keys:
    """Assigns consecutive per-degree indices."""

    def __init__(self):
        self.count: Dict[int, int] = {}

    def new(self, d: int) -> Key:
        i = self.count.get(d, 0)
        self.count[d] = i + 1
        return (d, i)

    def space(self) -> GradedVectorSpace:
        return GradedVectorSpace.of(self.count)


def sl2_table(keys: Sequence[Key]) -> dict:
    h, e, f = keys
    return {(h, e): {e: QQ(2)}, (h, f): {f: QQ(-2)}, (e, f): {h: QQ(1)}}


@dataclass
class LieCore:
    """Lie algebra with distinguished basis subsets: X part, central Z part, sl2 part."""

    lie: GradedLieAlgebra
    X: List[Key]
    Z: List[Key]
    S: List[Key]


def random_lie_core(rng: random.Random, xdegs: Sequence[int], zdegs: Sequence[int], with_sl2: bool,
                    density: float = 0.7) -> LieCore:
    """2-step nilpotent ``X + Z`` with ``[X,X] ⊂ Z`` central, plus optional sl2 in degree 0."""
    kb = _Keys()
    X = [kb.new(d) for d in xdegs]
    Z = [kb.new(d) for d in zdegs]
    S = [kb.new(0) for _ in range(3)] if with_sl2 else []
    upper = {}
    for i, x in enumerate(X):
        for y in X[i:]:
            if x == y and x[0] % 2 == 0:
                continue
            tgt = [z for z in Z if z[0] == x[0] + y[0]]
            if tgt and rng.random() < density:
                v = sp_clean({z: rand_q(rng) for z in tgt})
                if v:
                    upper[(x, y)] = v
    if S:
        upper.update(sl2_table(S))
    return LieCore(GradedLieAlgebra.from_upper(kb.space(), upper), X, Z, S)


def _reindex(keys: Sequence[Key]) -> Dict[Key, Key]:
    """Map a list of keys to consecutive per-degree indices in the given order."""
    kb = _Keys()
    return {k: kb.new(k[0]) for k in keys}


def _restrict_table(table: dict, old2new: Dict[Key, Key], keys_l, keys_r) -> dict:
    out = {}
    for a in keys_l:
        for b in keys_r:
            v = table.get((a, b), {})
            if v:
                w = {}
                for k, c in v.items():
                    if k not in old2new:
                        raise ValueError("subspace is not closed")
                    w[old2new[k]] = c
                out[(old2new[a], old2new[b])] = w
    return out


def ideal_cm(L: GradedLieAlgebra, ideal: Sequence[Key]) -> CrossedModule:
    """``I -> L`` inclusion of a basis-aligned ideal, acting by the bracket."""
    Lkeys = list(L.space.basis())
    imap = _reindex(sorted(ideal))
    Aspace = GradedVectorSpace.of({d: sum(1 for k in ideal if k[0] == d) for d in {k[0] for k in ideal}})
    A = GradedLieAlgebra(Aspace, _restrict_table(L.table, imap, sorted(ideal), sorted(ideal)))
    inv = {v: k for k, v in imap.items()}
    d = GradedLinearMap.from_function(Aspace, L.space, 0, lambda k: sp_basis(inv[k]))
    action = {}
    for p in Lkeys:
        for a in sorted(ideal):
            v = L.table.get((p, a), {})
            if v:
                action[(p, imap[a])] = {imap[k]: c for k, c in v.items()}
    return CrossedModule(A, L, d, action)


def quotient_cm(L: GradedLieAlgebra, central: Sequence[Key]) -> CrossedModule:
    """``L -> L/C`` for a basis-aligned central ideal ``C``."""
    keep = [k for k in L.space.basis() if k not in set(central)]
    gmap = _reindex(keep)
    Gspace = GradedVectorSpace.of({d: sum(1 for k in keep if k[0] == d) for d in {k[0] for k in keep}})
    gt = {}
    for a in keep:
        for b in keep:
            v = {gmap[k]: c for k, c in L.table.get((a, b), {}).items() if k in gmap}
            if v:
                gt[(gmap[a], gmap[b])] = v
    G = GradedLieAlgebra(Gspace, gt)
    d = GradedLinearMap.from_function(L.space, Gspace, 0, lambda k: sp_basis(gmap[k]) if k in gmap else {})
    inv = {v: k for k, v in gmap.items()}
    action = {}
    for p in Gspace.basis():
        for a in L.space.basis():
            v = L.table.get((inv[p], a), {})
            if v:
                action[(p, a)] = dict(v)
    return CrossedModule(L, G, d, action)


def abelian_cm(Adims: Dict[int, int], Gdims: Dict[int, int], dmat: Optional[Dict[int, Matrix]] = None) -> CrossedModule:
    A = GradedLieAlgebra.abelian(GradedVectorSpace.of(Adims))
    G = GradedLieAlgebra.abelian(GradedVectorSpace.of(Gdims))
    d = GradedLinearMap.of(A.space, G.space, 0, dmat or {})
    return CrossedModule(A, G, d, {})


def contractible_cm(dims: Dict[int, int]) -> CrossedModule:
    V = GradedVectorSpace.of(dims)
    return CrossedModule(GradedLieAlgebra.abelian(V), GradedLieAlgebra.abelian(V), GradedLinearMap.identity(V), {})


def direct_sum_spaces(V: GradedVectorSpace, W: GradedVectorSpace) -> GradedVectorSpace:
    degs = set(V.degrees()) | set(W.degrees())
    return GradedVectorSpace.of({d: V.dim(d) + W.dim(d) for d in degs})


def _inj(V: GradedVectorSpace, W: GradedVectorSpace, second: bool):
    def f(k):
        return (k[0], k[1] + (V.dim(k[0]) if second else 0))
    return f


def _sum_table(t1, t2, f1, f2) -> dict:
    out = {}
    for (a, b), v in t1.items():
        out[(f1(a), f1(b))] = {f1(k): c for k, c in v.items()}
    for (a, b), v in t2.items():
        out[(f2(a), f2(b))] = {f2(k): c for k, c in v.items()}
    return out


def glm_direct_sum(f: GradedLinearMap, g: GradedLinearMap, src: GradedVectorSpace, tgt: GradedVectorSpace) -> GradedLinearMap:
    fs, gs = _inj(f.source, g.source, False), _inj(f.source, g.source, True)
    ft, gt = _inj(f.target, g.target, False), _inj(f.target, g.target, True)
    inv = {}
    for k in f.source.basis():
        inv[fs(k)] = ("f", k)
    for k in g.source.basis():
        inv[gs(k)] = ("g", k)

    def img(k):
        which, kk = inv[k]
        if which == "f":
            return {ft(x): c for x, c in f.on_basis(kk).items()}
        return {gt(x): c for x, c in g.on_basis(kk).items()}

    return GradedLinearMap.from_function(src, tgt, f.shift, img)


def cm_direct_sum(c1: CrossedModule, c2: CrossedModule) -> CrossedModule:
    As = direct_sum_spaces(c1.A.space, c2.A.space)
    Gs = direct_sum_spaces(c1.G.space, c2.G.space)
    a1, a2 = _inj(c1.A.space, c2.A.space, False), _inj(c1.A.space, c2.A.space, True)
    g1, g2 = _inj(c1.G.space, c2.G.space, False), _inj(c1.G.space, c2.G.space, True)
    A = GradedLieAlgebra(As, _sum_table(c1.A.table, c2.A.table, a1, a2))
    G = GradedLieAlgebra(Gs, _sum_table(c1.G.table, c2.G.table, g1, g2))
    d = glm_direct_sum(c1.d, c2.d, As, Gs)
    action = {}
    for (p, a), v in c1.action.items():
        action[(g1(p), a1(a))] = {a1(k): c for k, c in v.items()}
    for (p, a), v in c2.action.items():
        action[(g2(p), a2(a))] = {a2(k): c for k, c in v.items()}
    return CrossedModule(A, G, d, action)


def transport_cm(cm: CrossedModule, gA: GradedLinearMap, gG: GradedLinearMap) -> CrossedModule:
    """Structure transported along degreewise isomorphisms ``gA``, ``gG``."""
    iA, iG = inverse_glm(gA), inverse_glm(gG)
    At = table_from_function(cm.A.space, cm.A.space,
                             lambda a, b: gA(cm.A.br(iA.on_basis(a), iA.on_basis(b))))
    Gt = table_from_function(cm.G.space, cm.G.space,
                             lambda a, b: gG(cm.G.br(iG.on_basis(a), iG.on_basis(b))))
    act = table_from_function(cm.G.space, cm.A.space,
                              lambda p, a: gA(cm.act(iG.on_basis(p), iA.on_basis(a))))
    d = gG @ cm.d @ iA
    return CrossedModule(GradedLieAlgebra(cm.A.space, At), GradedLieAlgebra(cm.G.space, Gt), d, act)


def _fits(cm: CrossedModule, cfg: RandomConfig) -> bool:
    for V in (cm.A.space, cm.G.space):
        for d, n in V.dims_items:
            if n > cfg.max_dim or not cfg.min_degree <= d <= cfg.max_degree:
                return False
    return True


def random_block(rng: random.Random, cfg: RandomConfig) -> CrossedModule:
    lo, hi = cfg.min_degree, cfg.max_degree
    kind = rng.choice(["ideal", "quotient", "quotient", "abelian", "contractible", "ideal"])
    if kind in ("ideal", "quotient"):
        nx = rng.randint(1, 3)
        xdegs = [rng.randint(max(lo, -1), min(hi, 1)) for _ in range(nx)]
        sums = sorted({a + b for i, a in enumerate(xdegs) for b in xdegs[i:] if lo <= a + b <= hi})
        zdegs = [rng.choice(sums) for _ in range(rng.randint(1, 2))] if sums else []
        core = random_lie_core(rng, xdegs, zdegs, with_sl2=rng.random() < 0.25)
        L = core.lie
        if kind == "ideal":
            sub = [x for x in core.X if rng.random() < 0.5]
            ideal = sorted(set(core.Z) | set(sub) | (set(core.S) if rng.random() < 0.5 else set()))
            if not ideal:
                ideal = list(L.space.basis())[:1] if not core.X else sorted(core.Z) or [core.X[0]]
                if not core.Z:
                    ideal = sorted(L.space.basis())
            return ideal_cm(L, ideal)
        central = [z for z in core.Z if rng.random() < 0.7]
        return quotient_cm(L, central)
    if kind == "abelian":
        Ad = {rng.randint(lo, hi): rng.randint(1, 2)}
        Gd = {rng.randint(lo, hi): rng.randint(1, 2)}
        dm = {}
        for d, n in Ad.items():
            if d in Gd:
                dm[d] = Matrix([[rand_q(rng) for _ in range(n)] for _ in range(Gd[d])], n)
        return abelian_cm(Ad, Gd, dm)
    return contractible_cm({rng.randint(lo, hi): rng.randint(1, 2)})


def random_crossed_module(rng: random.Random, cfg: RandomConfig = RandomConfig(), transport: bool = True) -> CrossedModule:
    """Direct sum of random blocks, then a random degreewise change of basis."""
    cm = None
    for _ in range(rng.randint(1, cfg.max_blocks)):
        for _attempt in range(20):
            b = random_block(rng, cfg)
            cand = b if cm is None else cm_direct_sum(cm, b)
            if _fits(cand, cfg):
                cm = cand
                break
    if cm is None:
        cm = contractible_cm({0: 1})
    if transport:
        cm = transport_cm(cm, rand_graded_invertible(rng, cm.A.space), rand_graded_invertible(rng, cm.G.space))
    return cm


def random_basis_change(rng: random.Random, cm: CrossedModule) -> Tuple[CrossedModule, Lie2Morphism]:
    """A transported copy of ``cm`` and the strict isomorphism onto it."""
    gA, gG = rand_graded_invertible(rng, cm.A.space), rand_graded_invertible(rng, cm.G.space)
    new = transport_cm(cm, gA, gG)
    return new, Lie2Morphism(cm, new, gA, gG, {})


def random_homotoped(rng: random.Random, phi: Lie2Morphism, density: float = 0.6) -> Tuple[Lie2Morphism, GradedLinearMap]:
    """``phi`` moved along a random homotopy ``h: G -> A'``; returns the new morphism and ``h``."""
    h = rand_graded_map(rng, phi.source.G.space, phi.target.A.space, 0, density)
    return apply_homotopy(phi, h), h


@dataclass
class InversionInstance:
    """Morphism with a chain-homotopy inverse of its linear part."""

    phi: Lie2Morphism
    psi1A: GradedLinearMap
    psi1G: GradedLinearMap
    h: GradedLinearMap
    hprime: GradedLinearMap


def _inclusion_projection(cm: CrossedModule, P: CrossedModule, big: CrossedModule):
    incA = GradedLinearMap.from_function(cm.A.space, big.A.space, 0, lambda k: sp_basis(k))
    incG = GradedLinearMap.from_function(cm.G.space, big.G.space, 0, lambda k: sp_basis(k))

    def proj(space_small):
        return lambda k: sp_basis(k) if k[1] < space_small.dim(k[0]) else {}

    prA = GradedLinearMap.from_function(big.A.space, cm.A.space, 0, proj(cm.A.space))
    prG = GradedLinearMap.from_function(big.G.space, cm.G.space, 0, proj(cm.G.space))

    def hp(k):
        n = cm.G.space.dim(k[0])
        if k[1] < n:
            return {}
        return {(k[0], cm.A.space.dim(k[0]) + k[1] - n): QQ(-1)}

    hprime = GradedLinearMap.from_function(big.G.space, big.A.space, 0, hp)
    return incA, incG, prA, prG, hprime


def random_inversion_instance(rng: random.Random, cfg: RandomConfig = RandomConfig()) -> InversionInstance:
    """``cm -> cm + (P -id-> P)`` with projection inverse, perturbed and transported.

    Starting from the inclusion (``h = 0``) and projection (``h' = -id`` on P),
    the inclusion is moved along a random homotopy ``k``, which changes the data to
    ``h + psi1 k`` and ``h' + k psi1``; then both sides are transported by basis changes.
    """
    small = RandomConfig(cfg.min_degree, cfg.max_degree, max(1, cfg.max_dim - 1), cfg.max_blocks, cfg.max_coeff)
    cm = random_crossed_module(rng, small)
    pd = {rng.randint(cfg.min_degree, cfg.max_degree): 1 for _ in range(rng.randint(1, 2))}
    P = contractible_cm(pd)
    big = cm_direct_sum(cm, P)
    incA, incG, prA, prG, hprime = _inclusion_projection(cm, P, big)
    phi = Lie2Morphism(cm, big, incA, incG, {})
    h = GradedLinearMap.zero(cm.G.space, cm.A.space)
    phi, k = random_homotoped(rng, phi)
    h = h + prA @ k
    hprime = hprime + k @ prG
    src, iso_s = random_basis_change(rng, cm)
    tgt, iso_t = random_basis_change(rng, big)
    # phi' = iso_t phi iso_s^{-1}, psi' = iso_s psi iso_t^{-1}
    isA, isG = inverse_glm(iso_s.phi1A), inverse_glm(iso_s.phi1G)
    itA, itG = inverse_glm(iso_t.phi1A), inverse_glm(iso_t.phi1G)
    Gs = src.G.space
    phi2 = table_from_function(Gs, Gs, lambda a, b: iso_t.phi1A(bilinear(phi.phi2, isG.on_basis(a), isG.on_basis(b))))
    phi_t = Lie2Morphism(src, tgt, iso_t.phi1A @ phi.phi1A @ isA, iso_t.phi1G @ phi.phi1G @ isG, phi2)
    return InversionInstance(phi_t, iso_s.phi1A @ prA @ itA, iso_s.phi1G @ prG @ itG,
                             iso_s.phi1A @ h @ isG, iso_t.phi1A @ hprime @ itG)
