"""Finite groupoids: nerves, cohomology, pullbacks and the partition-of-unity
homotopy inverse of the truncated two-term complex.

Conventions. An arrow ``g`` goes from ``src[g]`` to ``tgt[g]``; the product
``g0 g1`` is defined iff ``src[g0] == tgt[g1]``. Level-0 cochains are
functions on objects and ``(delta f)(g) = f(s g) - f(t g)``; higher levels use
the alternating face sum. Objects and arrows are stored by index; labels are
kept only for reporting and serialization.
"""
from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .linalg import (
    ONE,
    ZERO,
    Matrix,
    Scalar,
    from_entries,
    q,
    sparse_kernel,
    sparse_rank,
    solve,
)
from .report import DomainViolation, InvalidCover, NotSurjective, ValidationReport

DEFAULT_MAX_LEVEL = 4


@dataclass(eq=False)
class FiniteGroupoid:
    """Finite groupoid with index-based structure maps."""

    objects: tuple
    arrows: tuple
    src: tuple
    tgt: tuple
    unit: tuple
    inv: tuple
    comp: dict
    _nerve: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def mul(self, g: int, h: int) -> int:
        return self.comp[(g, h)]

    def arrows_between(self, x: int, y: int) -> list:
        """Arrows with source ``x`` and target ``y``."""
        return [g for g in range(self.n_arrows) if self.src[g] == x and self.tgt[g] == y]

    def nerve(self, p: int) -> list:
        """Composable p-tuples; level 0 is the list of object indices."""
        if p < 0:
            raise ValueError("nerve level must be nonnegative")
        with self._lock:
            if p in self._nerve:
                return self._nerve[p]
        if p == 0:
            out = list(range(self.n_objects))
        elif p == 1:
            out = [(g,) for g in range(self.n_arrows)]
        else:
            by_target = {}
            for g in range(self.n_arrows):
                by_target.setdefault(self.tgt[g], []).append(g)
            out = [t + (h,) for t in self.nerve(p - 1) for h in by_target.get(self.src[t[-1]], [])]
        with self._lock:
            self._nerve.setdefault(p, out)
            return self._nerve[p]

    def nerve_index(self, p: int) -> dict:
        key = ("index", p)
        with self._lock:
            if key in self._nerve:
                return self._nerve[key]
        idx = {c: i for i, c in enumerate(self.nerve(p))}
        with self._lock:
            self._nerve.setdefault(key, idx)
            return self._nerve[key]


def make_groupoid(objects: Sequence[Hashable], arrows: Sequence[Hashable], src: dict, tgt: dict,
                  unit: dict, inv: dict, comp: dict) -> FiniteGroupoid:
    """Build a groupoid from label-keyed tables (``comp[(g, h)] = gh``)."""
    oi = {o: i for i, o in enumerate(objects)}
    ai = {a: i for i, a in enumerate(arrows)}
    return FiniteGroupoid(
        objects=tuple(objects),
        arrows=tuple(arrows),
        src=tuple(oi[src[a]] for a in arrows),
        tgt=tuple(oi[tgt[a]] for a in arrows),
        unit=tuple(ai[unit[o]] for o in objects),
        inv=tuple(ai[inv[a]] for a in arrows),
        comp={(ai[g], ai[h]): ai[gh] for (g, h), gh in comp.items()},
    )


def check_groupoid(g: FiniteGroupoid) -> ValidationReport:
    """Exhaustively check the groupoid axioms."""
    rep = ValidationReport()
    lab = g.arrows
    for m in range(g.n_objects):
        u = g.unit[m]
        rep.check("unit-source", g.objects[m], g.src[u], m)
        rep.check("unit-target", g.objects[m], g.tgt[u], m)
    for a in range(g.n_arrows):
        for b in range(g.n_arrows):
            composable = g.src[a] == g.tgt[b]
            present = (a, b) in g.comp
            if composable != present:
                rep.add("comp-domain", (lab[a], lab[b]), present, composable)
                continue
            if present:
                c = g.comp[(a, b)]
                rep.check("comp-source", (lab[a], lab[b]), g.src[c], g.src[b])
                rep.check("comp-target", (lab[a], lab[b]), g.tgt[c], g.tgt[a])
    if not rep.ok:
        return rep
    for (a, b, c) in g.nerve(3):
        lhs = g.mul(g.mul(a, b), c)
        rhs = g.mul(a, g.mul(b, c))
        if lhs != rhs:
            rep.add("associativity", (lab[a], lab[b], lab[c]), lab[lhs], lab[rhs])
    for a in range(g.n_arrows):
        rep.check("left-unit", lab[a], g.mul(g.unit[g.tgt[a]], a), a)
        rep.check("right-unit", lab[a], g.mul(a, g.unit[g.src[a]]), a)
        ia = g.inv[a]
        rep.check("inverse-source", lab[a], g.src[ia], g.tgt[a])
        if g.src[ia] == g.tgt[a] and g.tgt[ia] == g.src[a]:
            rep.check("inverse-left", lab[a], g.mul(a, ia), g.unit[g.tgt[a]])
            rep.check("inverse-right", lab[a], g.mul(ia, a), g.unit[g.src[a]])
    return rep


# ---------------------------------------------------------------- constructors

def unit_groupoid(n: int) -> FiniteGroupoid:
    objs = list(range(n))
    arrows = [("1", m) for m in objs]
    return make_groupoid(objs, arrows, {a: a[1] for a in arrows}, {a: a[1] for a in arrows},
                         {m: ("1", m) for m in objs}, {a: a for a in arrows},
                         {(a, a): a for a in arrows})


def group_groupoid(elements: Sequence[Hashable], mult, identity, inverse=None) -> FiniteGroupoid:
    """One-object groupoid of a finite group given by a multiplication function."""
    els = list(elements)
    if inverse is None:
        inverse = lambda x: next(y for y in els if mult(x, y) == identity)  # noqa: E731
    return make_groupoid(["*"], els, {a: "*" for a in els}, {a: "*" for a in els},
                         {"*": identity}, {a: inverse(a) for a in els},
                         {(a, b): mult(a, b) for a in els for b in els})


def cyclic_group(n: int) -> FiniteGroupoid:
    return group_groupoid(range(n), lambda a, b: (a + b) % n, 0, lambda a: (-a) % n)


def _perm_mul(a, b):
    return tuple(a[b[i]] for i in range(len(b)))


def symmetric_group(k: int) -> FiniteGroupoid:
    perms = list(itertools.permutations(range(k)))
    return group_groupoid(perms, _perm_mul, tuple(range(k)))


def pair_groupoid(n: int, labels: Optional[Sequence] = None) -> FiniteGroupoid:
    """Arrow ``(x, y)`` goes from ``y`` to ``x``; ``(x, y)(y, z) = (x, z)``."""
    objs = list(labels) if labels is not None else list(range(1, n + 1))
    arrows = [(x, y) for x in objs for y in objs]
    return make_groupoid(objs, arrows, {a: a[1] for a in arrows}, {a: a[0] for a in arrows},
                         {x: (x, x) for x in objs}, {a: (a[1], a[0]) for a in arrows},
                         {((x, y), (y2, z)): (x, z) for (x, y) in arrows for (y2, z) in arrows if y == y2})


def transitive_groupoid(objs: Sequence, group: FiniteGroupoid) -> FiniteGroupoid:
    """Pair groupoid on ``objs`` times a one-object group; arrows ``(x, h, y)``."""
    if group.n_objects != 1:
        raise ValueError("expected a one-object groupoid")
    hs = range(group.n_arrows)
    arrows = [(x, group.arrows[h], y) for x in objs for h in hs for y in objs]
    glab = {lab: i for i, lab in enumerate(group.arrows)}
    e = group.unit[0]

    def m(a, b):
        return (a[0], group.arrows[group.mul(glab[a[1]], glab[b[1]])], b[2])

    return make_groupoid(
        list(objs), arrows, {a: a[2] for a in arrows}, {a: a[0] for a in arrows},
        {x: (x, group.arrows[e], x) for x in objs},
        {a: (a[2], group.arrows[group.inv[glab[a[1]]]], a[0]) for a in arrows},
        {(a, b): m(a, b) for a in arrows for b in arrows if a[2] == b[0]})


def disjoint_union(*gs: FiniteGroupoid) -> FiniteGroupoid:
    objs, arrows, src, tgt, unit, inv, comp = [], [], [], [], [], [], {}
    for k, g in enumerate(gs):
        oo, ao = len(objs), len(arrows)
        objs += [(k, o) for o in g.objects]
        arrows += [(k, a) for a in g.arrows]
        src += [oo + s for s in g.src]
        tgt += [oo + t for t in g.tgt]
        unit += [ao + u for u in g.unit]
        inv += [ao + i for i in g.inv]
        comp.update({(ao + a, ao + b): ao + c for (a, b), c in g.comp.items()})
    return FiniteGroupoid(tuple(objs), tuple(arrows), tuple(src), tuple(tgt), tuple(unit), tuple(inv), comp)


def random_groupoid(rng: random.Random, max_objects: int = 6, max_arrows: int = 30) -> FiniteGroupoid:
    """Disjoint union of transitive pieces (pair groupoid times a small group)."""
    groups = [cyclic_group(1), cyclic_group(2), cyclic_group(3), symmetric_group(3)]
    n = rng.randint(1, max_objects)
    parts, left, arrows_left, base = [], n, max_arrows, 0
    while left > 0:
        size = rng.randint(1, left)
        while size * size > arrows_left:
            size -= 1
        if size == 0:
            break
        choices = [h for h in groups if size * size * h.n_arrows <= arrows_left - (left - size)]
        grp = rng.choice(choices or groups[:1])
        parts.append(transitive_groupoid(list(range(base, base + size)), grp))
        arrows_left -= size * size * grp.n_arrows
        left -= size
        base += size
    return disjoint_union(*parts)


# ---------------------------------------------------------------- cochains

@dataclass(frozen=True)
class Cochain:
    """Function on the level-p nerve, stored in nerve order."""

    level: int
    values: tuple

    @classmethod
    def from_function(cls, g: FiniteGroupoid, p: int, f) -> "Cochain":
        return cls(p, tuple(q(f(c)) for c in g.nerve(p)))

    def __call__(self, g: FiniteGroupoid, c) -> Scalar:
        return self.values[g.nerve_index(self.level)[c]]


def _faces(g: FiniteGroupoid, p: int, c) -> list:
    """Signed faces of a level-(p+1) nerve element, as (sign, level-p element)."""
    if p == 0:
        a = c[0]
        return [(ONE, g.src[a]), (-ONE, g.tgt[a])]
    out = [(ONE, c[1:])]
    for j in range(1, p + 1):
        merged = c[:j - 1] + (g.mul(c[j - 1], c[j]),) + c[j + 1:]
        out.append((ONE if j % 2 == 0 else -ONE, merged))
    out.append((ONE if (p + 1) % 2 == 0 else -ONE, c[:-1]))
    return out


def coboundary_entries(g: FiniteGroupoid, p: int) -> dict:
    """Sparse matrix of delta: C^p -> C^{p+1}."""
    idx = g.nerve_index(p)
    ent = {}
    for i, c in enumerate(g.nerve(p + 1)):
        for sgn, face in _faces(g, p, c):
            key = (i, idx[face])
            ent[key] = ent.get(key, ZERO) + sgn
    return {k: v for k, v in ent.items() if v}


def coboundary_matrix(g: FiniteGroupoid, p: int) -> Matrix:
    return from_entries(coboundary_entries(g, p), len(g.nerve(p + 1)), len(g.nerve(p)))


def coboundary(g: FiniteGroupoid, c: Cochain) -> Cochain:
    """The groupoid coboundary of a cochain."""
    p = c.level
    idx = g.nerve_index(p)
    vals = []
    for e in g.nerve(p + 1):
        vals.append(sum((s * c.values[idx[f]] for s, f in _faces(g, p, e)), ZERO))
    return Cochain(p + 1, tuple(vals))


def cohomology_dims(g: FiniteGroupoid, max_level: int = DEFAULT_MAX_LEVEL) -> list:
    """Dimensions of H^p(g; Q) for p = 0..max_level."""
    if max_level < 0:
        raise ValueError("max_level must be nonnegative")
    ranks = []
    for p in range(max_level + 1):
        ranks.append(sparse_rank(coboundary_entries(g, p), len(g.nerve(p + 1)), len(g.nerve(p))))
    out = []
    for p in range(max_level + 1):
        prev = ranks[p - 1] if p > 0 else 0
        out.append(len(g.nerve(p)) - ranks[p] - prev)
    return out


# ---------------------------------------------------------------- pullbacks

@dataclass(eq=False)
class PullbackGroupoid:
    """``g[X]`` with its Morita projection; arrow labels are ``(x, gamma, y)``."""

    groupoid: FiniteGroupoid
    base: FiniteGroupoid
    phi: tuple  # object index of X -> object index of base
    proj: tuple  # arrow index of g[X] -> arrow index of base
    triples: tuple  # arrow index -> (x, gamma, y) as indices


def pullback_groupoid(g: FiniteGroupoid, X: Sequence[Hashable], phi) -> PullbackGroupoid:
    """Pull back along ``phi: X -> objects`` (a dict or callable on labels)."""
    f = phi if callable(phi) else phi.__getitem__
    oi = {o: i for i, o in enumerate(g.objects)}
    X = list(X)
    ph = tuple(oi[f(x)] for x in X)
    missing = set(range(g.n_objects)) - set(ph)
    if missing:
        raise NotSurjective(f"objects not in the image: {[g.objects[m] for m in sorted(missing)]}")
    fiber = {}
    for i, m in enumerate(ph):
        fiber.setdefault(m, []).append(i)
    triples = [(x, a, y) for a in range(g.n_arrows) for x in fiber[g.tgt[a]] for y in fiber[g.src[a]]]
    ti = {t: i for i, t in enumerate(triples)}
    by_tgt = {}
    for j, (y, b, z) in enumerate(triples):
        by_tgt.setdefault(y, []).append(j)
    comp = {}
    for i, (x, a, y) in enumerate(triples):
        for j in by_tgt.get(y, []):
            _, b, z = triples[j]
            comp[(i, j)] = ti[(x, g.mul(a, b), z)]
    gx = FiniteGroupoid(
        objects=tuple(X),
        arrows=tuple((X[x], g.arrows[a], X[y]) for (x, a, y) in triples),
        src=tuple(y for (_, _, y) in triples),
        tgt=tuple(x for (x, _, _) in triples),
        unit=tuple(ti[(x, g.unit[ph[x]], x)] for x in range(len(X))),
        inv=tuple(ti[(y, g.inv[a], x)] for (x, a, y) in triples),
        comp=comp,
    )
    return PullbackGroupoid(gx, g, ph, tuple(a for (_, a, _) in triples), tuple(triples))


def check_functor(g1: FiniteGroupoid, g2: FiniteGroupoid, fobj: Sequence[int], farr: Sequence[int],
                  arrows: Optional[Sequence[int]] = None) -> ValidationReport:
    """Check that index maps form a functor (optionally on a subset of arrows)."""
    rep = ValidationReport()
    arr = range(g1.n_arrows) if arrows is None else arrows
    aset = set(arr)
    for a in arr:
        rep.check("functor-source", g1.arrows[a], g2.src[farr[a]], fobj[g1.src[a]])
        rep.check("functor-target", g1.arrows[a], g2.tgt[farr[a]], fobj[g1.tgt[a]])
    for (a, b), c in g1.comp.items():
        if a in aset and b in aset and c in aset:
            rep.check("functor-comp", (g1.arrows[a], g1.arrows[b]), farr[c], g2.mul(farr[a], farr[b]))
    return rep


def pullback_cochain_matrix(pb: PullbackGroupoid, p: int) -> Matrix:
    """Phi^*: C^p(base) -> C^p(g[X]) at levels 0 and 1."""
    gx, g = pb.groupoid, pb.base
    if p == 0:
        ent = {(x, pb.phi[x]): ONE for x in range(gx.n_objects)}
        return from_entries(ent, gx.n_objects, g.n_objects)
    if p == 1:
        ent = {(i, pb.proj[i]): ONE for i in range(gx.n_arrows)}
        return from_entries(ent, gx.n_arrows, g.n_arrows)
    raise ValueError("only levels 0 and 1 are needed")


# ---------------------------------------------------------------- truncated complex

@dataclass(frozen=True)
class TwoTermComplex:
    """``C(M) -> Z(G)``; ``z_basis`` columns live in C^1, ``delta`` uses Z coordinates."""

    dim0: int
    z_basis: Matrix
    delta: Matrix

    @property
    def dims(self) -> tuple:
        return (self.dim0, self.z_basis.ncols)

    def cohomology(self) -> tuple:
        from .linalg import rank
        r = rank(self.delta)
        return (self.dim0 - r, self.z_basis.ncols - r)


def multiplicative_basis(g: FiniteGroupoid) -> Matrix:
    """Basis of Z(G) = ker(delta: C^1 -> C^2) as columns in C^1 coordinates."""
    return sparse_kernel(coboundary_entries(g, 1), len(g.nerve(2)), g.n_arrows)


def z_coordinates(z_basis: Matrix, m: Matrix) -> Matrix:
    """Express the columns of ``m`` (in C^1) in the basis ``z_basis``."""
    x = solve(z_basis, m)
    if x is None:
        raise ValueError("columns are not multiplicative")
    return x


def truncated_two_term(g: FiniteGroupoid) -> TwoTermComplex:
    z = multiplicative_basis(g)
    d0 = coboundary_matrix(g, 0)
    return TwoTermComplex(g.n_objects, z, z_coordinates(z, d0))


# ---------------------------------------------------------------- covered surjections

@dataclass(frozen=True)
class CoveredSurjection:
    """phi: X -> M with a cover, local sections and a partition of unity (all by index)."""

    phi: tuple
    cover: tuple  # tuple of frozensets of object indices of M
    sections: tuple  # tuple of dicts m -> x
    weights: tuple  # tuple of tuples of scalars indexed by M

    @property
    def n_points(self) -> int:
        return len(self.phi)


def check_covered_surjection(g: FiniteGroupoid, cs: CoveredSurjection) -> ValidationReport:
    rep = ValidationReport()
    n = g.n_objects
    for m in range(n):
        if m not in cs.phi:
            rep.add("surjectivity", g.objects[m], None, "in image")
    if len(cs.sections) != len(cs.cover) or len(cs.weights) != len(cs.cover):
        rep.add("cover-shape", None, (len(cs.cover), len(cs.sections), len(cs.weights)), None)
        return rep
    for i, (u, sec, w) in enumerate(zip(cs.cover, cs.sections, cs.weights)):
        if set(sec) != set(u):
            rep.add("section-domain", i, sorted(sec), sorted(u))
        for m, x in sec.items():
            rep.check("section", (i, g.objects[m]), cs.phi[x], m)
        for m in range(n):
            if m not in u and w[m] != 0:
                rep.add("weight-support", (i, g.objects[m]), w[m], 0)
    for m in range(n):
        rep.check("partition-of-unity", g.objects[m], sum((w[m] for w in cs.weights), ZERO), ONE)
    return rep


def random_covered_surjection(rng: random.Random, g: FiniteGroupoid, max_extra: int = 4,
                              max_sets: int = 3) -> CoveredSurjection:
    """Random surjection with overlapping cover, sections and rational weights."""
    n = g.n_objects
    phi = list(range(n)) + [rng.randrange(n) for _ in range(rng.randint(0, max_extra))]
    rng.shuffle(phi)
    fiber = {}
    for x, m in enumerate(phi):
        fiber.setdefault(m, []).append(x)
    k = rng.randint(1, max_sets)
    cover = [set() for _ in range(k)]
    for m in range(n):
        for i in rng.sample(range(k), rng.randint(1, k)):
            cover[i].add(m)
    sections = [{m: rng.choice(fiber[m]) for m in sorted(u)} for u in cover]
    weights = [[ZERO] * n for _ in range(k)]
    for m in range(n):
        owners = [i for i in range(k) if m in cover[i]]
        vals = [q(rng.randint(1, 5)) for _ in owners]
        tot = sum(vals, ZERO)
        for i, v in zip(owners, vals):
            weights[i][m] = v / tot
    return CoveredSurjection(tuple(phi), tuple(frozenset(u) for u in cover), tuple(sections),
                             tuple(tuple(w) for w in weights))


def _pullback_of(g: FiniteGroupoid, cs: CoveredSurjection) -> PullbackGroupoid:
    return pullback_groupoid(g, list(range(cs.n_points)), lambda x: g.objects[cs.phi[x]])


def section_maps(g: FiniteGroupoid, cs: CoveredSurjection, i: int, j: int,
                 pb: Optional[PullbackGroupoid] = None) -> tuple:
    """``(sigma_hat, tau)`` as dicts into arrow indices of ``g[X]``.

    ``sigma_hat`` sends an arrow with source in ``U_i`` and target in ``U_j`` to
    ``(sigma_j(t), gamma, sigma_i(s))``; ``tau`` sends ``x`` over ``U_i`` to
    ``(x, 1, sigma_i(phi x))``.
    """
    pb = pb or _pullback_of(g, cs)
    ti = {t: k for k, t in enumerate(pb.triples)}
    si, sj = cs.sections[i], cs.sections[j]
    sig = {}
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        if s in si and t in sj:
            sig[a] = ti[(sj[t], a, si[s])]
    tau = {}
    for x in range(cs.n_points):
        m = cs.phi[x]
        if m in si:
            tau[x] = ti[(x, g.unit[m], si[m])]
    return sig, tau


def sigma_hat_arrow(g: FiniteGroupoid, cs: CoveredSurjection, i: int, j: int, a: int, pb: PullbackGroupoid) -> int:
    s, t = g.src[a], g.tgt[a]
    if s not in cs.sections[i] or t not in cs.sections[j]:
        raise DomainViolation(f"arrow {g.arrows[a]} leaves U_{i} x U_{j}")
    return section_maps(g, cs, i, j, pb)[0][a]


@dataclass(frozen=True)
class PartitionInverse:
    """Maps between the truncated complexes of g[X] and g, in ambient coordinates."""

    pullback: PullbackGroupoid
    I0: Matrix  # C^0(X) -> C^0(M)
    I1: Matrix  # C^1(g[X]) -> C^1(g)
    H: Matrix  # C^1(g[X]) -> C^0(X)


def partition_inverse(g: FiniteGroupoid, cs: CoveredSurjection) -> PartitionInverse:
    """I0 = sum chi_i sigma_i^*, I1 = sum (s^*chi_i)(t^*chi_j) sigma_hat_ij^*, H = sum (phi^*chi_i) tau_i^*."""
    rep = check_covered_surjection(g, cs)
    if not rep.ok:
        raise InvalidCover(str(rep[0]))
    pb = _pullback_of(g, cs)
    gx = pb.groupoid
    k = len(cs.cover)
    e0, e1, eh = {}, {}, {}
    for i in range(k):
        w, sec = cs.weights[i], cs.sections[i]
        for m, x in sec.items():
            if w[m]:
                e0[(m, x)] = e0.get((m, x), ZERO) + w[m]
        for x in range(cs.n_points):
            m = cs.phi[x]
            if w[m]:
                if m not in sec:
                    raise DomainViolation(f"weight {i} is nonzero outside its section domain")
                col = section_maps_tau(g, cs, i, x, pb)
                eh[(x, col)] = eh.get((x, col), ZERO) + w[m]
    ti = {t: n for n, t in enumerate(pb.triples)}
    for i in range(k):
        for j in range(k):
            si, sj = cs.sections[i], cs.sections[j]
            for a in range(g.n_arrows):
                s, t = g.src[a], g.tgt[a]
                c = cs.weights[i][s] * cs.weights[j][t]
                if not c:
                    continue
                col = ti[(sj[t], a, si[s])]
                e1[(a, col)] = e1.get((a, col), ZERO) + c
    return PartitionInverse(
        pb,
        from_entries(e0, g.n_objects, cs.n_points),
        from_entries(e1, g.n_arrows, gx.n_arrows),
        from_entries(eh, cs.n_points, gx.n_arrows),
    )


def section_maps_tau(g: FiniteGroupoid, cs: CoveredSurjection, i: int, x: int, pb: PullbackGroupoid) -> int:
    m = cs.phi[x]
    sec = cs.sections[i]
    if m not in sec:
        raise DomainViolation(f"point {x} lies outside U_{i}")
    return pb.triples.index((x, g.unit[m], sec[m]))


def check_partition_inverse(g: FiniteGroupoid, cs: CoveredSurjection,
                            pi: Optional[PartitionInverse] = None) -> ValidationReport:
    """Chain map, left inverse and homotopy identities, exactly."""
    pi = pi or partition_inverse(g, cs)
    pb = pi.pullback
    gx = pb.groupoid
    rep = ValidationReport()
    dM, dX = coboundary_matrix(g, 0), coboundary_matrix(gx, 0)
    zM, zX = multiplicative_basis(g), multiplicative_basis(gx)
    P0, P1 = pullback_cochain_matrix(pb, 0), pullback_cochain_matrix(pb, 1)

    def cmp(tag, a: Matrix, b: Matrix):
        if a != b:
            diff = a - b
            bad = [(i, j) for i in range(diff.nrows) for j in range(diff.ncols) if diff.rows[i][j]]
            rep.add(tag, bad[0], a.rows[bad[0][0]][bad[0][1]], b.rows[bad[0][0]][bad[0][1]])

    cmp("chain-map", pi.I1 @ dX, dM @ pi.I0)
    img = pi.I1 @ zX
    if solve(zM, img) is None and img.ncols:
        rep.add("I1-multiplicative", None, "I1(Z) not in Z", None)
    cmp("left-inverse-0", pi.I0 @ P0, Matrix.eye(g.n_objects))
    cmp("left-inverse-1", pi.I1 @ P1 @ zM, zM)
    cmp("homotopy-0", P0 @ pi.I0 - Matrix.eye(gx.n_objects), pi.H @ dX)
    cmp("homotopy-1", (P1 @ pi.I1) @ zX - zX, dX @ pi.H @ zX)
    return rep
