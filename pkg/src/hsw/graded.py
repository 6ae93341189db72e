"""Finite-support graded vector spaces, graded linear maps and exterior algebra.

Elements of a graded space are stored sparsely as ``{(degree, index): coeff}``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Tuple

from .linalg import ZERO, Matrix, ShapeMismatch, q
from .report import BaseMismatch

Key = Tuple[int, int]
Sparse = Dict[Key, object]

DEFAULT_DEGREE_WINDOW = (-6, 6)


# sparse element arithmetic

def sp_clean(x: Mapping) -> Sparse:
    return {k: v for k, v in x.items() if v}


def sp_add(*xs: Mapping) -> Sparse:
    out: Sparse = {}
    for x in xs:
        for k, v in x.items():
            out[k] = out.get(k, ZERO) + v
    return sp_clean(out)


def sp_scale(c, x: Mapping) -> Sparse:
    c = q(c)
    if not c:
        return {}
    return {k: c * v for k, v in x.items() if v}


def sp_sub(x: Mapping, y: Mapping) -> Sparse:
    return sp_add(x, sp_scale(-1, y))


def sp_neg(x: Mapping) -> Sparse:
    return sp_scale(-1, x)


def sp_basis(key: Key) -> Sparse:
    return {key: q(1)}


def sp_degree(x: Mapping) -> Optional[int]:
    """Common degree of a homogeneous nonzero element (None for zero)."""
    degs = {k[0] for k, v in x.items() if v}
    if not degs:
        return None
    if len(degs) > 1:
        raise ValueError("element is not homogeneous")
    return degs.pop()


def sp_linear(f: Callable[[Key], Mapping], x: Mapping) -> Sparse:
    """Extend a map on basis keys linearly."""
    out: Sparse = {}
    for k, v in x.items():
        if v:
            for k2, w in f(k).items():
                out[k2] = out.get(k2, ZERO) + v * w
    return sp_clean(out)


def sp_bilinear(f: Callable[[Key, Key], Mapping], x: Mapping, y: Mapping) -> Sparse:
    out: Sparse = {}
    for k1, v1 in x.items():
        if not v1:
            continue
        for k2, v2 in y.items():
            if not v2:
                continue
            c = v1 * v2
            for k3, w in f(k1, k2).items():
                out[k3] = out.get(k3, ZERO) + c * w
    return sp_clean(out)


def sp_project(x: Mapping, degree: int) -> Sparse:
    return {k: v for k, v in x.items() if k[0] == degree and v}


@dataclass(frozen=True)
class GradedVectorSpace:
    """Finite-support graded vector space given by its degreewise dimensions."""

    dims_items: Tuple[Tuple[int, int], ...]
    labels: Optional[Tuple[Tuple[int, Tuple[str, ...]], ...]] = field(default=None, compare=False)

    @classmethod
    def of(cls, dims: Mapping[int, int], labels: Optional[Mapping[int, Iterable[str]]] = None) -> "GradedVectorSpace":
        items = []
        for d, n in dims.items():
            d, n = int(d), int(n)
            if n < 0:
                raise ValueError("negative dimension")
            if n:
                items.append((d, n))
        lab = None
        if labels:
            lab = tuple(sorted((int(d), tuple(v)) for d, v in labels.items()))
        return cls(tuple(sorted(items)), lab)

    @property
    def dims(self) -> Dict[int, int]:
        return dict(self.dims_items)

    def dim(self, d: int) -> int:
        for dd, n in self.dims_items:
            if dd == d:
                return n
        return 0

    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for d, _ in self.dims_items)

    def total_dim(self) -> int:
        return sum(n for _, n in self.dims_items)

    def basis(self, degree: Optional[int] = None) -> Iterator[Key]:
        for d, n in self.dims_items:
            if degree is None or d == degree:
                for i in range(n):
                    yield (d, i)

    def shift(self, k: int) -> "GradedVectorSpace":
        """``V[k]`` with ``V[k]_d = V_{d+k}``."""
        return GradedVectorSpace(tuple((d - k, n) for d, n in self.dims_items),
                                 None if self.labels is None else tuple((d - k, v) for d, v in self.labels))

    def label(self, key: Key) -> str:
        if self.labels:
            for d, v in self.labels:
                if d == key[0] and key[1] < len(v):
                    return v[key[1]]
        return f"b{key[0]}_{key[1]}"

    def within(self, window: Tuple[int, int] = DEFAULT_DEGREE_WINDOW) -> bool:
        lo, hi = window
        return all(lo <= d <= hi for d in self.degrees())

    def to_vectors(self, x: Mapping) -> Dict[int, tuple]:
        """Dense per-degree coordinates of a sparse element."""
        out = {}
        for d, n in self.dims_items:
            out[d] = tuple(x.get((d, i), ZERO) for i in range(n))
        for k, v in x.items():
            if v and (k[0] not in out or k[1] >= self.dim(k[0])):
                raise ShapeMismatch(f"key {k} outside space")
        return out


def shift_space(V: GradedVectorSpace, k: int) -> GradedVectorSpace:
    return V.shift(k)


@dataclass(frozen=True)
class GradedElement:
    """Element of a graded space with dense per-degree components."""

    space: GradedVectorSpace
    components: Tuple[Tuple[int, tuple], ...]

    @classmethod
    def from_sparse(cls, space: GradedVectorSpace, x: Mapping) -> "GradedElement":
        return cls(space, tuple(sorted(space.to_vectors(x).items())))

    def to_sparse(self) -> Sparse:
        return sp_clean({(d, i): v for d, vec in self.components for i, v in enumerate(vec)})


@dataclass(frozen=True)
class GradedLinearMap:
    """Map sending degree ``d`` of ``source`` to degree ``d+shift`` of ``target``."""

    source: GradedVectorSpace
    target: GradedVectorSpace
    shift: int
    blocks_items: Tuple[Tuple[int, Matrix], ...]

    def __post_init__(self):
        for d, m in self.blocks_items:
            if m.shape != (self.target.dim(d + self.shift), self.source.dim(d)):
                raise ShapeMismatch(f"block at degree {d} has shape {m.shape}")

    @classmethod
    def of(cls, source, target, shift: int, blocks: Mapping[int, Matrix]) -> "GradedLinearMap":
        items = []
        for d, m in blocks.items():
            if not isinstance(m, Matrix):
                m = Matrix(m, source.dim(d))
            if m.nrows and m.ncols and not m.is_zero():
                items.append((int(d), m))
            elif m.shape != (target.dim(d + shift), source.dim(d)):
                raise ShapeMismatch(f"block at degree {d} has shape {m.shape}")
        return cls(source, target, shift, tuple(sorted(items, key=lambda t: t[0])))

    @classmethod
    def zero(cls, source, target, shift: int = 0) -> "GradedLinearMap":
        return cls(source, target, shift, ())

    @classmethod
    def identity(cls, V: GradedVectorSpace) -> "GradedLinearMap":
        return cls.of(V, V, 0, {d: Matrix.eye(n) for d, n in V.dims_items})

    @classmethod
    def from_function(cls, source, target, shift: int, f: Callable[[Key], Mapping]) -> "GradedLinearMap":
        blocks = {}
        for d, n in source.dims_items:
            m = target.dim(d + shift)
            cols = []
            for i in range(n):
                img = f((d, i))
                col = [ZERO] * m
                for (dd, j), v in img.items():
                    if not v:
                        continue
                    if dd != d + shift or j >= m:
                        raise ShapeMismatch(f"image of {(d, i)} has key {(dd, j)}")
                    col[j] = q(v)
                cols.append(col)
            blocks[d] = Matrix.from_columns(cols, m)
        return cls.of(source, target, shift, blocks)

    @property
    def blocks(self) -> Dict[int, Matrix]:
        return dict(self.blocks_items)

    def block(self, d: int) -> Matrix:
        for dd, m in self.blocks_items:
            if dd == d:
                return m
        return Matrix.zeros(self.target.dim(d + self.shift), self.source.dim(d))

    def on_basis(self, key: Key) -> Sparse:
        d, i = key
        m = self.block(d)
        return {(d + self.shift, j): m.rows[j][i] for j in range(m.nrows) if m.rows[j][i]}

    def __call__(self, x: Mapping) -> Sparse:
        out: Sparse = {}
        for (d, i), v in x.items():
            if not v:
                continue
            for dd, m in self.blocks_items:
                if dd == d:
                    for j in range(m.nrows):
                        c = m.rows[j][i]
                        if c:
                            k = (d + self.shift, j)
                            out[k] = out.get(k, ZERO) + c * v
        return sp_clean(out)

    def _same_shape(self, other: "GradedLinearMap") -> None:
        if self.source != other.source or self.target != other.target or self.shift != other.shift:
            raise ShapeMismatch("graded maps differ in source, target or shift")

    def __add__(self, other: "GradedLinearMap") -> "GradedLinearMap":
        self._same_shape(other)
        degs = sorted(set(self.blocks) | set(other.blocks))
        return GradedLinearMap.of(self.source, self.target, self.shift, {d: self.block(d) + other.block(d) for d in degs})

    def __neg__(self) -> "GradedLinearMap":
        return GradedLinearMap(self.source, self.target, self.shift, tuple((d, -m) for d, m in self.blocks_items))

    def __sub__(self, other: "GradedLinearMap") -> "GradedLinearMap":
        return self + (-other)

    def scale(self, c) -> "GradedLinearMap":
        return GradedLinearMap.of(self.source, self.target, self.shift, {d: m.scale(c) for d, m in self.blocks_items})

    def is_zero(self) -> bool:
        return not self.blocks_items

    def __matmul__(self, other: "GradedLinearMap") -> "GradedLinearMap":
        return glm_compose(self, other)


def glm_compose(f: GradedLinearMap, g: GradedLinearMap) -> GradedLinearMap:
    """``f ∘ g``; requires ``g.target`` to match ``f.source`` degreewise."""
    for d in set(f.source.degrees()) | set(g.target.degrees()):
        if f.source.dim(d) != g.target.dim(d):
            raise ShapeMismatch(f"composition mismatch at degree {d}")
    blocks = {}
    for d, m in g.blocks_items:
        blocks[d] = f.block(d + g.shift) @ m
    return GradedLinearMap.of(g.source, f.target, f.shift + g.shift, blocks)


# exterior algebra

@dataclass(frozen=True)
class ExteriorIndex:
    """Lexicographic enumeration of increasing ``k``-multi-indices in ``range(n)``."""

    n: int
    k: int

    def enumerate(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(itertools.combinations(range(self.n), self.k))

    def size(self) -> int:
        return comb(self.n, self.k)

    def position(self, idx: Tuple[int, ...]) -> int:
        return self.enumerate().index(tuple(idx))


def sort_sign(idx: Iterable[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    p = list(idx)
    if len(set(p)) < len(p):
        return 0, ()
    sign = 1
    for i in range(len(p)):
        for j in range(len(p) - 1 - i):
            if p[j] > p[j + 1]:
                p[j], p[j + 1] = p[j + 1], p[j]
                sign = -sign
    return sign, tuple(p)


@dataclass(frozen=True)
class ExteriorElement:
    """Element of the exterior algebra on ``n`` generators, ``{sorted index: coeff}``."""

    n: int
    terms_items: Tuple[Tuple[Tuple[int, ...], object], ...]

    @classmethod
    def of(cls, n: int, terms: Mapping[Tuple[int, ...], object]) -> "ExteriorElement":
        acc: Dict[Tuple[int, ...], object] = {}
        for idx, c in terms.items():
            if any(i < 0 or i >= n for i in idx):
                raise ValueError(f"index {idx} outside base dimension {n}")
            s, key = sort_sign(idx)
            if s:
                acc[key] = acc.get(key, ZERO) + s * q(c)
        return cls(n, tuple(sorted((k, v) for k, v in acc.items() if v)))

    @classmethod
    def generator(cls, n: int, i: int) -> "ExteriorElement":
        return cls.of(n, {(i,): 1})

    @property
    def terms(self) -> Dict[Tuple[int, ...], object]:
        return dict(self.terms_items)

    def __add__(self, other: "ExteriorElement") -> "ExteriorElement":
        if self.n != other.n:
            raise BaseMismatch("base dimensions differ")
        t = self.terms
        for k, v in other.terms_items:
            t[k] = t.get(k, ZERO) + v
        return ExteriorElement.of(self.n, t)

    def scale(self, c) -> "ExteriorElement":
        return ExteriorElement.of(self.n, {k: q(c) * v for k, v in self.terms_items})

    def grades(self) -> set:
        return {len(k) for k, _ in self.terms_items}

    def __xor__(self, other: "ExteriorElement") -> "ExteriorElement":
        return wedge(self, other)


def wedge(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    if a.n != b.n:
        raise BaseMismatch("base dimensions differ")
    acc: Dict[Tuple[int, ...], object] = {}
    for i, u in a.terms_items:
        for j, v in b.terms_items:
            s, key = sort_sign(i + j)
            if s:
                acc[key] = acc.get(key, ZERO) + s * u * v
    return ExteriorElement(a.n, tuple(sorted((k, v) for k, v in acc.items() if v)))
