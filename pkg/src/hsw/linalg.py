"""Exact rational matrices on top of sympy's ``DomainMatrix`` over QQ.

Matrices are stored as tuples of tuples of QQ elements so they are hashable
and immutable; the heavy lifting (row reduction, rank, kernels) is delegated
to ``DomainMatrix``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from sympy import QQ, Rational
from sympy.polys.matrices import DomainMatrix

Scalar = type(QQ(1))
ZERO = QQ(0)
ONE = QQ(1)

Mat = tuple  # tuple[tuple[Scalar, ...], ...] with an explicit column count


class ShapeMismatch(ValueError):
    """Raised when matrix or block shapes do not agree."""


def q(x) -> Scalar:
    """Coerce ints, Fractions, sympy Rationals and ``"p/q"`` strings to QQ."""
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return QQ(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, Rational):
        return QQ(int(x.p), int(x.q))
    if isinstance(x, str):
        f = Fraction(x.strip())
        return QQ(f.numerator, f.denominator)
    if isinstance(x, float):
        f = Fraction(x)
        return QQ(f.numerator, f.denominator)
    return QQ.convert(x)


def qstr(x: Scalar) -> str:
    return str(x)


class Matrix:
    """Immutable dense rational matrix with explicit shape (rows may be 0)."""

    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable], ncols: Optional[int] = None):
        rs = tuple(tuple(q(x) for x in r) for r in rows)
        if ncols is None:
            if not rs:
                raise ShapeMismatch("column count required for empty matrix")
            ncols = len(rs[0])
        for r in rs:
            if len(r) != ncols:
                raise ShapeMismatch("ragged rows")
        self.rows = rs
        self.nrows = len(rs)
        self.ncols = ncols
        self._hash = None

    @classmethod
    def _raw(cls, rows: tuple, nrows: int, ncols: int) -> "Matrix":
        m = object.__new__(cls)
        m.rows = rows
        m.nrows = nrows
        m.ncols = ncols
        m._hash = None
        return m

    # constructors
    @classmethod
    def zeros(cls, m: int, n: int) -> "Matrix":
        return cls._raw(tuple((ZERO,) * n for _ in range(m)), m, n)

    @classmethod
    def eye(cls, n: int) -> "Matrix":
        return cls._raw(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        cols = [tuple(q(x) for x in c) for c in cols]
        return cls._raw(tuple(tuple(c[i] for c in cols) for i in range(nrows)), nrows, len(cols))

    @classmethod
    def column(cls, vec: Sequence) -> "Matrix":
        return cls([[x] for x in vec], 1)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def cols(self) -> list:
        return [self.col(j) for j in range(self.ncols)]

    def T(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(self.rows[i][j] for i in range(self.nrows)) for j in range(self.ncols)), self.ncols, self.nrows)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self.rows))
        return self._hash

    def __repr__(self):
        return f"Matrix({[[str(x) for x in r] for r in self.rows]}, {self.ncols})"

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return Matrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.nrows, self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return Matrix._raw(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.nrows, self.ncols)

    def __neg__(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(-a for a in r) for r in self.rows), self.nrows, self.ncols)

    def scale(self, c) -> "Matrix":
        c = q(c)
        return Matrix._raw(tuple(tuple(c * a for a in r) for r in self.rows), self.nrows, self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        n = other.ncols
        orows = [[(j, b) for j, b in enumerate(r) if b] for r in other.rows]
        out = []
        for r in self.rows:
            acc = [ZERO] * n
            for k, a in enumerate(r):
                if a:
                    for j, b in orows[k]:
                        acc[j] += a * b
            out.append(tuple(acc))
        return Matrix._raw(tuple(out), self.nrows, n)

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.ncols:
            raise ShapeMismatch(f"{self.shape} applied to length {len(vec)}")
        nz = [(k, a) for k, a in enumerate(vec) if a]
        return tuple(sum((r[k] * a for k, a in nz), ZERO) for r in self.rows)

    def is_zero(self) -> bool:
        return all(not a for r in self.rows for a in r)

    def to_dm(self) -> DomainMatrix:
        return DomainMatrix([list(r) for r in self.rows], self.shape, QQ)

    @classmethod
    def from_dm(cls, dm: DomainMatrix) -> "Matrix":
        m, n = dm.shape
        rows = dm.to_list() if m else []
        return cls._raw(tuple(tuple(QQ.convert(x) for x in r) for r in rows), m, n)

    def to_lists(self) -> list:
        return [list(r) for r in self.rows]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(rows), len(cols))


def hstack(*ms: Matrix) -> Matrix:
    if not ms:
        raise ShapeMismatch("empty hstack")
    m = ms[0].nrows
    for x in ms:
        if x.nrows != m:
            raise ShapeMismatch("hstack row mismatch")
    return Matrix._raw(tuple(sum((x.rows[i] for x in ms), ()) for i in range(m)), m, sum(x.ncols for x in ms))


def vstack(*ms: Matrix) -> Matrix:
    if not ms:
        raise ShapeMismatch("empty vstack")
    n = ms[0].ncols
    for x in ms:
        if x.ncols != n:
            raise ShapeMismatch("vstack column mismatch")
    return Matrix._raw(sum((x.rows for x in ms), ()), sum(x.nrows for x in ms), n)


def block_diag(*ms: Matrix) -> Matrix:
    rows = []
    n = sum(x.ncols for x in ms)
    off = 0
    for x in ms:
        for r in x.rows:
            rows.append((ZERO,) * off + r + (ZERO,) * (n - off - x.ncols))
        off += x.ncols
    return Matrix._raw(tuple(rows), len(rows), n)


def rank(m: Matrix) -> int:
    if m.nrows == 0 or m.ncols == 0:
        return 0
    return m.to_dm().rank()


def rref(m: Matrix):
    """Reduced row echelon form and pivot columns."""
    if m.nrows == 0 or m.ncols == 0:
        return m, ()
    r, piv = m.to_dm().rref()
    return Matrix.from_dm(r), tuple(piv)


def kernel(m: Matrix) -> Matrix:
    """Column basis of the right kernel (ncols x k), deterministic."""
    n = m.ncols
    if n == 0:
        return Matrix.zeros(0, 0)
    if m.nrows == 0:
        return Matrix.eye(n)
    r, piv = rref(m)
    free = [j for j in range(n) if j not in piv]
    cols = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, p in enumerate(piv):
            v[p] = -r.rows[i][f]
        cols.append(v)
    return Matrix.from_columns(cols, n)


def image_basis(m: Matrix) -> Matrix:
    """Columns of ``m`` at pivot positions (a basis of the column space)."""
    _, piv = rref(m)
    return Matrix.from_columns([m.col(j) for j in piv], m.nrows)


def solve(a: Matrix, b: Matrix) -> Optional[Matrix]:
    """A particular solution X of ``a @ X = b`` or None if inconsistent."""
    if a.nrows != b.nrows:
        raise ShapeMismatch("solve row mismatch")
    n = a.ncols
    if b.ncols == 0:
        return Matrix.zeros(n, 0)
    if a.nrows == 0:
        return Matrix.zeros(n, b.ncols)
    aug = hstack(a, b)
    r, piv = rref(aug)
    if any(p >= n for p in piv):
        return None
    x = [[ZERO] * b.ncols for _ in range(n)]
    for i, p in enumerate(piv):
        for j in range(b.ncols):
            x[p][j] = r.rows[i][n + j]
    return Matrix(x, b.ncols)


def solve_vec(a: Matrix, b: Sequence) -> Optional[tuple]:
    x = solve(a, Matrix.column(b) if len(b) else Matrix.zeros(0, 1))
    return None if x is None else x.col(0)


def inverse(m: Matrix) -> Matrix:
    if m.nrows != m.ncols:
        raise ShapeMismatch("inverse of non-square matrix")
    if m.nrows == 0:
        return m
    return Matrix.from_dm(m.to_dm().inv())


def det(m: Matrix) -> Scalar:
    if m.nrows != m.ncols:
        raise ShapeMismatch("det of non-square matrix")
    if m.nrows == 0:
        return ONE
    return QQ.convert(m.to_dm().det())


def left_inverse(m: Matrix) -> Matrix:
    """Some L with L @ m = id, for m of full column rank."""
    k = m.ncols
    if k == 0:
        return Matrix.zeros(0, m.nrows)
    x = solve(m.T(), Matrix.eye(k))
    if x is None:
        raise ValueError("matrix does not have full column rank")
    return x.T()


def right_inverse(m: Matrix) -> Matrix:
    """Some S with m @ S = id, for m of full row rank."""
    x = solve(m, Matrix.eye(m.nrows))
    if x is None:
        raise ValueError("matrix does not have full row rank")
    return x


def intersect(a: Matrix, b: Matrix) -> Matrix:
    """Column basis of col(a) ∩ col(b)."""
    if a.ncols == 0 or b.ncols == 0:
        return Matrix.zeros(a.nrows, 0)
    k = kernel(hstack(a, -b))
    if k.ncols == 0:
        return Matrix.zeros(a.nrows, 0)
    top = k.submatrix(range(a.ncols), range(k.ncols))
    return image_basis(a @ top) if (a @ top).ncols else Matrix.zeros(a.nrows, 0)


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u: Sequence) -> tuple:
    return tuple(c * a for a in u)


def zero_vec(n: int) -> tuple:
    return (ZERO,) * n


def unit_vec(n: int, i: int) -> tuple:
    return tuple(ONE if k == i else ZERO for k in range(n))


# Sparse helpers for large, mostly-zero coboundary matrices.

def _sdm(entries: dict, nrows: int, ncols: int) -> DomainMatrix:
    rows = {}
    for (i, j), v in entries.items():
        if v:
            rows.setdefault(i, {})[j] = q(v)
    return DomainMatrix(rows, (nrows, ncols), QQ)


def sparse_rank(entries: dict, nrows: int, ncols: int) -> int:
    """Rank of the matrix given as ``{(i, j): value}``."""
    if nrows == 0 or ncols == 0:
        return 0
    return _sdm(entries, nrows, ncols).rank()


def sparse_kernel(entries: dict, nrows: int, ncols: int) -> Matrix:
    """Column basis of the right kernel of a sparse matrix (ncols x k)."""
    if ncols == 0:
        return Matrix.zeros(0, 0)
    if nrows == 0:
        return Matrix.eye(ncols)
    r, piv = _sdm(entries, nrows, ncols).rref()
    rows = r.to_sdm()
    free = [j for j in range(ncols) if j not in set(piv)]
    cols = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for i, p in enumerate(piv):
            v[p] = -rows.get(i, {}).get(f, ZERO)
        cols.append(v)
    return Matrix.from_columns(cols, ncols)


def to_entries(m: Matrix) -> dict:
    return {(i, j): v for i, row in enumerate(m.rows) for j, v in enumerate(row) if v}


def from_entries(entries: dict, nrows: int, ncols: int) -> Matrix:
    rows = [[ZERO] * ncols for _ in range(nrows)]
    for (i, j), v in entries.items():
        rows[i][j] = rows[i][j] + q(v)
    return Matrix(rows, ncols)
