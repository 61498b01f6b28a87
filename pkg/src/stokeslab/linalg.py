"""Dense exact matrices over the rationals, canonical subspaces, and the two
block factorizations used to move between monodromy data and Stokes data."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .exactplane import Q, _MPQ

ZERO = mpq(0)
ONE = mpq(1)


class LinAlgError(Exception):
    pass


class DimensionMismatch(LinAlgError):
    pass


class SingularPivot(LinAlgError):
    """A diagonal block that must be inverted is singular."""


class MatQ:
    """Immutable dense rational matrix stored row-major."""

    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows, ncols: int | None = None):
        rows = tuple(tuple(v if type(v) is _MPQ else Q(v) for v in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionMismatch("ragged matrix")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols
        self._hash = None

    @classmethod
    def _raw(cls, rows, ncols):
        m = cls.__new__(cls)
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        m._hash = None
        return m

    @classmethod
    def identity(cls, n: int) -> "MatQ":
        return cls._raw(tuple(tuple(ONE if i == j else ZERO for j in range(n))
                              for i in range(n)), n)

    @classmethod
    def zeros(cls, r: int, c: int) -> "MatQ":
        return cls._raw(tuple((ZERO,) * c for _ in range(r)), c)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "MatQ":
        return cls._raw(tuple(tuple(c[i] for c in cols) for i in range(nrows)), len(cols))

    @property
    def shape(self):
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, MatQ) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self.rows))
        return self._hash

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(v) for v in r) + "]" for r in self.rows)
        return f"MatQ([{body}])"

    def tolist(self):
        return [list(r) for r in self.rows]

    def columns(self):
        return [tuple(r[j] for r in self.rows) for j in range(self.ncols)]

    def T(self) -> "MatQ":
        return MatQ._raw(tuple(zip(*self.rows)) if self.nrows else tuple(), self.nrows)

    def __add__(self, other: "MatQ") -> "MatQ":
        if self.shape != other.shape:
            raise DimensionMismatch("shape mismatch in addition")
        return MatQ._raw(tuple(tuple(a + b for a, b in zip(r, s))
                               for r, s in zip(self.rows, other.rows)), self.ncols)

    def __sub__(self, other: "MatQ") -> "MatQ":
        if self.shape != other.shape:
            raise DimensionMismatch("shape mismatch in subtraction")
        return MatQ._raw(tuple(tuple(a - b for a, b in zip(r, s))
                               for r, s in zip(self.rows, other.rows)), self.ncols)

    def __neg__(self):
        return MatQ._raw(tuple(tuple(-a for a in r) for r in self.rows), self.ncols)

    def scale(self, t) -> "MatQ":
        t = Q(t)
        return MatQ._raw(tuple(tuple(a * t for a in r) for r in self.rows), self.ncols)

    def __matmul__(self, other: "MatQ") -> "MatQ":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        orows = other.rows
        width = other.ncols
        out = []
        for r in self.rows:
            acc = [ZERO] * width
            for a, orow in zip(r, orows):
                if a:
                    for j, b in enumerate(orow):
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return MatQ._raw(tuple(out), width)

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), ZERO) for r in self.rows)

    def is_identity(self) -> bool:
        return self.nrows == self.ncols and self == MatQ.identity(self.nrows)

    def is_zero(self) -> bool:
        return all(not a for r in self.rows for a in r)

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "MatQ":
        return MatQ._raw(tuple(r[c0:c1] for r in self.rows[r0:r1]), c1 - c0)

    def select_rows(self, idx: Sequence[int]) -> "MatQ":
        return MatQ._raw(tuple(self.rows[i] for i in idx), self.ncols)

    def select_columns(self, idx: Sequence[int]) -> "MatQ":
        return MatQ._raw(tuple(tuple(r[j] for j in idx) for r in self.rows), len(idx))

    def stack(self, other: "MatQ") -> "MatQ":
        if self.ncols != other.ncols and self.nrows and other.nrows:
            raise DimensionMismatch("column counts differ")
        ncols = self.ncols if self.nrows else other.ncols
        return MatQ._raw(self.rows + other.rows, ncols)

    def rank(self) -> int:
        return len(rref(self.rows, self.ncols)[1])

    def det(self):
        if self.nrows != self.ncols:
            raise DimensionMismatch("determinant of a non-square matrix")
        a = [list(r) for r in self.rows]
        n = self.nrows
        d = ONE
        for k in range(n):
            p = next((i for i in range(k, n) if a[i][k]), None)
            if p is None:
                return ZERO
            if p != k:
                a[k], a[p] = a[p], a[k]
                d = -d
            piv = a[k][k]
            d *= piv
            for i in range(k + 1, n):
                f = a[i][k]
                if f:
                    f = f / piv
                    ri, rk = a[i], a[k]
                    for j in range(k + 1, n):
                        if rk[j]:
                            ri[j] -= f * rk[j]
        return d

    def inverse(self) -> "MatQ":
        n = self.nrows
        if n != self.ncols:
            raise DimensionMismatch("inverse of a non-square matrix")
        aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self.rows)]
        red, piv = rref(aug, 2 * n)
        if piv[:n] != list(range(n)) or len(piv) < n:
            raise SingularPivot("matrix is singular")
        return MatQ._raw(tuple(tuple(r[n:]) for r in red[:n]), n)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def nullspace(self) -> list[tuple]:
        """Basis of the right kernel, one vector per free column."""
        red, piv = rref(self.rows, self.ncols)
        pivset = set(piv)
        basis = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            v = [ZERO] * self.ncols
            v[f] = ONE
            for r, p in zip(red, piv):
                v[p] = -r[f]
            basis.append(tuple(v))
        return basis

    def solve(self, b: Sequence) -> tuple | None:
        """One solution of ``self @ x = b`` or None."""
        aug = [list(r) + [Q(bi)] for r, bi in zip(self.rows, b)]
        red, piv = rref(aug, self.ncols + 1)
        if piv and piv[-1] == self.ncols:
            return None
        x = [ZERO] * self.ncols
        for r, p in zip(red, piv):
            x[p] = r[-1]
        return tuple(x)


def rref(rows, ncols: int):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    a = [list(r) for r in rows]
    piv = []
    r = 0
    nrows = len(a)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        row = a[r]
        inv = ONE / row[c]
        if inv != ONE:
            row = [v * inv if v else v for v in row]
            a[r] = row
        nzc = [j for j in range(c, ncols) if row[j]]
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    ri = a[i]
                    for j in nzc:
                        ri[j] -= f * row[j]
        piv.append(c)
        r += 1
    return [tuple(x) for x in a[:r]], piv


# subspaces -----------------------------------------------------------------

class Subspace:
    """A subspace of Q^N, stored as the reduced row echelon form of a basis
    written as rows; equal subspaces have equal representations."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, vectors=()):
        vecs = [tuple(v if type(v) is _MPQ else Q(v) for v in vec) for vec in vectors]
        if any(len(v) != ambient for v in vecs):
            raise DimensionMismatch("vector length differs from ambient dimension")
        red, piv = rref(vecs, ambient)
        self.ambient = ambient
        self.basis = tuple(red)
        self.pivots = tuple(piv)

    @classmethod
    def _from_rref(cls, ambient, rows, piv):
        s = cls.__new__(cls)
        s.ambient, s.basis, s.pivots = ambient, tuple(rows), tuple(piv)
        return s

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls._from_rref(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls._from_rref(n, MatQ.identity(n).rows, range(n))

    @classmethod
    def coordinate(cls, n: int, indices) -> "Subspace":
        idx = sorted(set(indices))
        rows = [tuple(ONE if j == i else ZERO for j in range(n)) for i in idx]
        return cls._from_rref(n, rows, idx)

    @classmethod
    def column_span(cls, m: MatQ) -> "Subspace":
        return cls(m.nrows, m.columns())

    @classmethod
    def kernel(cls, m: MatQ) -> "Subspace":
        return cls(m.ncols, m.nullspace())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def __repr__(self):
        vecs = ", ".join("(" + ", ".join(str(v) for v in b) + ")" for b in self.basis)
        return f"Subspace({self.ambient}, [{vecs}])"

    def _check(self, other):
        if self.ambient != other.ambient:
            raise DimensionMismatch("subspaces live in different ambient spaces")

    def basis_matrix(self) -> MatQ:
        """Basis vectors as columns."""
        return MatQ.from_columns(self.basis, self.ambient)

    def _equations(self) -> list[tuple]:
        # a basis of the annihilator, read off the reduced basis directly
        n = self.ambient
        pivset = set(self.pivots)
        out = []
        for f in range(n):
            if f in pivset:
                continue
            v = [ZERO] * n
            v[f] = ONE
            for r, p in zip(self.basis, self.pivots):
                v[p] = -r[f]
            out.append(tuple(v))
        return out

    def annihilator(self) -> "Subspace":
        return Subspace(self.ambient, self._equations())

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace(self.ambient, self.basis + other.basis)

    def __and__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient)
        eqs = self._equations() + other._equations()
        if not eqs:
            return Subspace.full(self.ambient)
        return Subspace(self.ambient, MatQ._raw(tuple(eqs), self.ambient).nullspace())

    def contains_vector(self, v) -> bool:
        v = tuple(Q(x) for x in v)
        return Subspace(self.ambient, self.basis + (v,)).dim == self.dim

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return (self + other).dim == other.dim

    def image(self, m: MatQ) -> "Subspace":
        if m.ncols != self.ambient:
            raise DimensionMismatch("matrix does not act on this space")
        return Subspace(m.nrows, [m.apply(b) for b in self.basis])

    def preimage(self, m: MatQ) -> "Subspace":
        """``{x : m x in self}``."""
        if m.nrows != self.ambient:
            raise DimensionMismatch("matrix does not map into this space")
        ann = self._equations()
        if not ann:
            return Subspace.full(m.ncols)
        eqs = MatQ._raw(tuple(ann), self.ambient) @ m
        return Subspace(m.ncols, eqs.nullspace())

    def coordinates(self, v) -> tuple:
        """Coefficients of ``v`` in the canonical basis (``v`` must lie in self)."""
        coeffs = tuple(Q(v[p]) for p in self.pivots)
        recon = [sum((c * b[j] for c, b in zip(coeffs, self.basis)), ZERO)
                 for j in range(self.ambient)]
        if tuple(recon) != tuple(Q(x) for x in v):
            raise LinAlgError("vector is not in the subspace")
        return coeffs


def subspace_algebra(op: str, a: Subspace, b: Subspace, m: MatQ | None = None):
    """Dispatch for ``sum``, ``intersect``, ``equal`` and ``quotient_compare``."""
    a._check(b)
    if op == "sum":
        return a + b
    if op == "intersect":
        return a & b
    if op == "equal":
        return a == b
    if op == "quotient_compare":
        if m is None:
            raise ValueError("quotient_compare needs a modulus matrix")
        if m.nrows != a.ambient:
            raise DimensionMismatch("modulus lives in a different space")
        mod = Subspace.column_span(m)
        return (a + mod) == (b + mod)
    raise ValueError(f"unknown subspace operation {op!r}")


# block structures ----------------------------------------------------------

@dataclass(frozen=True)
class BlockStructure:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("block dimensions must be positive")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for d in self.dims:
            out.append(acc)
            acc += d
        return out

    def span(self, k: int) -> range:
        o = self.offsets()[k]
        return range(o, o + self.dims[k])

    def permuted(self, order: Sequence[int]) -> "BlockStructure":
        return BlockStructure(tuple(self.dims[k] for k in order))


def get_block(m: MatQ, b: BlockStructure, i: int, j: int) -> MatQ:
    ri, rj = b.span(i), b.span(j)
    return m.submatrix(ri.start, ri.stop, rj.start, rj.stop)


def assemble_blocks(blocks, b: BlockStructure) -> MatQ:
    """Full matrix from a nested list ``blocks[i][j]`` of MatQ (or None = 0)."""
    rows = []
    for i, di in enumerate(b.dims):
        for r in range(di):
            row = []
            for j, dj in enumerate(b.dims):
                blk = blocks[i][j]
                row.extend(blk.rows[r] if blk is not None else (ZERO,) * dj)
            rows.append(tuple(row))
    return MatQ._raw(tuple(rows), b.total)


def block_permutation(b: BlockStructure, order: Sequence[int]) -> MatQ:
    """Permutation P with (P^-1 M P) listing the blocks of M in ``order``."""
    cols = []
    n = b.total
    for k in order:
        for idx in b.span(k):
            cols.append(tuple(ONE if r == idx else ZERO for r in range(n)))
    return MatQ.from_columns(cols, n)


def _check_square(t: MatQ, b: BlockStructure):
    if t.nrows != t.ncols or t.nrows != b.total:
        raise DimensionMismatch("matrix size does not match the block structure")


def block_lu(t: MatQ, b: BlockStructure) -> tuple[MatQ, MatQ]:
    """Factor ``t = S @ Q`` with S block upper unitriangular and Q block lower
    triangular.  Peels the trailing block: its pivot must be invertible."""
    _check_square(t, b)
    n = b.n
    s_blocks = [[None] * n for _ in range(n)]
    q_blocks = [[None] * n for _ in range(n)]
    cur = t
    for k in range(n - 1, -1, -1):
        sub = BlockStructure(b.dims[:k + 1])
        d = get_block(cur, sub, k, k)
        try:
            d_inv = d.inverse()
        except SingularPivot:
            raise SingularPivot(f"trailing pivot block {k} is singular") from None
        q_blocks[k][k] = d
        s_blocks[k][k] = MatQ.identity(b.dims[k])
        for j in range(k):
            q_blocks[k][j] = get_block(cur, sub, k, j)
        if k == 0:
            break
        head = BlockStructure(b.dims[:k])
        m = head.total
        upper_right = cur.submatrix(0, m, m, cur.ncols)
        lower_left = cur.submatrix(m, cur.nrows, 0, m)
        s_col = upper_right @ d_inv
        for i in range(k):
            ri = head.span(i)
            s_blocks[i][k] = s_col.submatrix(ri.start, ri.stop, 0, s_col.ncols)
        cur = cur.submatrix(0, m, 0, m) - s_col @ lower_left
    return assemble_blocks(s_blocks, b), assemble_blocks(q_blocks, b)


def elementary_from_column(col: MatQ, b: BlockStructure, k: int) -> MatQ:
    """Identity except block column ``k``, which is replaced by ``col``."""
    n = b.total
    span = b.span(k)
    rows = []
    for r in range(n):
        row = [ONE if r == c else ZERO for c in range(n)]
        for jj, c in enumerate(span):
            row[c] = col.rows[r][jj]
        rows.append(tuple(row))
    return MatQ._raw(tuple(rows), n)


def elementary_inverse(e: MatQ, b: BlockStructure, k: int) -> MatQ:
    """Inverse of a matrix that is the identity outside block column ``k``."""
    span = b.span(k)
    tkk = e.submatrix(span.start, span.stop, span.start, span.stop)
    tkk_inv = tkk.inverse()
    col = e.submatrix(0, e.nrows, span.start, span.stop)
    new_rows = []
    for r in range(e.nrows):
        if r in span:
            new_rows.append(tkk_inv.rows[r - span.start])
        else:
            blk = MatQ._raw((col.rows[r],), len(span)) @ tkk_inv
            new_rows.append(tuple(-v for v in blk.rows[0]))
    return elementary_from_column(MatQ._raw(tuple(new_rows), len(span)), b, k)


def peel_factors(t: MatQ, b: BlockStructure) -> list[MatQ]:
    """Factors ``[T_1, ..., T_n]`` with ``t = T_n @ ... @ T_1`` and each
    ``T_k`` the identity outside block column ``k``."""
    _check_square(t, b)
    factors = [None] * b.n
    cur = t
    for k in range(b.n - 1, -1, -1):
        span = b.span(k)
        col = cur.submatrix(0, cur.nrows, span.start, span.stop)
        tk = elementary_from_column(col, b, k)
        if k == 0:
            factors[0] = tk
            break
        try:
            inv = elementary_inverse(tk, b, k)
        except SingularPivot:
            raise SingularPivot(f"diagonal block {k} is singular") from None
        factors[k] = tk
        cur = inv @ cur
    if not get_block(factors[0], b, 0, 0).is_invertible():
        raise SingularPivot("diagonal block 0 is singular")
    return factors


def multiply_all(mats: Sequence[MatQ], n: int) -> MatQ:
    """``mats[-1] @ ... @ mats[0]`` (first element applied first)."""
    out = MatQ.identity(n)
    for m in mats:
        out = m @ out
    return out


# similarity ----------------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def invariant_factors(a: MatQ) -> tuple:
    """Invariant factors of ``a`` over Q[x] as tuples of monic coefficients
    (highest degree first); equal tuples iff the rational canonical forms
    coincide."""
    import sympy
    from sympy.matrices.normalforms import invariant_factors as _inv

    x = sympy.Symbol("x")
    n = a.nrows
    m = sympy.Matrix(n, n, lambda i, j: sympy.Rational(int(a[i, j].numerator), int(a[i, j].denominator)))
    char = x * sympy.eye(n) - m
    out = []
    for f in _inv(char, domain=sympy.QQ[x]):
        p = sympy.Poly(f, x, domain=sympy.QQ)
        if p.degree() <= 0:
            continue
        p = p.monic()
        out.append(tuple(str(c) for c in p.all_coeffs()))
    return tuple(out)


def rational_canonical_form(a: MatQ) -> MatQ:
    """Block diagonal matrix of companion matrices of the invariant factors."""
    blocks = []
    for coeffs in invariant_factors(a):
        cs = [Q(c) for c in coeffs]
        deg = len(cs) - 1
        comp = [[ZERO] * deg for _ in range(deg)]
        for i in range(1, deg):
            comp[i][i - 1] = ONE
        for i in range(deg):
            comp[i][deg - 1] = -cs[deg - i]
        blocks.append(MatQ(comp))
    if not blocks:
        return MatQ.zeros(0, 0)
    b = BlockStructure(tuple(m.nrows for m in blocks))
    grid = [[blocks[i] if i == j else None for j in range(b.n)] for i in range(b.n)]
    return assemble_blocks(grid, b)


def _intertwiner_rank(a: MatQ, b: MatQ) -> int:
    # rank of X -> a X - X b on n x n matrices, X flattened row-major
    n = a.nrows
    rows = []
    for i in range(n):
        for j in range(n):
            row = [ZERO] * (n * n)
            for k in range(n):
                if a.rows[i][k]:
                    row[k * n + j] += a.rows[i][k]
                if b.rows[k][j]:
                    row[i * n + k] -= b.rows[k][j]
            rows.append(row)
    return len(rref(rows, n * n)[1])


def similar(a: MatQ, b: MatQ) -> bool:
    """Similarity over Q.  Two square matrices are similar exactly when the
    spaces of solutions of ``AX = XA``, ``AX = XB`` and ``BX = XB`` have the
    same dimension (Byrnes-Gauger)."""
    if a.shape != b.shape or a.nrows != a.ncols:
        return False
    if a == b or a.nrows == 1:
        return a == b
    r = _intertwiner_rank(a, b)
    return r == _intertwiner_rank(a, a) == _intertwiner_rank(b, b)
