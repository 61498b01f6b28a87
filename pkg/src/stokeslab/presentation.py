"""Constructible sheaves on C with vanishing cohomology, presented by their
vanishing-cycle blocks.

The generic stalk is ``V = U_1 + ... + U_n`` (coordinates in block order).
Each singular point ``c_i`` carries a branch cut, the ray from ``c_i`` in
``cut_direction``; off the cuts ``V`` is a global chart of the local system,
and crossing the cut of ``c_k`` counterclockwise around ``c_k`` acts on chart
coordinates by the matrix that is the identity except for block column
``k``, whose blocks are ``T_jk``.  The stalk at ``c_i`` is the coordinate
subspace obtained by dropping ``U_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .exactplane import (Direction, ExponentConfig, GaussianRational,
                         is_anti_stokes, is_stokes)
from .linalg import (BlockStructure, MatQ, Subspace, assemble_blocks,
                     elementary_inverse, multiply_all)


class PresentationError(ValueError):
    kind = "InvalidPresentation"


class DuplicateExponent(PresentationError):
    kind = "DuplicateExponent"


class SingularDiagonalBlock(PresentationError):
    kind = "SingularDiagonalBlock"


class ShapeMismatch(PresentationError):
    kind = "ShapeMismatch"


class BadReferenceDirection(PresentationError):
    kind = "BadReferenceDirection"


@dataclass(frozen=True, eq=False)
class Constr0Presentation:
    exponents: tuple
    dims: tuple
    maps: tuple  # maps[i][j] is T_ij of shape d_i x d_j
    cut_direction: Direction
    base_direction: Direction
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "exponents",
                           tuple(GaussianRational.of(c) for c in self.exponents))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "maps", tuple(
            tuple(m if isinstance(m, MatQ) else MatQ(m, None if m else 0) for m in row)
            for row in self.maps))

    def __eq__(self, other):
        return (isinstance(other, Constr0Presentation)
                and self.exponents == other.exponents and self.dims == other.dims
                and self.maps == other.maps and self.cut_direction == other.cut_direction
                and self.base_direction == other.base_direction)

    def __hash__(self):
        return hash((self.exponents, self.dims, self.maps))

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def N(self) -> int:
        return sum(self.dims)

    @cached_property
    def blocks(self) -> BlockStructure:
        return BlockStructure(self.dims)

    @cached_property
    def cfg(self) -> ExponentConfig:
        return ExponentConfig(self.exponents)

    def T(self, i: int, j: int) -> MatQ:
        return self.maps[i][j]

    def index_of(self, xi) -> int | None:
        xi = GaussianRational.of(xi)
        for i, c in enumerate(self.exponents):
            if c == xi:
                return i
        return None

    @cached_property
    def elementary(self) -> tuple:
        return tuple(_elementary(self, k) for k in range(self.n))

    @cached_property
    def elementary_inv(self) -> tuple:
        return tuple(elementary_inverse(e, self.blocks, k)
                     for k, e in enumerate(self.elementary))

    @cached_property
    def crossing_order(self) -> tuple:
        """Order in which a large counterclockwise loop crosses the cuts."""
        u = self.cut_direction.perp()
        return tuple(sorted(range(self.n), key=lambda i: self.exponents[i].dot(u)))

    def memo(self, key, compute):
        """Cache a derived value on this (immutable) presentation."""
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def permuted(self, order) -> "Constr0Presentation":
        """The same data with blocks listed in ``order``."""
        order = list(order)
        return Constr0Presentation(
            tuple(self.exponents[k] for k in order),
            tuple(self.dims[k] for k in order),
            tuple(tuple(self.maps[i][j] for j in order) for i in order),
            self.cut_direction, self.base_direction)


def _elementary(p: Constr0Presentation, k: int) -> MatQ:
    grid = [[None] * p.n for _ in range(p.n)]
    for i in range(p.n):
        grid[i][i] = MatQ.identity(p.dims[i])
        grid[i][k] = p.maps[i][k]
    return assemble_blocks(grid, p.blocks)


def validate(p: Constr0Presentation) -> None:
    """Raise a PresentationError subclass if ``p`` is not a valid presentation."""
    n = p.n
    if n == 0:
        raise ShapeMismatch("at least one singular point is required")
    if len(set(p.exponents)) != n:
        raise DuplicateExponent("exponents must be pairwise distinct")
    if len(p.dims) != n or any(d < 1 for d in p.dims):
        raise ShapeMismatch("one positive block dimension per exponent is required")
    if len(p.maps) != n or any(len(row) != n for row in p.maps):
        raise ShapeMismatch("maps must form an n x n grid")
    for i in range(n):
        for j in range(n):
            if p.maps[i][j].shape != (p.dims[i], p.dims[j]):
                raise ShapeMismatch(f"T_{i + 1}{j + 1} has shape {p.maps[i][j].shape}, "
                                    f"expected {(p.dims[i], p.dims[j])}")
    for i in range(n):
        if not p.maps[i][i].is_invertible():
            raise SingularDiagonalBlock(f"T_{i + 1}{i + 1} is not invertible")
    cfg = p.cfg
    if is_anti_stokes(p.cut_direction, cfg):
        raise BadReferenceDirection("cut direction is anti-Stokes: cuts would overlap")
    if is_stokes(p.base_direction, cfg) or is_anti_stokes(p.base_direction, cfg):
        raise BadReferenceDirection("base direction is Stokes or anti-Stokes")
    if p.base_direction == p.cut_direction:
        raise BadReferenceDirection("base direction coincides with the cut direction")


def elementary_matrix(p: Constr0Presentation, k: int) -> MatQ:
    """Monodromy around ``c_k`` (numbered from 1) in the chart of ``p``."""
    if not 1 <= k <= p.n:
        raise IndexError(f"exponent index {k} out of range 1..{p.n}")
    return p.elementary[k - 1]


def total_monodromy(p: Constr0Presentation) -> MatQ:
    """Monodromy of a large counterclockwise loop: the elementary matrices
    multiplied in cut-crossing order, the first crossed acting first."""
    return multiply_all([p.elementary[k] for k in p.crossing_order], p.N)


def stalk(p: Constr0Presentation, xi) -> Subspace:
    i = p.index_of(xi)
    if i is None:
        return Subspace.full(p.N)
    keep = [c for k in range(p.n) if k != i for c in p.blocks.span(k)]
    return Subspace.coordinate(p.N, keep)


def trivial_presentation(exponents, dims, cut: Direction, base: Direction) -> Constr0Presentation:
    n = len(dims)
    maps = tuple(tuple(MatQ.identity(dims[i]) if i == j else MatQ.zeros(dims[i], dims[j])
                       for j in range(n)) for i in range(n))
    return Constr0Presentation(tuple(exponents), tuple(dims), maps, cut, base)


def from_factors(exponents, dims, factors, cut: Direction, base: Direction) -> Constr0Presentation:
    """Read ``T_ij`` off elementary factors (factor ``k`` carries column ``k``)."""
    b = BlockStructure(tuple(dims))
    n = b.n
    maps = []
    for i in range(n):
        ri = b.span(i)
        row = []
        for j in range(n):
            rj = b.span(j)
            row.append(factors[j].submatrix(ri.start, ri.stop, rj.start, rj.stop))
        maps.append(tuple(row))
    return Constr0Presentation(tuple(exponents), tuple(dims), tuple(maps), cut, base)
