"""Stokes data of the Laplace transform of a presentation, and back.

The filtered local system at infinity is read off from sections over closed
half-planes; ``L_<xi`` at ``theta`` is the space of sections over the closed
half-plane through ``xi`` with inner normal ``theta``.  On the circle it is a
cellular sheaf: constant between the directions where an exponent meets the
boundary line through ``xi``.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .exactplane import (Direction, GaussianRational, HalfPlane,
                         circular_sorted, crossing_directions, ccw_strictly_between,
                         interior_direction, is_anti_stokes, is_stokes,
                         stokes_directions)
from .linalg import (BlockStructure, LinAlgError, MatQ, Subspace, block_lu,
                     peel_factors)
from .presentation import Constr0Presentation, from_factors, total_monodromy, validate
from .transport import FarFrame, with_frame


class SplitFailure(ArithmeticError):
    kind = "SplitFailure"


class InvalidSubsheaf(ValueError):
    kind = "InvalidSubsheaf"


class BadDirection(ValueError):
    kind = "BadDirection"


def lower_direction(theta: Direction) -> Direction:
    """``theta - pi/2``: the order along it is the block order of Stokes data
    taken over the good interval centred at ``theta``."""
    return Direction(theta.y, -theta.x)


def require_generic(p: Constr0Presentation, theta: Direction):
    if is_stokes(theta, p.cfg) or is_anti_stokes(theta, p.cfg):
        raise BadDirection(f"direction {theta} is Stokes or anti-Stokes")


def nudged_anchor(p: Constr0Presentation, xi, theta: Direction) -> GaussianRational:
    """Anchor moved along ``theta`` by half the smallest positive gap, so that
    an exponent equal to ``xi`` leaves the closed half-plane."""
    xi = GaussianRational.of(xi)
    gaps = [g for g in ((c - xi).dot(theta) for c in p.exponents) if g > 0]
    gap = min(gaps) / 2 if gaps else mpq(1)
    return xi + theta.vector().scale(gap / (theta.x ** 2 + theta.y ** 2))


def stalk_halfplane(p: Constr0Presentation, xi, theta: Direction, strict: bool) -> HalfPlane:
    anchor = GaussianRational.of(xi) if strict else nudged_anchor(p, xi, theta)
    return HalfPlane(anchor, theta, True)


def filtration_stalk(p: Constr0Presentation, xi, theta: Direction, strict: bool = True) -> Subspace:
    """``L_<xi`` (or ``L_<=xi`` when not strict) at ``theta`` in the base fiber."""
    h = stalk_halfplane(p, xi, theta, strict)
    return with_frame(p, [h.anchor], lambda fr: fr.sections(h, fr.chart([theta])))


# the circle model ----------------------------------------------------------

@dataclass(frozen=True)
class ArcSubsheaf:
    """A subsheaf of the local system at infinity, cut open at ``base``.

    ``arcs[k]`` lives on the arc after ``jumps[k-1]`` (``arcs[0]`` starts at
    ``base``, ``arcs[-1]`` ends there); ``points[k]`` is the stalk at
    ``jumps[k]``.  Crossing ``base`` counterclockwise maps coordinates by
    ``wrap``."""

    ambient: int
    wrap: MatQ
    base: Direction
    jumps: tuple
    arcs: tuple
    points: tuple

    def check(self):
        m = len(self.jumps)
        if len(self.arcs) != m + 1 or len(self.points) != m:
            raise InvalidSubsheaf("arc/point counts do not match the jumps")
        for k, pt in enumerate(self.points):
            if not (pt <= self.arcs[k] and pt <= self.arcs[k + 1]):
                raise InvalidSubsheaf(f"point stalk {k + 1} is not contained in its arcs")
        if self.arcs[0] != self.arcs[-1].image(self.wrap):
            raise InvalidSubsheaf("arcs do not glue across the base direction")


def build_arc_subsheaf(p: Constr0Presentation, xi) -> ArcSubsheaf:
    xi = GaussianRational.of(xi)
    jumps = crossing_directions(xi, p.cfg)
    base = p.base_direction
    if base in jumps:
        after = [d for d in circular_sorted(jumps, base) if d != base]
        base = interior_direction(p.base_direction, after[0])
    jumps = circular_sorted(jumps, base)
    m = len(jumps)

    samples = []
    if m:
        samples = [interior_direction(base, jumps[0])]
        samples += [interior_direction(a, b) for a, b in zip(jumps, jumps[1:])]
        samples.append(interior_direction(jumps[-1], base))

    def run(fr: FarFrame):
        # directions in counterclockwise order from base: s0, j1, s1, ..., jm, sm
        walk = [base] + samples[:1] + [d for pair in zip(jumps, samples[1:]) for d in pair]
        charts = fr.charts_around(walk)
        g = charts[0]
        wrap = g.inverse() @ fr.transport(fr.loop(base)) @ g
        stalks = [fr.sections(HalfPlane(xi, d, True), c) for d, c in zip(walk[1:], charts[1:])]
        if m == 0:
            return ArcSubsheaf(p.N, wrap, base, (), (fr.sections(HalfPlane(xi, base, True), g),), ())
        arcs = tuple(stalks[0::2])
        points = tuple(stalks[1::2])
        return ArcSubsheaf(p.N, wrap, base, tuple(jumps), arcs, points)

    return with_frame(p, [xi], run)


@dataclass(frozen=True)
class CircleCohomology:
    c0_dim: int
    c1_dim: int
    h0: Subspace       # kernel of d inside C^0
    image: Subspace    # image of d inside C^1

    @property
    def h0_dim(self) -> int:
        return self.h0.dim

    @property
    def h1_dim(self) -> int:
        return self.c1_dim - self.image.dim


def _coords(space: Subspace, v, what: str):
    try:
        return space.coordinates(v)
    except LinAlgError:
        raise InvalidSubsheaf(f"{what} is not contained in its arc") from None


def circle_cohomology(a: ArcSubsheaf) -> CircleCohomology:
    """Cellular cohomology of the circle sheaf: vertices at the jumps, one
    edge per arc, the two arcs at ``base`` merged through ``wrap``."""
    m = len(a.jumps)
    winv = a.wrap.inverse()
    if m == 0:
        w = a.arcs[0]
        if w != w.image(a.wrap):
            raise InvalidSubsheaf("constant subsheaf is not preserved by the wrap")
        cols = []
        for b in w.basis:
            head = _coords(w, winv.apply(b), "wrapped section")
            tail = w.coordinates(b)
            cols.append(tuple(x - y for x, y in zip(head, tail)))
        d = MatQ.from_columns(cols, w.dim) if cols else MatQ.zeros(0, 0)
        return _finish(w.dim, w.dim, d)
    # edges: arcs[1..m-1] between consecutive jumps, then the merged arc
    edges = [(k, k + 1, a.arcs[k + 1]) for k in range(m - 1)]
    edges.append((m - 1, 0, a.arcs[m]))
    offsets, acc = [], 0
    for _, _, w in edges:
        offsets.append(acc)
        acc += w.dim
    c1 = acc
    cols = []
    for v, pt in enumerate(a.points):
        for b in pt.basis:
            col = [mpq(0)] * c1
            for e, (tail, head, w) in enumerate(edges):
                merged = e == len(edges) - 1
                if head == v:
                    vec = winv.apply(b) if merged else b
                    for i, x in enumerate(_coords(w, vec, f"point stalk {v + 1}")):
                        col[offsets[e] + i] += x
                if tail == v:
                    for i, x in enumerate(_coords(w, b, f"point stalk {v + 1}")):
                        col[offsets[e] + i] -= x
            cols.append(tuple(col))
    c0 = len(cols)
    d = MatQ.from_columns(cols, c1) if cols else MatQ.zeros(c1, 0)
    return _finish(c0, c1, d)


def _finish(c0: int, c1: int, d: MatQ) -> CircleCohomology:
    if c0 == 0:
        return CircleCohomology(0, c1, Subspace.zero(0), Subspace.zero(c1))
    if c1 == 0:
        return CircleCohomology(c0, 0, Subspace.full(c0), Subspace.zero(0))
    return CircleCohomology(c0, c1, Subspace.kernel(d), Subspace.column_span(d))


# splitting over the good interval ------------------------------------------

def sample_arcs(p: Constr0Presentation, theta: Direction):
    """The two end arcs of the good interval centred at ``theta`` that contain
    no Stokes direction: ``(start, first)`` and ``(last, end)``."""
    start, end = lower_direction(theta), -lower_direction(theta)
    inside = [d for d in circular_sorted(stokes_directions(p.cfg), start)
              if ccw_strictly_between(start, d, end)]
    if not inside:
        return (start, end), (start, end)
    return (start, inside[0]), (inside[-1], end)


def _interval_samples(p: Constr0Presentation, theta: Direction):
    (a0, a1), (e0, e1) = sample_arcs(p, theta)
    if a1 == -a0:
        return theta, theta
    return interior_direction(a0, a1), interior_direction(e0, e1)


def _within(fr: FarFrame, theta: Direction, other: Direction, g: MatQ) -> MatQ:
    # chart at ``other`` reached from ``theta`` without leaving the half
    # circle centred at ``theta``
    if other == theta:
        return g
    if ccw_strictly_between(theta, other, -theta):
        return fr.transport(fr.ccw_path([theta, other])) @ g
    return fr.transport(fr.ccw_path([other, theta]).reversed()) @ g


def _flags(p: Constr0Presentation, theta: Direction, fr: FarFrame, theta_a, theta_e):
    g = fr.chart([theta])
    to_a = _within(fr, theta, theta_a, g)
    to_e = _within(fr, theta, theta_e, g)
    asc, desc = [], []
    for c in p.exponents:
        asc.append(fr.sections(stalk_halfplane(p, c, theta_a, False), to_a))
        desc.append(fr.sections(stalk_halfplane(p, c, theta_e, False), to_e))
    return asc, desc


def good_interval_splitting(p: Constr0Presentation, theta: Direction,
                            samples=None) -> list[Subspace]:
    """The unique splitting ``V = V_1 + ... + V_n`` over the good interval
    centred at ``theta``, as subspaces of the base fiber (storage order).

    ``samples`` optionally overrides the two directions ``(theta_a,
    theta_e)`` at which the flags are read; they must lie in the end arcs
    given by ``sample_arcs``."""
    require_generic(p, theta)
    if samples is None:
        samples = _interval_samples(p, theta)
    else:
        samples = tuple(samples)
        for d, (lo, hi) in zip(samples, sample_arcs(p, theta)):
            if not ccw_strictly_between(lo, d, hi):
                raise BadDirection(f"sample direction {d} is not in the arc ({lo}, {hi})")
    return list(p.memo(("splitting", theta, samples),
                       lambda: tuple(_splitting(p, theta, *samples))))


def _splitting(p: Constr0Presentation, theta: Direction, theta_a, theta_e) -> list[Subspace]:
    anchors = []
    for c in p.exponents:
        anchors.append(nudged_anchor(p, c, theta_a))
        anchors.append(nudged_anchor(p, c, theta_e))

    def run(fr):
        asc, desc = _flags(p, theta, fr, theta_a, theta_e)
        return [a & b for a, b in zip(asc, desc)]

    parts = with_frame(p, anchors, run)
    for k, v in enumerate(parts):
        if v.dim != p.dims[k]:
            raise SplitFailure(f"graded piece {k + 1} has dimension {v.dim}, expected {p.dims[k]}")
    total = Subspace.zero(p.N)
    for v in parts:
        total = total + v
    if total.dim != p.N:
        raise SplitFailure("graded pieces are not transverse")
    return parts


# Stokes data ---------------------------------------------------------------

@dataclass(frozen=True)
class StokesData:
    """Stokes matrices over the good interval centred at ``direction``.

    Blocks follow ``exponents``, ascending along ``direction - pi/2``; the
    monodromy at infinity in the adapted basis is ``S @ Q``."""

    direction: Direction
    exponents: tuple
    dims: tuple
    S: MatQ
    Q: MatQ

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(GaussianRational.of(c) for c in self.exponents))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def blocks(self) -> BlockStructure:
        return BlockStructure(self.dims)

    def monodromy(self) -> MatQ:
        return self.S @ self.Q

    def check(self):
        b = self.blocks
        if self.S.shape != (b.total, b.total) or self.Q.shape != (b.total, b.total):
            raise ValueError("Stokes matrices do not match the block dimensions")
        if len(set(self.exponents)) != len(self.exponents) or len(self.exponents) != b.n:
            raise ValueError("exponents must be distinct, one per block")
        low = lower_direction(self.direction)
        keys = [c.dot(low) for c in self.exponents]
        if any(x >= y for x, y in zip(keys, keys[1:])):
            raise ValueError("exponents are not ordered along direction - pi/2")
        from .linalg import get_block
        for i in range(b.n):
            if not get_block(self.S, b, i, i).is_identity():
                raise ValueError("S must have identity diagonal blocks")
            if not get_block(self.Q, b, i, i).is_invertible():
                raise ValueError(f"Q_{i + 1}{i + 1} is singular")
            for j in range(b.n):
                if j < i and not get_block(self.S, b, i, j).is_zero():
                    raise ValueError("S must be block upper triangular")
                if j > i and not get_block(self.Q, b, i, j).is_zero():
                    raise ValueError("Q must be block lower triangular")


def stokes_order(p: Constr0Presentation, theta: Direction) -> list[int]:
    low = lower_direction(theta)
    return sorted(range(p.n), key=lambda i: p.exponents[i].dot(low))


def adapted_basis(parts, order) -> MatQ:
    cols = [b for k in order for b in parts[k].basis]
    return MatQ.from_columns(cols, parts[0].ambient)


def extract_stokes_data(p: Constr0Presentation, theta: Direction) -> StokesData:
    """Laplace transform of ``p`` as Stokes data in direction ``theta``."""
    validate(p)
    return p.memo(("stokes-data", theta), lambda: _extract(p, theta))


def _extract(p: Constr0Presentation, theta: Direction) -> StokesData:
    parts = good_interval_splitting(p, theta)
    order = stokes_order(p, theta)
    basis = adapted_basis(parts, order)
    t = basis.inverse() @ total_monodromy(p) @ basis
    dims = tuple(p.dims[k] for k in order)
    s, q = block_lu(t, BlockStructure(dims))
    return StokesData(theta, tuple(p.exponents[k] for k in order), dims, s, q)


def realize_presentation(d: StokesData, cut: Direction | None = None,
                         base: Direction | None = None) -> Constr0Presentation:
    """Inverse Laplace transform: peel ``S @ Q`` into monodromies around the
    exponents.  The default cuts point along ``-direction`` and the default
    base point lies in ``direction``."""
    d.check()
    cut = -d.direction if cut is None else cut
    base = d.direction if base is None else base
    u = cut.perp()
    keys = [c.dot(u) for c in d.exponents]
    if any(x >= y for x, y in zip(keys, keys[1:])):
        raise BadDirection("cut direction does not cross the cuts in block order")
    factors = peel_factors(d.monodromy(), d.blocks)
    out = from_factors(d.exponents, d.dims, factors, cut, base)
    validate(out)
    return out


def two_halfplane_dims(p: Constr0Presentation, xi, theta: Direction) -> tuple[int, int]:
    return (filtration_stalk(p, xi, theta).dim, filtration_stalk(p, xi, -theta).dim)

