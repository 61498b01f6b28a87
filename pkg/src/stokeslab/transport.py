"""Parallel transport along rational polylines and sections over closed
half-planes.

Crossing the cut of ``c_i`` with the cut on the left of travel is a
counterclockwise passage around ``c_i`` and applies ``elementary_matrix(i)``;
the opposite crossing applies its inverse.  Transport matrices act on chart
coordinates, the first crossing applied first.

Far points live on a large axis-parallel square centred at the centroid of
the exponents.  The base fiber ``V`` is the chart at the square point in
``base_direction``; a subspace attached to a direction ``theta`` is brought
to ``V`` along the counterclockwise arc of the square from the base point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from gmpy2 import mpq

from .exactplane import (Direction, GaussianRational, HalfPlane,
                         ccw_strictly_between, circular_sorted)
from .linalg import ONE, ZERO, MatQ, Subspace
from .presentation import Constr0Presentation


class DegeneratePath(ValueError):
    kind = "DegeneratePath"


@dataclass(frozen=True)
class Polyline:
    vertices: tuple

    def __post_init__(self):
        verts = tuple(GaussianRational.of(v) for v in self.vertices)
        if any(a == b for a, b in zip(verts, verts[1:])):
            raise DegeneratePath("consecutive polyline vertices coincide")
        object.__setattr__(self, "vertices", verts)

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])

    def __add__(self, other: "Polyline") -> "Polyline":
        if self.vertices[-1] != other.vertices[0]:
            raise ValueError("polylines do not join")
        return Polyline(self.vertices + other.vertices[1:])

    def segments(self):
        return zip(self.vertices, self.vertices[1:])


def segment_crossings(p: Constr0Presentation, polyline: Polyline) -> list[tuple[int, int]]:
    """Ordered ``(index, sign)`` crossings of cut rays along ``polyline``.

    A polyline may start or end at a singular point; the cut of that point
    is then ignored on the incident segment (the stalk there is invariant
    under its own monodromy)."""
    ux, uy = p.cut_direction.x, p.cut_direction.y
    exps = [(c.re, c.im) for c in p.exponents]
    verts = [(v.re, v.im) for v in polyline.vertices]
    last = len(verts) - 1
    for pos, (vx, vy) in enumerate(verts):
        for i, (cx, cy) in enumerate(exps):
            dx, dy = vx - cx, vy - cy
            if dx == 0 and dy == 0:
                if 0 < pos < last:
                    raise DegeneratePath("interior polyline vertex is a singular point")
            elif dx * uy - dy * ux == 0 and dx * ux + dy * uy > 0:
                raise DegeneratePath(f"polyline vertex lies on the cut of exponent {i + 1}")
    out = []
    for (ax, ay), (bx, by) in zip(verts, verts[1:]):
        wx, wy = bx - ax, by - ay
        ww = wx * wx + wy * wy
        cu = wx * uy - wy * ux  # = -cross(u, w)
        hits = []
        for i, (cx, cy) in enumerate(exps):
            px, py = cx - ax, cy - ay
            if (px == 0 and py == 0) or (cx == bx and cy == by):
                continue
            if wx * py - wy * px == 0 and 0 <= px * wx + py * wy <= ww:
                raise DegeneratePath(f"segment passes through exponent {i + 1}")
            if cu == 0:
                continue
            s = (px * uy - py * ux) / cu
            if not 0 < s < 1:
                continue
            # the crossing point lies on the cut ray, not behind c
            if (ax + wx * s - cx) * ux + (ay + wy * s - cy) * uy > 0:
                hits.append((s, i, 1 if cu < 0 else -1))
        hits.sort()
        out.extend((i, sgn) for _, i, sgn in hits)
    return out


def _apply_elementary(rows: list, e: MatQ, span: range) -> None:
    # rows <- e @ rows, where e is the identity outside block column ``span``
    block = [rows[j] for j in span]
    for i in range(len(rows)):
        coeffs = [(e.rows[i][j], b) for j, b in zip(span, block)]
        if i in span:
            rows[i] = tuple(sum((a * x[c] for a, x in coeffs if a), ZERO)
                            for c in range(len(block[0])))
        else:
            coeffs = [(a, x) for a, x in coeffs if a]
            if coeffs:
                r = rows[i]
                rows[i] = tuple(r[c] + sum((a * x[c] for a, x in coeffs), ZERO)
                                for c in range(len(r)))


def transport_rows(p: Constr0Presentation, polyline: Polyline, span: range) -> list[tuple]:
    """Rows ``span`` of ``transport_matrix(p, polyline)``, computed from the
    left so that only block columns of crossed exponents are touched."""
    n = p.N
    rows = [tuple(ONE if c == r else ZERO for c in range(n)) for r in span]
    for i, sgn in reversed(segment_crossings(p, polyline)):
        e = p.elementary[i] if sgn > 0 else p.elementary_inv[i]
        blk = p.blocks.span(i)
        col = [e.rows[r][blk.start:blk.stop] for r in range(n)]
        out = []
        for row in rows:
            nz = [(a, col[r]) for r, a in enumerate(row) if a]
            new = [sum((a * c[j] for a, c in nz if c[j]), ZERO) for j in range(len(blk))]
            out.append(row[:blk.start] + tuple(new) + row[blk.stop:])
        rows = out
    return rows


def transport_apply(p: Constr0Presentation, polyline: Polyline, m: MatQ) -> MatQ:
    """``transport_matrix(p, polyline) @ m`` without forming the transport."""
    rows = list(m.rows)
    for i, sgn in segment_crossings(p, polyline):
        e = p.elementary[i] if sgn > 0 else p.elementary_inv[i]
        _apply_elementary(rows, e, p.blocks.span(i))
    return MatQ._raw(tuple(rows), m.ncols)


def transport_matrix(p: Constr0Presentation, polyline: Polyline) -> MatQ:
    return transport_apply(p, polyline, MatQ.identity(p.N))


# far-square frames ---------------------------------------------------------

_CORNERS = (Direction(1, 1), Direction(-1, 1), Direction(-1, -1), Direction(1, -1))


def centroid(points) -> GaussianRational:
    points = list(points)
    n = len(points)
    return GaussianRational(sum((c.re for c in points), mpq(0)) / n,
                            sum((c.im for c in points), mpq(0)) / n)


class FarFrame:
    """A square around every exponent and anchor, large enough that the
    square point in any direction lies deep inside every closed half-plane
    whose anchor is one of ``anchors``."""

    def __init__(self, p: Constr0Presentation, anchors=(), attempt: int = 0, min_half=0):
        self.p = p
        # retries also shift the centre: a cut or exponent line through the
        # centroid is not escaped by scaling alone
        self.center = centroid(p.exponents) + GaussianRational(mpq(attempt, 7), mpq(attempt, 13))
        half = max(self._needed(list(p.exponents) + list(anchors)), self._base_ray_bound() + 1)
        self.half = max(half * (1 + attempt) + attempt, min_half)
        self._paths: dict = {}
        self._points: dict = {}
        self._arcs: dict = {}
        self._rows: dict = {}
        self._check_loop()

    def _needed(self, pts):
        return 1 + 2 * max((GaussianRational.of(x) - self.center).sup_norm() for x in pts)

    def covers(self, anchors) -> bool:
        return not anchors or self._needed(anchors) <= self.half

    def _base_ray_bound(self):
        # beyond this square size the radial base ray meets no cut
        p, b, u = self.p, self.p.base_direction, self.p.cut_direction
        m = max(abs(b.x), abs(b.y))
        bound = mpq(0)
        den = b.cross(u)
        if den == 0:
            return bound
        for c in p.exponents:
            d = c - self.center
            # center + s*b = c + t*u
            s = d.cross(u) / den
            t = d.cross(b) / den
            if s > 0 and t > 0:
                bound = max(bound, s * m)
        return bound

    def _check_loop(self):
        loop = self.loop(self.p.base_direction)
        cr = segment_crossings(self.p, loop)
        if [i for i, _ in cr] != list(self.p.crossing_order) or any(s < 0 for _, s in cr):
            raise DegeneratePath("square too small for a clean base loop")

    def point(self, d: Direction) -> GaussianRational:
        pt = self._points.get(d)
        if pt is None:
            m = max(abs(d.x), abs(d.y))
            pt = self._points[d] = self.center + d.vector().scale(self.half / m)
        return pt

    def arc(self, a: Direction, b: Direction) -> list[GaussianRational]:
        """Square points from ``a`` counterclockwise to ``b`` (a full turn
        when ``a == b``)."""
        key = (a, b)
        if key not in self._arcs:
            self._arcs[key] = self._arc(a, b)
        return list(self._arcs[key])

    def _arc(self, a: Direction, b: Direction) -> list[GaussianRational]:
        corners = circular_sorted(_CORNERS, a)
        pts = [self.point(a)]
        for c in corners:
            if c == a or c == b:
                continue
            if a == b or ccw_strictly_between(a, c, b):
                pts.append(self.point(c))
        pts.append(self.point(b))
        return pts

    def ccw_path(self, dirs: Sequence[Direction]) -> Polyline:
        """Square path through ``dirs``, each leg counterclockwise and
        shorter than a full turn; equal consecutive entries are skipped."""
        pts = [self.point(dirs[0])]
        for a, b in zip(dirs, dirs[1:]):
            if a == b:
                continue
            pts.extend(self.arc(a, b)[1:])
        return Polyline(_dedupe(pts))

    def loop(self, a: Direction) -> Polyline:
        return Polyline(_dedupe(self.arc(a, a)))

    def transport(self, path: Polyline) -> MatQ:
        key = path.vertices
        if key not in self._paths:
            if len(key) == 1:
                self._paths[key] = MatQ.identity(self.p.N)
            else:
                self._paths[key] = transport_matrix(self.p, path)
        return self._paths[key]

    def chart(self, dirs: Sequence[Direction]) -> MatQ:
        """Transport from the base point counterclockwise through ``dirs``."""
        return self.transport(self.ccw_path([self.p.base_direction, *dirs]))

    def charts_around(self, dirs: Sequence[Direction]) -> list[MatQ]:
        """``chart([d])`` for each of ``dirs``, listed counterclockwise from
        the base direction, computed incrementally."""
        out = []
        prev, m = self.p.base_direction, MatQ.identity(self.p.N)
        for d in dirs:
            if d != prev:
                m = transport_apply(self.p, Polyline(_dedupe(self.arc(prev, d))), m)
            out.append(m)
            prev = d
        return out

    def section_equations(self, h: HalfPlane, at: GaussianRational | None = None) -> MatQ:
        """Rows cutting out the sections over ``h`` inside the chart at
        ``at`` (default: the square point in the direction of the normal)."""
        p = self.p
        q = self.point(h.normal) if at is None else at
        if not h.contains(q) or h.level(q) == 0:
            raise DegeneratePath("reference point is not interior to the half-plane")
        rows = []
        for k, c in enumerate(p.exponents):
            if not h.contains(c):
                continue
            rows.extend(self._exponent_rows(q, k))
        return MatQ._raw(tuple(rows), p.N)

    def _exponent_rows(self, q: GaussianRational, k: int) -> list[tuple]:
        # rows of block k of the transport from q to c_k; shared by every
        # half-plane read at q
        key = (q, k)
        got = self._rows.get(key)
        if got is None:
            p = self.p
            try:
                got = transport_rows(p, Polyline((q, p.exponents[k])), p.blocks.span(k))
            except DegeneratePath as e:
                got = e
            self._rows[key] = got
        if isinstance(got, DegeneratePath):
            raise got
        return got

    def sections(self, h: HalfPlane, chart: MatQ) -> Subspace:
        """Sections over ``h`` in coordinates ``x`` whose value at the square
        point in the direction of the normal is ``chart @ x``.

        The reference point slides along the boundary direction (keeping its
        level) when a segment to an exponent would be degenerate."""
        base_pt = self.point(h.normal)
        side = h.normal.perp().vector()
        err = None
        for k in (0, 1, -1, 2, -2, 3, -3):
            q = base_pt + side.scale(k)
            try:
                eq = self.section_equations(h, q)
                if k:
                    chart = self.transport(Polyline((base_pt, q))) @ chart
            except DegeneratePath as e:
                err = e
                continue
            if eq.nrows == 0:
                return Subspace.full(self.p.N)
            return Subspace.kernel(eq @ chart)
        raise DegeneratePath(f"no usable reference point: {err}")


def _dedupe(pts):
    out = []
    for x in pts:
        if not out or out[-1] != x:
            out.append(x)
    return out


def with_frame(p: Constr0Presentation, anchors, fn: Callable[[FarFrame], object], attempts: int = 16):
    """Run ``fn`` on the first frame free of degeneracies.  The last frame
    that worked for ``p`` is tried first, so charts are shared between
    calls."""
    err = None
    cached = p._cache.get("frame")
    if cached is not None and cached.covers(anchors):
        try:
            return fn(cached)
        except DegeneratePath as e:
            err = e
    grow = cached.half if cached is not None else 0
    for k in range(attempts):
        try:
            frame = FarFrame(p, anchors, attempt=k, min_half=grow)
            out = fn(frame)
        except DegeneratePath as e:
            err = e
            continue
        p._cache["frame"] = frame
        return out
    raise DegeneratePath(f"no non-degenerate frame found: {err}")


def halfplane_sections(p: Constr0Presentation, h: HalfPlane) -> Subspace:
    """Sections of the sheaf over the closed half-plane ``h`` as a subspace
    of the base fiber."""
    if not h.closed:
        raise ValueError("sections are taken over closed half-planes")

    def run(frame: FarFrame):
        return frame.sections(h, frame.chart([h.normal]))

    return with_frame(p, [h.anchor], run)
