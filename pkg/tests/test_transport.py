from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from conftest import instances
from stokeslab.exactplane import Direction, GaussianRational, HalfPlane, circular_sorted
from stokeslab.linalg import MatQ, Subspace
from stokeslab.presentation import elementary_matrix, total_monodromy
from stokeslab.transport import (DegeneratePath, Polyline, halfplane_sections,
                                 segment_crossings, transport_matrix, with_frame)

HALF = Fraction(1, 2)


def square_around(c, r):
    x, y = c
    return Polyline(((x - r, y - r), (x + r, y - r), (x + r, y + r), (x - r, y + r), (x - r, y - r)))


def test_crossings_examples(e2):
    assert segment_crossings(e2, Polyline(((-1, -1), (2, -1)))) == [(0, 1), (1, 1)]
    assert segment_crossings(e2, Polyline(((-1, 1), (2, 1)))) == []
    assert segment_crossings(e2, square_around((0, 0), HALF)) == [(0, 1)]
    assert segment_crossings(e2, square_around((0, 0), HALF).reversed()) == [(0, -1)]


def test_degenerate_paths(e2):
    with pytest.raises(DegeneratePath):
        segment_crossings(e2, Polyline(((-1, 0), (2, 0))))
    with pytest.raises(DegeneratePath):
        segment_crossings(e2, Polyline(((-1, -1), (0, -1))))


def test_transport_examples(e2):
    assert transport_matrix(e2, Polyline(((-1, 1), (2, 1)))).is_identity()
    assert transport_matrix(e2, square_around((0, 0), HALF)) == elementary_matrix(e2, 1)
    assert transport_matrix(e2, Polyline(((-1, -1), (2, -1)))) == MatQ([[7, 1], [15, 3]])


def test_halfplane_sections_examples(e2):
    both = HalfPlane(GaussianRational(2, 0), Direction(-1, 0))
    neither = HalfPlane(GaussianRational(2, 0), Direction(1, 0))
    left = HalfPlane(GaussianRational(HALF, 0), Direction(-1, 0))
    assert halfplane_sections(e2, both) == Subspace.zero(2)
    assert halfplane_sections(e2, neither) == Subspace.full(2)
    assert halfplane_sections(e2, left).dim == 1


def _big_loop(p):
    """A counterclockwise square far outside every exponent, starting far out
    in the base direction."""
    r = 4 + 4 * max(max(abs(c.re), abs(c.im)) for c in p.exponents)
    b = p.base_direction
    start = GaussianRational(b.x * r, b.y * r)
    side = r * (abs(b.x) + abs(b.y) + 1)
    corners = circular_sorted([Direction(1, 1), Direction(-1, 1), Direction(-1, -1), Direction(1, -1)], b)
    pts = [start] + [GaussianRational(d.x * side, d.y * side) for d in corners if d != b] + [start]
    return Polyline(pts)


@given(instances())
def test_big_loop_is_total_monodromy(p):
    try:
        m = transport_matrix(p, _big_loop(p))
    except DegeneratePath:
        assume(False)
    assert m == total_monodromy(p)


@given(instances(), st.integers(-3, 3), st.integers(-3, 3))
def test_small_loop_is_trivial(p, x, y):
    # a tiny square around a point at quarter-integer offset misses every exponent
    c = (Fraction(4 * x + 1, 4) + Fraction(1, 8), Fraction(4 * y + 1, 4) + Fraction(1, 8))
    try:
        m = transport_matrix(p, square_around(c, Fraction(1, 16)))
    except DegeneratePath:
        assume(False)
    assert m.is_identity()


points = st.tuples(st.integers(-9, 9), st.integers(-9, 9)).map(
    lambda v: GaussianRational(Fraction(v[0], 3) + Fraction(1, 7), Fraction(v[1], 3) + Fraction(1, 11)))


@given(instances(), points, points, points)
def test_concatenation_and_reversal(p, a, b, c):
    assume(a != b and b != c)
    try:
        ab = transport_matrix(p, Polyline((a, b)))
        bc = transport_matrix(p, Polyline((b, c)))
        abc = transport_matrix(p, Polyline((a, b, c)))
        ba = transport_matrix(p, Polyline((b, a)))
    except DegeneratePath:
        assume(False)
    assert abc == bc @ ab
    assert ba @ ab == MatQ.identity(p.N)


halfplanes = st.tuples(points, st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(
    lambda v: v != (0, 0))).map(lambda t: HalfPlane(t[0], Direction(*t[1])))


@given(instances(), halfplanes)
def test_section_dimension_formula(p, h):
    expected = sum(d for c, d in zip(p.exponents, p.dims) if not h.contains(c))
    assert halfplane_sections(p, h).dim == expected


@given(instances(), halfplanes, st.integers(1, 6))
def test_sections_monotone(p, h, shift):
    # pushing the anchor outward along the normal shrinks the half-plane
    inner = HalfPlane(h.anchor + h.normal.vector().scale(shift), h.normal)

    def run(fr):
        chart = fr.chart([h.normal])
        return fr.sections(h, chart), fr.sections(inner, chart)

    outer_sec, inner_sec = with_frame(p, [h.anchor, inner.anchor], run)
    assert outer_sec <= inner_sec
