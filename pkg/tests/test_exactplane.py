import math

import pytest
from hypothesis import given, strategies as st

from stokeslab.exactplane import (AngularInterval, Direction, ExponentConfig,
                                  GaussianRational, HalfPlane, IntervalKind, Order,
                                  Side, anti_stokes_directions, ccw_strictly_between,
                                  circular_sorted, classify_interval, cmp_order,
                                  crossing_directions, halfplane_side,
                                  interior_direction, stokes_directions)

small = st.integers(-6, 6)
directions = st.tuples(small, small).filter(lambda v: v != (0, 0)).map(lambda v: Direction(*v))
points = st.tuples(small, small).map(lambda v: GaussianRational(*v))
configs = st.lists(points, min_size=1, max_size=5, unique=True).map(ExponentConfig)


def angle(d):
    return math.atan2(d.y, d.x) % (2 * math.pi)


def D(x, y):
    return Direction(x, y)


# cmp_order

def test_cmp_order_examples():
    assert cmp_order(0, 1, D(1, 0)) is Order.LESS
    assert cmp_order((0, 1), 0, D(0, 1)) is Order.GREATER
    assert cmp_order((1, 1), (2, 2), D(1, -1)) is Order.ONLINE


@given(points, points, directions)
def test_cmp_order_antisymmetric(a, b, u):
    there, back = cmp_order(a, b, u), cmp_order(b, a, u)
    flip = {Order.LESS: Order.GREATER, Order.GREATER: Order.LESS, Order.ONLINE: Order.ONLINE}
    assert back is flip[there]


@given(points, points, directions, st.integers(1, 9))
def test_cmp_order_scale_invariant(a, b, u, k):
    assert cmp_order(a, b, Direction(u.x * k, u.y * k)) is cmp_order(a, b, u)


def test_direction_is_primitive():
    assert Direction(4, -6) == Direction(2, -3)
    with pytest.raises(ValueError):
        Direction(0, 0)
    assert Direction.parse("3/-1") == Direction(3, -1)
    assert str(Direction(-2, 4)) == "-1/2"


# Stokes, anti-Stokes and crossing directions

def test_stokes_directions_examples():
    assert set(stokes_directions(ExponentConfig([0, 1]))) == {D(0, 1), D(0, -1)}
    assert stokes_directions(ExponentConfig([(3, 4)])) == []
    got = set(stokes_directions(ExponentConfig([0, 1, (1, 1)])))
    assert got == {D(0, 1), D(0, -1), D(-1, 1), D(1, -1), D(1, 0), D(-1, 0)}


def test_anti_stokes_directions_examples():
    assert set(anti_stokes_directions(ExponentConfig([0, 1]))) == {D(1, 0), D(-1, 0)}
    assert anti_stokes_directions(ExponentConfig([5])) == []
    assert set(anti_stokes_directions(ExponentConfig([0, (0, 1)]))) == {D(0, 1), D(0, -1)}


def test_crossing_directions_examples():
    cfg = ExponentConfig([0, 1])
    assert set(crossing_directions(0, cfg)) == {D(0, 1), D(0, -1)}
    assert crossing_directions((2, 1), ExponentConfig([(2, 1)])) == []
    assert set(crossing_directions(2, cfg)) == {D(0, 1), D(0, -1)}


@given(configs)
def test_stokes_structure(cfg):
    st_dirs = stokes_directions(cfg)
    anti = anti_stokes_directions(cfg)
    n = len(cfg)
    assert len(st_dirs) <= n * (n - 1)
    for d in st_dirs:
        assert -d in st_dirs
    for d in anti:
        assert -d in anti
    for a, b in cfg.pairs():
        w = b - a
        s = [d for d in st_dirs if w.dot(d) == 0]
        t = [d for d in anti if w.cross(d) == 0]
        assert len(s) == 2 and len(t) == 2
        assert all(x.dotd(y) == 0 for x in s for y in t)


@given(configs)
def test_directions_circularly_sorted(cfg):
    dirs = stokes_directions(cfg)
    angles = [angle(d) for d in dirs]
    assert angles == sorted(angles)


@given(st.lists(directions, min_size=1, max_size=12), directions)
def test_circular_sorted_matches_atan2(dirs, origin):
    got = circular_sorted(dirs, origin)
    rel = [(angle(d) - angle(origin)) % (2 * math.pi) for d in got]
    assert rel == sorted(rel)
    assert set(got) == set(dirs)


# intervals

def test_classify_interval_examples():
    cfg = ExponentConfig([0, 1])
    assert classify_interval(AngularInterval(D(1, -1), D(1, 1)), cfg) is IntervalKind.SMALL
    assert classify_interval(AngularInterval(D(1, -1), D(-1, 1)), cfg) is IntervalKind.GOOD
    assert classify_interval(AngularInterval(D(100, 1), D(100, -1)), cfg) is IntervalKind.NEITHER


@given(configs, directions, directions, directions, directions)
def test_good_interval_subintervals_are_small(cfg, a, b, x, y):
    if a == b or x == y:
        return
    if classify_interval(AngularInterval(a, b), cfg) is not IntervalKind.GOOD:
        return
    inside = [d for d in (x, y) if d == a or d == b or ccw_strictly_between(a, d, b)]
    if len(inside) < 2:
        return
    lo, hi = (x, y) if x == a or y == b or ccw_strictly_between(a, x, y) else (y, x)
    assert classify_interval(AngularInterval(lo, hi), cfg) is not IntervalKind.NEITHER


def test_interior_direction_examples():
    assert interior_direction(D(1, 0), D(0, 1)) == D(1, 1)
    assert interior_direction(D(1, 0), D(-1, 0)) == D(0, 1)
    assert interior_direction(D(0, 1), D(0, -1)) == D(-1, 0)


@given(directions, directions)
def test_interior_direction_inside(a, b):
    if a == b:
        return
    d = interior_direction(a, b)
    assert ccw_strictly_between(a, d, b)
    # independent check with floating angles (small integer data)
    span = (angle(b) - angle(a)) % (2 * math.pi)
    off = (angle(d) - angle(a)) % (2 * math.pi)
    assert 0 < off < span


# half-planes

def test_halfplane_side_examples():
    h = HalfPlane(0, D(1, 0))
    assert halfplane_side(h, 1) is Side.INSIDE
    assert halfplane_side(h, 0) is Side.BOUNDARY
    assert halfplane_side(h, (-1, 1)) is Side.OUTSIDE
    assert h.contains(0) and not HalfPlane(0, D(1, 0), closed=False).contains(0)


@given(points, directions, points, small)
def test_halfplane_anchor_slides_along_boundary(anchor, u, x, t):
    moved = anchor + u.perp().vector().scale(t)
    assert halfplane_side(HalfPlane(anchor, u), x) is halfplane_side(HalfPlane(moved, u), x)
