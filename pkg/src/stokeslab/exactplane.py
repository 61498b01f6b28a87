"""Exact planar predicates over the rationals.

Points of the plane are Gaussian rationals, directions on the circle are
primitive integer vectors.  No angle is ever materialized as a number: the
sign of ``Re(w * exp(-i*theta))`` is the sign of ``dot(w, u)`` for the
direction ``u`` standing for ``exp(i*theta)``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpq


_MPQ = type(mpq(0))


def Q(value, den=1):
    """Coerce ints, strings ("p/q"), Fractions and mpq to mpq."""
    if isinstance(value, str):
        if "/" in value:
            p, q = value.split("/")
            return mpq(int(p), int(q)) / den
        return mpq(int(value)) / den
    if den == 1:
        return mpq(value)
    return mpq(value) / den


@dataclass(frozen=True)
class GaussianRational:
    re: mpq
    im: mpq

    def __post_init__(self):
        if type(self.re) is not _MPQ:
            object.__setattr__(self, "re", Q(self.re))
        if type(self.im) is not _MPQ:
            object.__setattr__(self, "im", Q(self.im))

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex numbers are not exact")
        if isinstance(value, (tuple, list)):
            return cls(value[0], value[1])
        return cls(value, 0)

    def __add__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.of(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def scale(self, t) -> "GaussianRational":
        return GaussianRational(self.re * t, self.im * t)

    def dot(self, other) -> mpq:
        if isinstance(other, Direction):
            return self.re * other.x + self.im * other.y
        return self.re * other.re + self.im * other.im

    def cross(self, other) -> mpq:
        if isinstance(other, Direction):
            return self.re * other.y - self.im * other.x
        return self.re * other.im - self.im * other.re

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def sup_norm(self) -> mpq:
        return max(abs(self.re), abs(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _primitive(x: int, y: int) -> tuple[int, int]:
    g = math.gcd(x, y)
    return x // g, y // g


@dataclass(frozen=True)
class Direction:
    """A ray direction ``(x, y)`` with ``gcd(|x|, |y|) == 1``."""

    x: int
    y: int

    def __post_init__(self):
        x, y = int(self.x), int(self.y)
        if x == 0 and y == 0:
            raise ValueError("direction must be nonzero")
        x, y = _primitive(x, y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_vector(cls, vx, vy) -> "Direction":
        """Primitive direction of a rational vector."""
        vx, vy = Q(vx), Q(vy)
        den = math.lcm(int(vx.denominator), int(vy.denominator))
        return cls(int(vx * den), int(vy * den))

    @classmethod
    def parse(cls, text: str) -> "Direction":
        x, y = text.split("/")
        return cls(int(x), int(y))

    def __neg__(self):
        return Direction(-self.x, -self.y)

    def perp(self) -> "Direction":
        """Rotation by +90 degrees."""
        return Direction(-self.y, self.x)

    def vector(self) -> GaussianRational:
        return GaussianRational(self.x, self.y)

    def cross(self, other: "Direction") -> int:
        return self.x * other.y - self.y * other.x

    def dotd(self, other: "Direction") -> int:
        return self.x * other.x + self.y * other.y

    def __str__(self):
        return f"{self.x}/{self.y}"


class Order(enum.Enum):
    LESS = "Less"
    ONLINE = "OnLine"
    GREATER = "Greater"


class IntervalKind(enum.Enum):
    GOOD = "Good"
    SMALL = "Small"
    NEITHER = "Neither"


class Side(enum.Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def cmp_order(a, b, u: Direction) -> Order:
    """Compare ``a`` and ``b`` along ``u``: LESS means ``a <_u b``."""
    d = (GaussianRational.of(b) - GaussianRational.of(a)).dot(u)
    if d > 0:
        return Order.LESS
    if d < 0:
        return Order.GREATER
    return Order.ONLINE


# circular order ------------------------------------------------------------

def _half(x, y) -> int:
    return 0 if (y > 0 or (y == 0 and x > 0)) else 1


def _angle_cmp(p, q) -> int:
    hp, hq = _half(*p), _half(*q)
    if hp != hq:
        return hp - hq
    c = p[0] * q[1] - p[1] * q[0]
    return -_sign(c)


def _relative(d: Direction, origin: Direction):
    # d rotated by -angle(origin), up to a positive scale
    return (d.x * origin.x + d.y * origin.y, origin.x * d.y - origin.y * d.x)


def angle_key(origin: Direction | None = None):
    """Sort key ordering directions counterclockwise starting at ``origin``
    (inclusive); the default origin is the positive real axis."""
    origin = origin or Direction(1, 0)
    return functools.cmp_to_key(
        lambda a, b: _angle_cmp(_relative(a, origin), _relative(b, origin)))


def circular_sorted(dirs: Iterable[Direction], origin: Direction | None = None) -> list[Direction]:
    return sorted(set(dirs), key=angle_key(origin))


def ccw_strictly_between(a: Direction, d: Direction, b: Direction) -> bool:
    """True iff ``d`` lies in the open counterclockwise arc from ``a`` to ``b``."""
    if d == a or d == b:
        return False
    if a == b:
        return True
    return _angle_cmp(_relative(d, a), _relative(b, a)) < 0


# exponent configurations ---------------------------------------------------

@dataclass(frozen=True)
class ExponentConfig:
    exponents: tuple

    def __post_init__(self):
        exps = tuple(GaussianRational.of(c) for c in self.exponents)
        if not exps:
            raise ValueError("at least one exponent is required")
        if len(set(exps)) != len(exps):
            raise ValueError("exponents must be pairwise distinct")
        object.__setattr__(self, "exponents", exps)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def pairs(self):
        exps = self.exponents
        for i in range(len(exps)):
            for j in range(i + 1, len(exps)):
                yield exps[i], exps[j]


def _perpendiculars(w: GaussianRational) -> tuple[Direction, Direction]:
    d = Direction.from_vector(w.re, w.im).perp()
    return d, -d


def _parallels(w: GaussianRational) -> tuple[Direction, Direction]:
    d = Direction.from_vector(w.re, w.im)
    return d, -d


def stokes_directions(cfg: ExponentConfig) -> list[Direction]:
    out = set()
    for a, b in cfg.pairs():
        out.update(_perpendiculars(b - a))
    return circular_sorted(out)


def anti_stokes_directions(cfg: ExponentConfig) -> list[Direction]:
    out = set()
    for a, b in cfg.pairs():
        out.update(_parallels(b - a))
    return circular_sorted(out)


def crossing_directions(xi, cfg: ExponentConfig) -> list[Direction]:
    """Directions ``u`` at which some exponent other than ``xi`` lies on the
    line through ``xi`` normal to ``u``."""
    xi = GaussianRational.of(xi)
    out = set()
    for c in cfg:
        if c != xi:
            out.update(_perpendiculars(c - xi))
    return circular_sorted(out)


def is_stokes(u: Direction, cfg: ExponentConfig) -> bool:
    return any((b - a).dot(u) == 0 for a, b in cfg.pairs())


def is_anti_stokes(u: Direction, cfg: ExponentConfig) -> bool:
    return any((b - a).cross(u) == 0 for a, b in cfg.pairs())


@dataclass(frozen=True)
class AngularInterval:
    """Open counterclockwise arc from ``start`` to ``end``."""

    start: Direction
    end: Direction

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("degenerate interval")

    def __contains__(self, d: Direction) -> bool:
        return ccw_strictly_between(self.start, d, self.end)


def classify_interval(interval: AngularInterval, cfg: ExponentConfig) -> IntervalKind:
    good = True
    for a, b in cfg.pairs():
        hits = sum(d in interval for d in _perpendiculars(b - a))
        if hits > 1:
            return IntervalKind.NEITHER
        good = good and hits == 1
    return IntervalKind.GOOD if good else IntervalKind.SMALL


def interior_direction(a: Direction, b: Direction) -> Direction:
    """A deterministic direction strictly inside the counterclockwise arc
    ``(a, b)``."""
    if a == b:
        raise ValueError("empty arc")
    c = a.cross(b)
    if c > 0:
        return Direction(a.x + b.x, a.y + b.y)
    if c == 0:
        return a.perp()
    return Direction(-(a.x + b.x), -(a.y + b.y))


@dataclass(frozen=True)
class HalfPlane:
    anchor: GaussianRational
    normal: Direction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "anchor", GaussianRational.of(self.anchor))

    def level(self, x) -> mpq:
        return (GaussianRational.of(x) - self.anchor).dot(self.normal)

    def contains(self, x) -> bool:
        s = self.level(x)
        return s > 0 or (s == 0 and self.closed)


def halfplane_side(h: HalfPlane, x) -> Side:
    s = h.level(x)
    if s > 0:
        return Side.INSIDE
    if s < 0:
        return Side.OUTSIDE
    return Side.BOUNDARY


def sorted_by_direction(points: Sequence[GaussianRational], u: Direction) -> list[int]:
    """Indices of ``points`` sorted ascending by ``dot(point, u)``."""
    return sorted(range(len(points)), key=lambda i: points[i].dot(u))
