"""Decompositions of the generic stalk at a far point in direction ``theta``.

The Stokes decomposition comes from the good-interval splitting; the
vanishing-cycle decomposition comes from straight Gabrielov paths, the rays
``c_i + t*theta``.  The two are expected to coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .costokes import (BadDirection, good_interval_splitting, require_generic,
                       stokes_order)
from .exactplane import Direction, GaussianRational, is_anti_stokes
from .linalg import MatQ, Subspace
from .presentation import (Constr0Presentation, from_factors,
                           total_monodromy, validate)
from .transport import (DegeneratePath, FarFrame, Polyline, segment_crossings, transport_apply,
                        transport_matrix, transport_rows, with_frame)


class DecompositionError(ValueError):
    kind = "InvalidDecomposition"


class PreconditionError(ValueError):
    kind = "PreconditionViolated"


@dataclass(frozen=True)
class Decomposition:
    """Components ``W_i`` of ``Q^ambient``, indexed like the exponents."""

    ambient: int
    components: tuple

    def check(self, dims=None):
        total = Subspace.zero(self.ambient)
        for w in self.components:
            total = total + w
        if total.dim != self.ambient or sum(w.dim for w in self.components) != self.ambient:
            raise DecompositionError("components are not a direct sum decomposition")
        if dims is not None:
            for k, (w, d) in enumerate(zip(self.components, dims)):
                if w.dim not in (0, d):
                    raise DecompositionError(f"component {k + 1} has dimension {w.dim}")

    @property
    def dims(self) -> tuple:
        return tuple(w.dim for w in self.components)

    def basis(self, order=None) -> MatQ:
        order = range(len(self.components)) if order is None else order
        cols = [b for k in order for b in self.components[k].basis]
        return MatQ.from_columns(cols, self.ambient)


def stokes_decomposition(p: Constr0Presentation, theta: Direction) -> Decomposition:
    return Decomposition(p.N, tuple(good_interval_splitting(p, theta)))


# straight Gabrielov paths --------------------------------------------------

def _in_wedge(d: GaussianRational, a: GaussianRational, b: GaussianRational) -> bool:
    # d strictly inside the cone spanned by a then b (counterclockwise, narrow)
    return a.cross(d) > 0 and d.cross(b) > 0


def _ray_vertex(p: Constr0Presentation, k: int, theta: Direction, reach) -> GaussianRational:
    """Far vertex on the ray from ``c_k`` in direction ``theta``, tilted off
    the cut of ``c_k`` (without sweeping over an exponent) when the ray runs
    along it."""
    c = p.exponents[k]
    t = theta.vector()
    far = c + t.scale(reach)
    if theta != p.cut_direction:
        return far
    w = t.scale(reach)
    eps = mpq(1)
    side = theta.perp().vector()
    while True:
        tilted = w + side.scale(eps)
        # sweep no exponent, and stay off the other cuts (parallel to theta)
        if not any(_in_wedge(x - c, w, tilted) or (x - c).cross(tilted) == 0
                   or (c + tilted - x).cross(t) == 0
                   for i, x in enumerate(p.exponents) if i != k):
            return c + tilted
        eps /= 2


def _reach(p: Constr0Presentation, theta: Direction, k: int):
    # far enough along theta to clear every exponent
    c = p.exponents[k]
    top = max(x.dot(theta) for x in p.exponents)
    norm = theta.x ** 2 + theta.y ** 2
    return (top - c.dot(theta)) / norm + 1


def _gabrielov_path(p: Constr0Presentation, fr: FarFrame, theta: Direction, k: int) -> Polyline:
    """Straight path from ``c_k`` in direction ``theta``, then to the square
    point ``fr.point(theta)``."""
    q = fr.point(theta)
    err = None
    for extra in range(8):
        v = _ray_vertex(p, k, theta, _reach(p, theta, k) + extra)
        path = Polyline((p.exponents[k], v, q))
        try:
            segment_crossings(p, path)
            return path
        except DegeneratePath as e:
            err = e
    raise DegeneratePath(f"no clean Gabrielov path for exponent {k + 1}: {err}")


def gabrielov_transport(p: Constr0Presentation, fr: FarFrame, theta: Direction, k: int) -> MatQ:
    """Transport from ``c_k`` along its Gabrielov path to ``fr.point(theta)``."""
    return transport_matrix(p, _gabrielov_path(p, fr, theta, k))


def _far_anchors(p: Constr0Presentation, theta: Direction):
    return [c + theta.vector().scale(_reach(p, theta, k) + 8)
            for k, c in enumerate(p.exponents)]


def _require_non_anti_stokes(p: Constr0Presentation, theta: Direction):
    if is_anti_stokes(theta, p.cfg):
        raise BadDirection(f"direction {theta} is anti-Stokes")


def _gabrielov_data(p: Constr0Presentation, theta: Direction):
    """For each ``k`` the pair ``(U_k, V_k)`` with local monodromy
    ``I + U_k @ V_k`` in base-fiber coordinates.  ``V_k`` reads the ``U_k``
    component after transport back to ``c_k``, so its kernel is the embedded
    stalk of ``c_k``."""
    _require_non_anti_stokes(p, theta)

    def run(fr: FarFrame):
        g = fr.chart([theta])
        ginv = g.inverse()
        out = []
        for k in range(p.n):
            path = _gabrielov_path(p, fr, theta, k)
            span = p.blocks.span(k)
            back = MatQ._raw(tuple(transport_rows(p, path.reversed(), span)), p.N)
            step = p.elementary[k]
            cols = step.submatrix(0, p.N, span.start, span.stop)
            delta = MatQ._raw(tuple(
                tuple(x - (1 if r == span.start + j else 0) for j, x in enumerate(row))
                for r, row in enumerate(cols.rows)), len(span))
            out.append((ginv @ transport_apply(p, path, delta), back @ g))
        return tuple(out)

    return p.memo(("gabrielov", theta), lambda: with_frame(p, _far_anchors(p, theta), run))


def embedded_stalks(p: Constr0Presentation, theta: Direction) -> list[Subspace]:
    """Each ``F_{c_k}`` carried to the base fiber along its Gabrielov path."""
    return [Subspace.kernel(v) for _, v in _gabrielov_data(p, theta)]


def vanishing_cycle_decomposition(p: Constr0Presentation, theta: Direction) -> Decomposition:
    # W_i is the intersection of the other embedded stalks, the common
    # kernel of their V_j
    data = _gabrielov_data(p, theta)
    parts = []
    for i in range(p.n):
        rows = tuple(r for j, (_, v) in enumerate(data) if j != i for r in v.rows)
        parts.append(Subspace.kernel(MatQ._raw(rows, p.N)) if rows else Subspace.full(p.N))
    return Decomposition(p.N, tuple(parts))


@dataclass(frozen=True)
class Comparison:
    agree: bool
    mismatches: tuple = ()
    stokes: Decomposition | None = field(default=None, compare=False)
    vanishing: Decomposition | None = field(default=None, compare=False)

    @property
    def verdict(self) -> str:
        return "Agree" if self.agree else "Disagree"


def compare_decompositions(p: Constr0Presentation, theta: Direction) -> Comparison:
    s = stokes_decomposition(p, theta)
    v = vanishing_cycle_decomposition(p, theta)
    bad = tuple(k for k, (a, b) in enumerate(zip(s.components, v.components)) if a != b)
    return Comparison(not bad, bad, s, v)


def local_monodromies(p: Constr0Presentation, theta: Direction) -> list[MatQ]:
    """Monodromy of the loop that runs out along the Gabrielov path of
    ``c_k``, turns once counterclockwise around ``c_k`` and comes back, in
    base-fiber coordinates."""
    ident = MatQ.identity(p.N)
    return [ident + u @ v for u, v in _gabrielov_data(p, theta)]


def rebase_presentation(p: Constr0Presentation, theta: Direction) -> Constr0Presentation:
    """The same sheaf presented with cuts along ``-theta``, base direction
    ``theta`` and blocks in the vanishing-cycle basis, listed in cut-crossing
    order."""
    validate(p)
    require_generic(p, theta)
    dec = vanishing_cycle_decomposition(p, theta)
    order = stokes_order(p, theta)
    basis = dec.basis(order)
    binv = basis.inverse()
    data = _gabrielov_data(p, theta)
    ident = MatQ.identity(p.N)
    factors = [ident + (binv @ data[k][0]) @ (data[k][1] @ basis) for k in order]
    out = from_factors([p.exponents[k] for k in order], [p.dims[k] for k in order],
                       factors, -theta, theta)
    for k, f in enumerate(factors):
        if f != out.elementary[k]:
            raise DecompositionError("local monodromy is not elementary in the vanishing-cycle basis")
    return out


# stability near infinity ---------------------------------------------------

@dataclass(frozen=True)
class Stability:
    preserved: bool
    mismatches: tuple = ()

    @property
    def verdict(self) -> str:
        return "Preserved" if self.preserved else "Violated"


def _beyond(p: Constr0Presentation, x: GaussianRational, theta: Direction) -> bool:
    return all((x - c).dot(theta) > 0 for c in p.exponents)


def _on_cut(p: Constr0Presentation, x: GaussianRational) -> bool:
    u = p.cut_direction
    return any((x - c).cross(u) == 0 and (x - c).dot(u) > 0 for c in p.exponents)


def _off_cuts(p: Constr0Presentation, x: GaussianRational, theta: Direction) -> GaussianRational:
    # a point on a cut has no chart of its own; use a nearby point at the
    # same level along theta (the sheaf is locally constant there)
    if not _on_cut(p, x):
        return x
    side = theta.perp().vector()
    eps = mpq(1, 2)
    while _on_cut(p, x + side.scale(eps)):
        eps /= 2
    return x + side.scale(eps)


def transport_stability(p: Constr0Presentation, theta: Direction, a, b) -> Stability:
    """Carry the Stokes decomposition from the far point ``a`` to ``b`` along
    ``[a, b]`` and compare it with the one at ``b``.  Both points must lie
    beyond every exponent in direction ``theta``."""
    a, b = GaussianRational.of(a), GaussianRational.of(b)
    if not (_beyond(p, a, theta) and _beyond(p, b, theta)):
        raise PreconditionError("points must lie beyond every exponent in direction theta")
    a, b = _off_cuts(p, a, theta), _off_cuts(p, b, theta)
    parts = good_interval_splitting(p, theta)

    def run(fr: FarFrame):
        g = fr.chart([theta])
        q = fr.point(theta)

        def at(x):
            m = g if x == q else transport_matrix(p, Polyline((q, x))) @ g
            return [v.image(m) for v in parts]

        da = at(a)
        db = at(b)
        if a == b:
            return Stability(da == db)
        step = transport_matrix(p, Polyline((a, b)))
        moved = [v.image(step) for v in da]
        bad = tuple(k for k, (x, y) in enumerate(zip(moved, db)) if x != y)
        return Stability(not bad, bad)

    return with_frame(p, [a, b], run)


# trivial Stokes structures -------------------------------------------------

@dataclass(frozen=True)
class TrivialityCheck:
    status: str            # "pass", "fail" or "not-applicable"
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def trivial_stokes_check(p: Constr0Presentation) -> TrivialityCheck:
    """If the monodromy at infinity is trivial, every ``T_ii`` must be the
    identity and every ``T_ij`` (``i != j``) zero."""
    validate(p)
    if not total_monodromy(p).is_identity():
        return TrivialityCheck("not-applicable")
    for i in range(p.n):
        for j in range(p.n):
            t = p.T(i, j)
            if (i == j and not t.is_identity()) or (i != j and not t.is_zero()):
                return TrivialityCheck("fail", (i, j))
    return TrivialityCheck("pass")
