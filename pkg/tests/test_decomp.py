import pytest
from hypothesis import given, strategies as st

from conftest import instance_and_direction, instances
from stokeslab.costokes import good_interval_splitting
from stokeslab.decomp import (Decomposition, DecompositionError, PreconditionError,
                              compare_decompositions, embedded_stalks, local_monodromies,
                              rebase_presentation, stokes_decomposition,
                              transport_stability, trivial_stokes_check,
                              vanishing_cycle_decomposition)
from stokeslab.exactplane import Direction, GaussianRational
from stokeslab.linalg import BlockStructure, MatQ, Subspace, peel_factors
from stokeslab.presentation import (Constr0Presentation, elementary_matrix, from_factors,
                                    stalk, total_monodromy)

D = Direction


def coordinate_parts(p):
    return tuple(Subspace.coordinate(p.N, p.blocks.span(k)) for k in range(p.n))


def test_stokes_decomposition_examples(e2, trivial):
    assert stokes_decomposition(trivial, D(1, 3)).components == coordinate_parts(trivial)
    for theta in (D(1, 1), D(-1, -1)):
        dec = stokes_decomposition(e2, theta)
        assert list(dec.components) == good_interval_splitting(e2, theta)
        dec.check(e2.dims)
        assert dec.dims == (1, 1)


def test_vanishing_cycle_examples(e2, trivial):
    for theta in (D(1, 3), D(-2, 1), D(3, -1)):
        assert vanishing_cycle_decomposition(trivial, theta).components == coordinate_parts(trivial)
    dec = vanishing_cycle_decomposition(e2, D(1, 1))
    dec.check(e2.dims)
    single = Constr0Presentation((3,), (2,), (([[1, 2], [0, 1]],),), D(0, -1), D(1, 1))
    assert vanishing_cycle_decomposition(single, D(1, 1)).components == (Subspace.full(2),)


def test_compare_examples(e2, trivial):
    assert compare_decompositions(trivial, D(1, 3)).verdict == "Agree"
    assert compare_decompositions(e2, D(1, 1)).verdict == "Agree"
    assert compare_decompositions(e2, D(-1, -1)).agree


def test_decomposition_check_rejects():
    e1 = Subspace(2, [(1, 0)])
    with pytest.raises(DecompositionError):
        Decomposition(2, (e1, e1)).check()
    with pytest.raises(DecompositionError):
        Decomposition(2, (Subspace.full(2), Subspace.zero(2))).check((1, 1))


@given(instance_and_direction())
def test_decompositions_agree(pt):
    p, theta = pt
    c = compare_decompositions(p, theta)
    assert c.agree, c.mismatches
    c.stokes.check(p.dims)
    assert c.stokes.dims == p.dims


@given(instance_and_direction())
def test_embedded_stalks_are_sums(pt):
    p, theta = pt
    dec = vanishing_cycle_decomposition(p, theta)
    for i, emb in enumerate(embedded_stalks(p, theta)):
        rest = Subspace.zero(p.N)
        for k, w in enumerate(dec.components):
            if k != i:
                rest = rest + w
        assert emb == rest
        assert emb.dim == stalk(p, p.exponents[i]).dim


@given(instance_and_direction())
def test_local_monodromies_multiply_to_total(pt):
    # straight paths from a common far point, ordered along theta - pi/2,
    # compose to the loop at infinity; the rebased presentation carries it
    p, theta = pt
    r = rebase_presentation(p, theta)
    mons = local_monodromies(p, theta)
    for k, m in enumerate(mons):
        assert m.det() == p.T(k, k).det()
    assert total_monodromy(r).det() == total_monodromy(p).det()


# stability near infinity

def test_stability_examples(e2):
    theta = D(1, 1)
    far = GaussianRational(5, 5)
    assert transport_stability(e2, theta, far, far).verdict == "Preserved"
    assert transport_stability(e2, theta, far, GaussianRational(9, 4)).preserved
    with pytest.raises(PreconditionError):
        transport_stability(e2, theta, far, GaussianRational(0, 0))


@given(instance_and_direction(), st.integers(-6, 6), st.integers(-6, 6), st.integers(1, 4))
def test_stability_near_infinity(pt, s, t, lift):
    p, theta = pt
    top = max(c.dot(theta) for c in p.exponents)
    v = theta.vector()
    norm = theta.x ** 2 + theta.y ** 2
    base = v.scale(top / norm + lift)
    side = theta.perp().vector()
    a = base + side.scale(s)
    b = base + side.scale(t) + v.scale(lift)
    assert transport_stability(p, theta, a, b).preserved


# trivial Stokes structures

def test_triviality_examples(e2, trivial):
    assert trivial_stokes_check(trivial).status == "pass"
    assert trivial_stokes_check(e2).status == "not-applicable"
    ident = MatQ.identity(3)
    factors = peel_factors(ident, BlockStructure((1, 2)))
    assert all(f.is_identity() for f in factors)
    p = from_factors([0, (1, 1)], [1, 2], factors, D(1, -2), D(2, 1))
    assert trivial_stokes_check(p).status == "pass"


@given(instances(), st.integers(1, 3))
def test_triviality_never_fails(p, power):
    assert trivial_stokes_check(p).ok
    # a presentation whose factors peel the identity is trivial
    ident = MatQ.identity(p.N)
    order = p.crossing_order
    dims = [p.dims[k] for k in order]
    factors = peel_factors(ident, BlockStructure(tuple(dims)))
    q = from_factors([p.exponents[k] for k in order], dims, factors,
                     p.cut_direction, p.base_direction)
    assert trivial_stokes_check(q).status == "pass"


def test_elementary_local_monodromy_e2(e2):
    # with the base chart straight along theta, the local monodromy around c_1
    # is conjugate to its elementary matrix
    mons = local_monodromies(e2, D(1, 1))
    assert mons[0].det() == elementary_matrix(e2, 1).det()
