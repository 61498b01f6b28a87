import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import instances
from stokeslab.exactplane import Direction
from stokeslab.linalg import MatQ, Subspace, block_permutation
from stokeslab.presentation import (BadReferenceDirection, Constr0Presentation,
                                    DuplicateExponent, ShapeMismatch, SingularDiagonalBlock,
                                    elementary_matrix, stalk, total_monodromy,
                                    validate)


def e2_with(**changes):
    data = dict(exponents=(0, 1), dims=(1, 1), maps=(([[2]], [[1]]), ([[5]], [[3]])),
                cut_direction=Direction(0, -1), base_direction=Direction(1, 1))
    data.update(changes)
    return Constr0Presentation(**data)


def test_validate_examples(e2):
    validate(e2)
    with pytest.raises(DuplicateExponent):
        validate(e2_with(exponents=(0, 0)))
    with pytest.raises(SingularDiagonalBlock):
        validate(e2_with(maps=(([[0]], [[1]]), ([[5]], [[3]]))))


def test_validate_shapes_and_directions():
    with pytest.raises(ShapeMismatch):
        validate(e2_with(maps=(([[2]], [[1, 1]]), ([[5]], [[3]]))))
    with pytest.raises(ShapeMismatch):
        validate(e2_with(dims=(1, 0)))
    with pytest.raises(BadReferenceDirection):
        validate(e2_with(cut_direction=Direction(1, 0)))
    with pytest.raises(BadReferenceDirection):
        validate(e2_with(base_direction=Direction(0, 1)))


def test_elementary_examples(e2, trivial):
    assert elementary_matrix(e2, 1) == MatQ([[2, 0], [5, 1]])
    assert elementary_matrix(e2, 2) == MatQ([[1, 1], [0, 3]])
    for k in (1, 2, 3):
        assert elementary_matrix(trivial, k).is_identity()
    with pytest.raises(IndexError):
        elementary_matrix(e2, 0)


def test_total_monodromy_examples(e2, trivial):
    assert total_monodromy(e2) == MatQ([[7, 1], [15, 3]])
    assert total_monodromy(trivial).is_identity()
    single = Constr0Presentation((3,), (2,), (([[1, 2], [0, 1]],),), Direction(0, -1), Direction(1, 1))
    assert total_monodromy(single) == MatQ([[1, 2], [0, 1]])


def test_stalk_examples(e2):
    assert stalk(e2, 5) == Subspace.full(2)
    assert stalk(e2, 0) == Subspace(2, [(0, 1)])
    assert stalk(e2, 1) == Subspace(2, [(1, 0)])


def _sym(m):
    return sympy.Matrix(m.nrows, m.ncols,
                        lambda i, j: sympy.Rational(int(m[i, j].numerator), int(m[i, j].denominator)))


@given(instances())
def test_total_monodromy_matches_direct_product(p):
    # crossing order: sort by the float projection onto the normal of the cuts
    u = p.cut_direction.perp()
    order = sorted(range(p.n), key=lambda i: float(p.exponents[i].re) * u.x + float(p.exponents[i].im) * u.y)
    ref = sympy.eye(p.N)
    for k in order:
        ref = _sym(elementary_matrix(p, k + 1)) * ref
    assert _sym(total_monodromy(p)) == ref


@given(instances())
def test_det_total_monodromy(p):
    prod = 1
    for i in range(p.n):
        prod *= p.T(i, i).det()
    assert total_monodromy(p).det() == prod


@given(instances())
def test_elementary_fixes_stalk(p):
    for k, c in enumerate(p.exponents):
        e = elementary_matrix(p, k + 1)
        for v in stalk(p, c).basis:
            assert e.apply(v) == tuple(v)


@given(instances())
def test_euler_identity(p):
    assert p.N == sum(p.N - stalk(p, c).dim for c in p.exponents)


@given(instances(), st.randoms(use_true_random=False))
def test_permutation_conjugates_monodromy(p, rng):
    order = list(range(p.n))
    rng.shuffle(order)
    perm = block_permutation(p.blocks, order)
    assert total_monodromy(p.permuted(order)) == perm.inverse() @ total_monodromy(p) @ perm


def test_trivial_presentation_is_valid(trivial):
    validate(trivial)
    assert trivial.N == 4
