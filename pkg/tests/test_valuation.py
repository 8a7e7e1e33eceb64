import random
from fractions import Fraction

import pytest

from latticeval import exactlinalg as xl
from latticeval.grassmann import enumerate_grassmannian
from latticeval.transforms import cosine_matrix
from latticeval.valuation import LevelValuation, spherical, val_space_basis


def test_spherical_is_all_ones(f2):
    v = spherical(f2, 3, 1, 1)
    assert all(c.point() == 1 for c in v.coeffs)
    assert len(v.coeffs) == 7


def test_degree_extremes_are_scalars(f2):
    assert len(spherical(f2, 3, 0, 2).coeffs) == 1
    assert len(spherical(f2, 3, 3, 2).coeffs) == 1


def test_spherical_invariant_under_action(f2):
    # constant coefficient vectors are fixed by any permutation action
    from latticeval.grassmann import act_point
    from latticeval.ring import chain_ring

    rng = random.Random(5)
    ring = chain_ring(f2, 1)
    ix = enumerate_grassmannian(f2, 3, 1, 1)
    v = spherical(f2, 3, 1, 1)
    lifted = [[f2.random_integral(rng, 2) for _ in range(3)] for _ in range(3)]
    # any invertible integral matrix permutes the index; constants are fixed
    for pt in ix:
        assert v.at_point(pt).point() == 1


def test_val_space_basis_extreme_degrees(f2):
    assert val_space_basis(f2, 2, 0, 1).dim == 1
    assert val_space_basis(f2, 2, 2, 1).dim == 1


def test_val_space_basis_rank_matches_matrix(f2):
    m = cosine_matrix(f2, 2, 1, 1)
    basis = val_space_basis(f2, 2, 1, 1, m)
    assert basis.dim == xl.rank(m.fraction_entries()) == 3


@pytest.mark.parametrize("n,k", [(2, 0), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (3, 3)])
def test_spherical_in_image_of_cosine(f2, n, k):
    basis = val_space_basis(f2, n, k, 1)
    assert basis.contains(spherical(f2, n, k, 1))


def test_dim_val_equals_dual_dim(f2, f3):
    for field in (f2, f3):
        for n in (2, 3):
            for k in range(n + 1):
                a = val_space_basis(field, n, k, 1).dim
                b = val_space_basis(field, n, n - k, 1).dim
                assert a == b


def test_valuation_arithmetic_and_eval(f2):
    ix = enumerate_grassmannian(f2, 2, 1, 1)
    v = LevelValuation.from_coeffs(f2, 2, 1, 1, [1, 2, 3])
    w = LevelValuation.indicator(ix[1])
    s = v + w
    assert s.at_point(ix[1]).point() == 3
    d = v - w
    assert d.at_point(ix[1]).point() == 1
    assert v.scale(Fraction(1, 2)).at_point(ix[2]).point() == Fraction(3, 2)


def test_valuation_at_subspace_reduces(f2):
    from latticeval.grassmann import lift_subspace

    ix = enumerate_grassmannian(f2, 2, 1, 1)
    v = LevelValuation.from_coeffs(f2, 2, 1, 1, [5, 7, 11])
    for i, pt in enumerate(ix):
        assert v.at_subspace(lift_subspace(pt)).point() == v.coeffs[i].point()


def test_valuation_json_roundtrip(f2):
    size = len(enumerate_grassmannian(f2, 3, 1, 2))
    v = LevelValuation.from_coeffs(f2, 3, 1, 2, list(range(size)), space="dual", twist=1)
    w = LevelValuation.from_json(v.to_json())
    assert w == v


def test_incompatible_addition_rejected(f2):
    v = LevelValuation.from_coeffs(f2, 2, 1, 1, [1, 2, 3])
    w = LevelValuation.from_coeffs(f2, 2, 1, 1, [1, 2, 3], twist=1)
    with pytest.raises(ValueError):
        v + w
