import itertools
import random

import pytest

from latticeval.field import FieldModel, equichar, mixedchar
from latticeval.grassmann import (
    GrassPoint,
    ResourceCapError,
    act_point,
    annihilator_point,
    canonicalize,
    enumerate_grassmannian,
    fiber_points,
    gaussian_binomial,
    grassmannian_size,
    lift_subspace,
    make_point,
    pair_orbit_invariant,
    point_contains,
    reduce_point,
)
from latticeval.ring import chain_ring

from oracles import brute_grassmannian_spans, brute_intersection_dim, span_elements


def test_enumerate_lines_f2_cubed(f2):
    assert len(enumerate_grassmannian(f2, 3, 1, 1)) == 7


def test_enumerate_level2_rank1(f2):
    assert len(enumerate_grassmannian(f2, 2, 1, 2)) == 6


def test_enumerate_k0_single_point(f2):
    ix = enumerate_grassmannian(f2, 3, 0, 2)
    assert len(ix) == 1 and ix[0].rows == ()


@pytest.mark.parametrize("q,n,k,r", [
    (2, 2, 1, 1), (2, 3, 1, 1), (2, 3, 2, 1), (2, 4, 2, 1),
    (2, 2, 1, 2), (2, 3, 1, 2), (3, 2, 1, 1), (3, 2, 1, 2), (3, 3, 1, 1),
])
def test_enumeration_matches_brute_force(q, n, k, r):
    field = equichar(q)
    ix = enumerate_grassmannian(field, n, k, r)
    spans = brute_grassmannian_spans(field, n, k, r)
    assert len(ix) == len(spans) == grassmannian_size(n, k, q, r)
    # every enumerated point generates a distinct brute-force span
    ring = chain_ring(field, r)
    got = {span_elements(ring, p.rows, n) for p in ix}
    assert got == spans


def test_enumeration_count_formula_grid():
    for q, n, r in itertools.product((2, 3), (1, 2, 3, 4), (1, 2)):
        field = equichar(q)
        for k in range(n + 1):
            expected = gaussian_binomial(n, k, q) * q ** ((r - 1) * k * (n - k))
            assert len(enumerate_grassmannian(field, n, k, r)) == expected


def test_mixedchar_enumeration_counts():
    field = mixedchar(3)
    assert len(enumerate_grassmannian(field, 2, 1, 2)) == 12
    spans = brute_grassmannian_spans(field, 2, 1, 2)
    assert len(spans) == 12


def test_resource_cap():
    with pytest.raises(ResourceCapError):
        enumerate_grassmannian(equichar(3), 4, 2, 2, cap=100)


def test_canonicalize_idempotent_and_span_invariant(f2):
    rng = random.Random(2)
    ring = chain_ring(f2, 2)
    ix = enumerate_grassmannian(f2, 3, 2, 2)
    for _ in range(60):
        p = ix[rng.randrange(len(ix))]
        assert canonicalize(ring, p.rows) == p.rows
        # mix rows by a random invertible 2x2 over the ring
        while True:
            g = [[ring.random_element(rng) for _ in range(2)] for _ in range(2)]
            d = ring.sub(ring.mul(g[0][0], g[1][1]), ring.mul(g[0][1], g[1][0]))
            if ring.is_unit(d):
                break
        mixed = []
        for i in range(2):
            row = [ring.zero()] * 3
            for l in range(2):
                for j in range(3):
                    row[j] = ring.add(row[j], ring.mul(g[i][l], p.rows[l][j]))
            mixed.append(tuple(row))
        assert canonicalize(ring, mixed) == p.rows


def test_reduce_fiber_roundtrip(f3):
    ix = enumerate_grassmannian(f3, 2, 1, 1)
    for p in ix:
        fib = fiber_points(p, 2)
        assert len(fib) == 3  # q^{(r'-r) k (n-k)}
        for deep in fib:
            assert reduce_point(deep, 1) == p
    deeper = enumerate_grassmannian(f3, 2, 1, 2)
    assert {x for p in ix for x in fiber_points(p, 2)} == set(deeper.points)


def test_fiber_to_same_level_is_identity(f2):
    p = enumerate_grassmannian(f2, 3, 1, 2)[4]
    assert fiber_points(p, 2) == [p]


def test_fibers_partition(f2):
    shallow = enumerate_grassmannian(f2, 3, 2, 1)
    deep = enumerate_grassmannian(f2, 3, 2, 2)
    seen = []
    for p in shallow:
        seen.extend(fiber_points(p, 2))
    assert sorted(seen, key=GrassPoint.sort_key) == list(deep.points)


def test_annihilator_example(f2):
    ix = enumerate_grassmannian(f2, 3, 1, 1)
    one, z = chain_ring(f2, 1).one(), chain_ring(f2, 1).zero()
    e1 = make_point(f2, 3, 1, [(one, z, z)])
    ann = annihilator_point(e1)
    assert ann.rows == ((z, one, z), (z, z, one))
    full = make_point(f2, 3, 1, [(one, z, z), (z, one, z), (z, z, one)])
    assert annihilator_point(full).rows == ()


def test_annihilator_involution_random(f2, f3):
    rng = random.Random(17)
    for field in (f2, f3):
        for (n, k, r) in ((3, 1, 1), (3, 2, 1), (4, 2, 1), (3, 1, 2)):
            ix = enumerate_grassmannian(field, n, k, r)
            pts = [ix[rng.randrange(len(ix))] for _ in range(min(200, len(ix)))]
            for p in pts:
                a = annihilator_point(p)
                assert a.k == n - k
                assert annihilator_point(a) == p


def test_annihilator_pairing_vanishes(f2):
    ring = chain_ring(f2, 2)
    ix = enumerate_grassmannian(f2, 3, 2, 2)
    for p in list(ix)[:20]:
        a = annihilator_point(p)
        for row in p.rows:
            for arow in a.rows:
                acc = ring.zero()
                for x, y in zip(row, arow):
                    acc = ring.add(acc, ring.mul(x, y))
                assert ring.is_zero(acc)


def test_annihilator_reverses_inclusion(f2):
    lines = enumerate_grassmannian(f2, 3, 1, 1)
    planes = enumerate_grassmannian(f2, 3, 2, 1)
    for l in lines:
        for pl in planes:
            if point_contains(pl, l):
                assert point_contains(annihilator_point(l), annihilator_point(pl))


def test_lift_subspace_roundtrip(f2):
    for p in enumerate_grassmannian(f2, 3, 1, 1):
        assert lift_subspace(p).reduce(1) == p
    for p in enumerate_grassmannian(f2, 3, 2, 2):
        assert lift_subspace(p).reduce(2) == p


def test_lift_subspace_level2_polynomial_coordinates(f2):
    # a level-2 entry 1+t lifts to the polynomial coordinate 1+t
    ring = chain_ring(f2, 2)
    p = make_point(f2, 2, 2, [((1, 0), (1, 1))])
    S = lift_subspace(p)
    one, t = f2.one(), f2.uniformizer()
    assert S.rows == ((one, one + t),)


def test_pair_orbit_invariant_examples(f2):
    ix = enumerate_grassmannian(f2, 3, 1, 1)
    for p in ix:
        assert pair_orbit_invariant(p, p) == 1
    # transversal lines
    one, z = chain_ring(f2, 1).one(), chain_ring(f2, 1).zero()
    a = make_point(f2, 3, 1, [(one, z, z)])
    b = make_point(f2, 3, 1, [(z, one, z)])
    assert pair_orbit_invariant(a, b) == 0


def test_pair_orbit_scan_n4(f2):
    ix = enumerate_grassmannian(f2, 4, 2, 1)
    assert len(ix) == 35
    vals = {pair_orbit_invariant(a, b) for a in ix for b in ix}
    assert vals == {0, 1, 2}


def test_pair_orbit_matches_brute_intersection(f2):
    rng = random.Random(29)
    ix = enumerate_grassmannian(f2, 4, 2, 1)
    for _ in range(40):
        a = ix[rng.randrange(len(ix))]
        b = ix[rng.randrange(len(ix))]
        assert pair_orbit_invariant(a, b) == brute_intersection_dim(f2, 4, a, b)


def _random_invertible_ring_matrix(ring, n, rng):
    from latticeval.field import det_valuation

    while True:
        g = [[ring.random_element(rng) for _ in range(n)] for _ in range(n)]
        lifted = [[ring.lift_scalar(x) for x in row] for row in g]
        v = det_valuation(lifted, ring.field)
        if v == 0:
            return g


def test_pair_invariant_is_orbit_invariant(f2):
    rng = random.Random(31)
    for r in (1, 2):
        ring = chain_ring(f2, r)
        ix = enumerate_grassmannian(f2, 3, 1, r)
        iy = enumerate_grassmannian(f2, 3, 2, r)
        for _ in range(30):
            x = ix[rng.randrange(len(ix))]
            y = iy[rng.randrange(len(iy))]
            g = _random_invertible_ring_matrix(ring, 3, rng)
            assert pair_orbit_invariant(x, y) == pair_orbit_invariant(
                act_point(x, g), act_point(y, g))


def test_reduce_is_equivariant(f2):
    rng = random.Random(37)
    ring2 = chain_ring(f2, 2)
    ring1 = chain_ring(f2, 1)
    ix = enumerate_grassmannian(f2, 3, 1, 2)
    for _ in range(30):
        x = ix[rng.randrange(len(ix))]
        g = _random_invertible_ring_matrix(ring2, 3, rng)
        g_red = [[ring2.reduce_to(e, 1) for e in row] for row in g]
        assert reduce_point(act_point(x, g), 1) == act_point(reduce_point(x, 1), g_red)


def test_grass_point_json_roundtrip(f2):
    for p in enumerate_grassmannian(f2, 3, 2, 2):
        assert GrassPoint.from_json(p.to_json()) == p


def test_index_order_deterministic(f2):
    a = enumerate_grassmannian(f2, 3, 2, 2)
    b = enumerate_grassmannian(FieldModel("equichar", 2), 3, 2, 2)
    assert list(a.points) == list(b.points)


def test_prime_power_residue_field_enumeration():
    field = equichar(4)
    assert len(enumerate_grassmannian(field, 2, 1, 1)) == 5  # q + 1
    assert len(enumerate_grassmannian(field, 3, 1, 1)) == 21  # q^2 + q + 1
    for p in enumerate_grassmannian(field, 3, 1, 1):
        assert annihilator_point(annihilator_point(p)) == p
