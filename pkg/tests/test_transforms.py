import itertools
import random
from fractions import Fraction

import pytest

from latticeval import exactlinalg as xl
from latticeval.field import equichar, matmul as smatmul, mixedchar
from latticeval.grassmann import (
    enumerate_grassmannian,
    fiber_points,
    lift_subspace,
    pair_orbit_invariant,
)
from latticeval.integrate import IntegratorOptions
from latticeval.subspace import Subspace
from latticeval.transforms import (
    OperatorMatrix,
    cosine_matrix,
    fourier,
    fourier_chain_scalar,
    fourier_eval,
    fourier_inv,
    fourier_matrix,
    haar_integrate,
    kernel_s,
    radon_avg_containing,
    radon_matrix,
)
from latticeval.valuation import LevelValuation, spherical

from oracles import riemann_kernel_bounds


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def test_kernel_examples(f2):
    one, z, t = f2.one(), f2.zero(), f2.uniformizer()
    M = Subspace(f2, 2, [(one, z)])
    assert kernel_s(M, Subspace(f2, 2, [(z, one)])) == 1
    assert kernel_s(M, Subspace(f2, 2, [(one, t)])) == Fraction(1, 2)
    # degenerate sum M + N != F^2
    assert kernel_s(M, Subspace(f2, 2, [(one, z)])) == 0


def test_kernel_dimension_mismatch(f2):
    one, z = f2.one(), f2.zero()
    M = Subspace(f2, 3, [(one, z, z)])
    with pytest.raises(ValueError):
        kernel_s(M, Subspace(f2, 3, [(z, one, z)]))


def _random_subspace(field, n, k, rng, depth=3):
    from latticeval.field import field_rank

    while True:
        rows = [[field.random_integral(rng, depth) for _ in range(n)] for _ in range(k)]
        if field_rank(rows, field) == k:
            return Subspace(field, n, rows)


def _random_unit_integral(field, n, rng, depth=3):
    one, z = field.one(), field.zero()
    low = [[one if i == j else (field.random_integral(rng, depth) if i > j else z)
            for j in range(n)] for i in range(n)]
    up = [[one if i == j else (field.random_integral(rng, depth) if i < j else z)
           for j in range(n)] for i in range(n)]
    return smatmul(low, up, field)


def test_kernel_symmetry_and_invariance_500_pairs(f2):
    rng = random.Random(101)
    n = 3
    for _ in range(500):
        k = rng.randint(1, n - 1)
        M = _random_subspace(f2, n, k, rng)
        N = _random_subspace(f2, n, n - k, rng)
        s = kernel_s(M, N)
        assert s == kernel_s(N, M)
        g = _random_unit_integral(f2, n, rng)
        gM = Subspace(f2, n, [tuple(x for x in r) for r in smatmul([list(r) for r in M.rows], g, f2)])
        gN = Subspace(f2, n, smatmul([list(r) for r in N.rows], g, f2))
        assert kernel_s(gM, gN) == s


def test_kernel_mixedchar(p5):
    one, z, five = p5.one(), p5.zero(), p5.t_pow(1)
    M = Subspace(p5, 2, [(one, z)])
    assert kernel_s(M, Subspace(p5, 2, [(one, five)])) == Fraction(1, 5)


# ---------------------------------------------------------------------------
# adaptive integration
# ---------------------------------------------------------------------------

def _whole_grassmannian_integral(field, n, i, options=None):
    ix_rows = enumerate_grassmannian(field, n, i, 1)
    ix_cols = enumerate_grassmannian(field, n, n - i, 1)
    E = lift_subspace(ix_rows[0])
    total = Fraction(0)
    for cell in ix_cols:
        v, _ = haar_integrate(E, cell, options)
        assert v.is_point
        total += v.point()
    return total


@pytest.mark.parametrize("q", [2, 3])
def test_spherical_eigenvalue_n2(q):
    """The average of the kernel over the projective line.

    Splitting the line into the unit-ball chart {span(1,y): y integral} and
    the complementary cell {span(x,1): x in the maximal ideal} gives
    s = |y| on the first chart and s = 1 on the second; with chart masses
    q/(q+1) and 1/(q+1) and E|y| = (1-1/q)/(1-1/q^2) = q/(q+1), the value
    is q/(q+1) * q/(q+1) + 1/(q+1) = (q^2+q+1)/(q+1)^2.
    """
    field = equichar(q)
    expected = Fraction(q * q + q + 1, (q + 1) ** 2)
    assert _whole_grassmannian_integral(field, 2, 1) == expected


def test_spherical_eigenvalue_against_riemann_oracle(f2):
    ix = enumerate_grassmannian(f2, 2, 1, 1)
    E = lift_subspace(ix[0])
    total_lo, total_hi = Fraction(0), Fraction(0)
    for cell in ix:
        lo, hi = riemann_kernel_bounds(E, cell, 9)
        total_lo += lo
        total_hi += hi
    expected = Fraction(7, 9)
    assert total_lo <= expected <= total_hi
    assert total_hi - total_lo < Fraction(1, 100)
    assert total_lo <= _whole_grassmannian_integral(f2, 2, 1) <= total_hi


def test_haar_integrate_against_riemann_oracle_cells(f2):
    ix_m = enumerate_grassmannian(f2, 3, 1, 1)
    ix_n = enumerate_grassmannian(f2, 3, 2, 1)
    E = lift_subspace(ix_m[0])
    for cell in ix_n:
        v, _ = haar_integrate(E, cell)
        lo, hi = riemann_kernel_bounds(E, cell, 6)
        assert lo <= v.lo and v.hi <= hi + Fraction(1, 2**6)
        if v.is_point:
            assert lo <= v.point() <= hi


def test_locally_constant_cell_is_exact(f2):
    # transversal at level 1: kernel constant 1 on the cell
    one, z = f2.one(), f2.zero()
    E = Subspace(f2, 2, [(one, z)])
    cell = Subspace(f2, 2, [(z, one)]).reduce(1)
    v, stats = haar_integrate(E, cell)
    assert v.status == "exact" and v.point() == Fraction(1, 3)
    assert stats.depths == [1]


def test_interval_monotone_under_depth(f2):
    # shallower depth caps give nested enclosures
    ix = enumerate_grassmannian(f2, 2, 1, 1)
    E = lift_subspace(ix[0])
    cell = ix[0]
    prev = None
    for extra in (1, 2, 3, 4):
        opts = IntegratorOptions(depth_extra=extra, geom_run=50)  # no tail summation
        v, _ = haar_integrate(E, cell, opts)
        if prev is not None:
            assert prev.lo <= v.lo and v.hi <= prev.hi
        prev = v
    exact, _ = haar_integrate(E, cell)
    assert prev.lo <= exact.point() <= prev.hi


def test_two_lifts_give_same_entry(f2):
    # well-definedness on level classes: any lift of the row class yields
    # the same cell integral
    ix_m = enumerate_grassmannian(f2, 3, 1, 1)
    ix_n = enumerate_grassmannian(f2, 3, 2, 1)
    for mpt in ix_m.points[:3]:
        deep = fiber_points(mpt, 3)
        lifts = [lift_subspace(mpt), lift_subspace(deep[1]), lift_subspace(deep[-1])]
        for cell in ix_n.points[:4]:
            vals = {haar_integrate(E, cell)[0] for E in lifts}
            assert len(vals) == 1


# ---------------------------------------------------------------------------
# cosine matrices
# ---------------------------------------------------------------------------

def test_cosine_n2_matrix_values(f2):
    m = cosine_matrix(f2, 2, 1, 1)
    fe = m.fraction_entries()
    for i, mpt in enumerate(m.row_index):
        for j, npt in enumerate(m.col_index):
            expect = Fraction(1, 9) if pair_orbit_invariant(mpt, npt) == 1 else Fraction(1, 3)
            assert fe[i][j] == expect
    assert all(s.point() == Fraction(7, 9) for s in m.row_sums())


@pytest.mark.parametrize("q,n", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_cosine_adjoint_transpose_identity(q, n):
    # with uniform probability weights on both sides and equal cardinalities
    # the adjointness of the kernel becomes an exact transpose relation
    field = equichar(q)
    for i in range(1, n):
        a = cosine_matrix(field, n, i, 1)
        b = cosine_matrix(field, n, n - i, 1)
        assert a.fraction_entries() == xl.transpose(b.fraction_entries())


def test_cosine_commutes_with_group_action(f2):
    from latticeval.grassmann import act_point
    from latticeval.ring import chain_ring

    rng = random.Random(51)
    ring = chain_ring(f2, 1)
    m = cosine_matrix(f2, 3, 1, 1)
    rows, cols = m.row_index, m.col_index
    fe = m.fraction_entries()
    for _ in range(10):
        g = _random_unit_integral(f2, 3, rng)
        g_ring = [[ring.from_scalar(x) for x in row] for row in g]
        for a, mpt in enumerate(rows):
            for b, npt in enumerate(cols):
                ga = rows.index(act_point(mpt, g_ring))
                gb = cols.index(act_point(npt, g_ring))
                assert fe[a][b] == fe[ga][gb]


def test_cosine_r2_level_map(f2):
    m = cosine_matrix(f2, 2, 1, 2)
    assert len(m.row_index) == 6 and len(m.col_index) == 6
    assert m.is_exact()
    # constant row sums: the all-ones section is spherical at every level
    sums = {s.point() for s in m.row_sums()}
    assert len(sums) == 1


def test_cosine_degenerate_degrees(f2):
    top = cosine_matrix(f2, 3, 3, 1)
    bottom = cosine_matrix(f2, 3, 0, 1)
    assert top.fraction_entries() == [[Fraction(1)]]
    assert bottom.fraction_entries() == [[Fraction(1)]]


def test_operator_matrix_json_roundtrip(f2):
    m = cosine_matrix(f2, 2, 1, 1)
    m2 = OperatorMatrix.from_json(m.to_json())
    assert m2.fraction_entries() == m.fraction_entries()
    assert m2.transform == "cosine"


# ---------------------------------------------------------------------------
# radon matrices
# ---------------------------------------------------------------------------

def test_radon_example_line_in_plane(f2):
    m = radon_matrix(f2, 3, 1, 2, 1)
    fe = m.fraction_entries()
    from latticeval.grassmann import point_contains

    for i, e in enumerate(m.row_index):
        for j, f in enumerate(m.col_index):
            assert fe[i][j] == (Fraction(1, 3) if point_contains(e, f) else 0)


def test_radon_row_stochastic_and_constant_preserving(f2, f3):
    for field, n, p, qd, r in ((f2, 3, 1, 2, 1), (f3, 3, 1, 2, 1), (f2, 4, 1, 3, 1),
                               (f2, 3, 1, 2, 2)):
        m = radon_matrix(field, n, p, qd, r)
        for s in m.row_sums():
            assert s.point() == 1
        out = m.apply([1] * len(m.col_index))
        assert all(x.point() == 1 for x in out)


@pytest.mark.parametrize("q,n", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)])
def test_radon_full_rank_complementary(q, n):
    field = equichar(q)
    for p in range((n + 1) // 2):
        m = radon_matrix(field, n, p, n - p, 1)
        assert xl.rank(m.fraction_entries()) == len(m.col_index)


def test_radon_containing_consistent_with_transpose(f2):
    a = radon_matrix(f2, 3, 1, 2, 1)
    b = radon_avg_containing(f2, 3, 1, 2, 1)
    fa, fb = a.fraction_entries(), b.fraction_entries()
    ta = xl.transpose(fa)
    # same incidence pattern, row-normalized on the other side
    for i in range(len(fb)):
        for j in range(len(fb[0])):
            assert (fb[i][j] != 0) == (ta[i][j] != 0)
        assert sum(fb[i]) == 1


def test_radon_rejects_bad_ranks(f2):
    with pytest.raises(ValueError):
        radon_matrix(f2, 3, 2, 2, 1)
    with pytest.raises(ValueError):
        radon_matrix(f2, 3, 2, 1, 1)


# ---------------------------------------------------------------------------
# fourier transform
# ---------------------------------------------------------------------------

def test_fourier_chain_scalar_is_one_everywhere(f2, f3):
    for field, n, r in ((f2, 2, 1), (f2, 3, 1), (f3, 2, 1), (f2, 2, 2), (f2, 3, 2)):
        for k in range(n + 1):
            for pt in enumerate_grassmannian(field, n, k, r):
                sc, parts = fourier_chain_scalar(lift_subspace(pt))
                assert sc == 1, (pt, parts)


def test_fourier_euler_and_volume(f2):
    chi = spherical(f2, 3, 0, 1)
    vol = spherical(f2, 3, 3, 1)
    fchi = fourier(chi)
    assert fchi.k == 3 and fchi.twist == 1 and fchi.coeffs[0].point() == 1
    fvol = fourier(vol)
    assert fvol.k == 0 and fvol.twist == 1 and fvol.coeffs[0].point() == 1


@pytest.mark.parametrize("q,n,r", [(2, 2, 1), (2, 3, 1), (3, 2, 1), (3, 3, 1),
                                   (2, 2, 2), (2, 3, 2), (3, 2, 2)])
def test_plancherel_matrix_identity(q, n, r):
    field = equichar(q)
    for k in range(n + 1):
        fm = fourier_matrix(field, n, k, r)
        bm = fourier_matrix(field, n, n - k, r)
        assert xl.matmul(bm.fraction_entries(), fm.fraction_entries()) == \
            xl.identity(len(fm.col_index))


def test_fourier_involution_on_valuations(f2):
    rng = random.Random(3)
    for k in range(4):
        coeffs = [Fraction(rng.randint(-4, 4), rng.randint(1, 3))
                  for _ in range(len(enumerate_grassmannian(f2, 3, k, 1)))]
        v = LevelValuation.from_coeffs(f2, 3, k, 1, coeffs)
        w = fourier(v)
        assert w.twist == 1 and w.space == "dual" and w.k == 3 - k
        back = fourier_inv(w)
        assert back == v
        assert fourier(fourier_inv(w)) == w


def test_fourier_eval_pointwise_matches_transport(f2):
    v = LevelValuation.from_coeffs(f2, 2, 1, 1, [1, 2, 3])
    w = fourier(v)
    for hpt in enumerate_grassmannian(f2, 2, 1, 1):
        H = lift_subspace(hpt)
        assert fourier_eval(v, H) == w.at_point(hpt)


def test_fourier_mixedchar(p5):
    field = p5
    for k in range(3):
        fm = fourier_matrix(field, 2, k, 1)
        bm = fourier_matrix(field, 2, 2 - k, 1)
        assert xl.matmul(bm.fraction_entries(), fm.fraction_entries()) == \
            xl.identity(len(fm.col_index))
        assert fm.meta["observed_scalars"] == ["1"]
