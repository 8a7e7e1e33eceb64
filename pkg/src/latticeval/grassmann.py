"""Finite level-r Grassmannians: free rank-k direct summands of (O/m^r)^n.

Canonical form: echelon over the chain ring with pivot entries 1, pivot
columns standard, and entries left of a row's pivot in the maximal ideal.
Enumeration runs over pivot-column patterns with free entries filled in a
deterministic order, so the index order is stable across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .field import FieldModel
from .ring import ChainRing, chain_ring
from .subspace import Subspace

DEFAULT_POINT_CAP = 10**6


class ResourceCapError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    assert num % den == 0
    return num // den


def grassmannian_size(n: int, k: int, q: int, r: int) -> int:
    return gaussian_binomial(n, k, q) * q ** ((r - 1) * k * (n - k))


@dataclass(frozen=True)
class GrassPoint:
    """Canonical generating matrix of a free rank-k direct summand."""

    kind: str
    q: int
    n: int
    k: int
    r: int
    rows: tuple

    @property
    def field(self) -> FieldModel:
        return FieldModel(self.kind, self.q)

    @property
    def ring(self) -> ChainRing:
        return chain_ring(self.field, self.r)

    def pivots(self):
        ring = self.ring
        return tuple(next(j for j in range(self.n) if ring.is_unit(row[j])) for row in self.rows)

    def sort_key(self):
        return (self.pivots(), self.rows)

    def to_json(self):
        ring = self.ring
        return {
            "model": self.kind,
            "q": self.q,
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "rows": [[ring.encode(x) for x in row] for row in self.rows],
        }

    @classmethod
    def from_json(cls, data):
        field = FieldModel(data["model"], data["q"])
        ring = chain_ring(field, data["r"])
        rows = tuple(tuple(ring.parse(x) for x in row) for row in data["rows"])
        canon = canonicalize(ring, rows)
        if canon is None:
            raise ValueError("rows do not span a free direct summand")
        return cls(data["model"], data["q"], data["n"], data["k"], data["r"], canon)


def canonicalize(ring: ChainRing, rows):
    """Unique echelon form of the row span, or None when the rows do not
    generate a free direct summand of rank len(rows)."""
    work = [list(r) for r in rows]
    n = len(work[0]) if work else 0
    done = []
    while work:
        piv_col = None
        for j in range(n):
            if any(ring.is_unit(r[j]) for r in work):
                piv_col = j
                break
        if piv_col is None:
            return None
        idx = next(i for i, r in enumerate(work) if ring.is_unit(r[piv_col]))
        piv = work.pop(idx)
        inv = ring.inv(piv[piv_col])
        piv = [ring.mul(inv, x) for x in piv]
        for r in work:
            c = r[piv_col]
            if not ring.is_zero(c):
                for j in range(n):
                    r[j] = ring.sub(r[j], ring.mul(c, piv[j]))
        for r in done:
            c = r[piv_col]
            if not ring.is_zero(c):
                for j in range(n):
                    r[j] = ring.sub(r[j], ring.mul(c, piv[j]))
        done.append(piv)
    done.sort(key=lambda r: next(j for j in range(n) if ring.is_unit(r[j])))
    return tuple(tuple(r) for r in done)


def make_point(field: FieldModel, n: int, r: int, rows) -> GrassPoint:
    ring = chain_ring(field, r)
    canon = canonicalize(ring, rows)
    if canon is None:
        raise ValueError("rows do not span a free direct summand")
    return GrassPoint(field.kind, field.q, n, len(canon), r, canon)


class LevelIndex:
    """All points of one finite Grassmannian in a stable total order."""

    __slots__ = ("field", "n", "k", "r", "points", "_pos")

    def __init__(self, field, n, k, r, points):
        self.field = field
        self.n = n
        self.k = k
        self.r = r
        self.points = tuple(points)
        self._pos = {p: i for i, p in enumerate(self.points)}

    def index(self, point: GrassPoint) -> int:
        return self._pos[point]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def meta(self):
        return (self.field.kind, self.field.q, self.n, self.k, self.r)


@lru_cache(maxsize=None)
def _enumerate_cached(kind, q, n, k, r, cap):
    field = FieldModel(kind, q)
    expected = grassmannian_size(n, k, q, r)
    if expected > cap:
        raise ResourceCapError(
            f"Grassmannian size {expected} exceeds cap {cap} for (n={n},k={k},q={q},r={r})")
    ring = chain_ring(field, r)
    pts = []
    if k == 0:
        pts.append(GrassPoint(kind, q, n, 0, r, ()))
    else:
        all_elems = tuple(ring.elements())
        ideal_elems = tuple(ring.ideal_elements())
        one, zero = ring.one(), ring.zero()
        for pivots in itertools.combinations(range(n), k):
            pivset = set(pivots)
            free_pos = []
            for i in range(k):
                for j in range(n):
                    if j not in pivset:
                        free_pos.append((i, j, j > pivots[i]))
            choice_sets = [all_elems if after else ideal_elems for (_, _, after) in free_pos]
            for choice in itertools.product(*choice_sets):
                rows = [[zero] * n for _ in range(k)]
                for i in range(k):
                    rows[i][pivots[i]] = one
                for (i, j, _), val in zip(free_pos, choice):
                    rows[i][j] = val
                pts.append(GrassPoint(kind, q, n, k, r, tuple(tuple(rw) for rw in rows)))
    assert len(pts) == expected, "pivot-pattern enumeration disagrees with the count formula"
    pts.sort(key=GrassPoint.sort_key)
    return LevelIndex(field, n, k, r, pts)


def enumerate_grassmannian(field: FieldModel, n: int, k: int, r: int,
                           cap: int = DEFAULT_POINT_CAP) -> LevelIndex:
    if not (0 <= k <= n and r >= 1):
        raise ValueError(f"bad Grassmannian parameters (n={n},k={k},r={r})")
    return _enumerate_cached(field.kind, field.q, n, k, r, cap)


# ---------------------------------------------------------------------------
# reduction, fibers, lifts
# ---------------------------------------------------------------------------

def reduce_point(x: GrassPoint, r: int) -> GrassPoint:
    if r > x.r:
        raise ValueError("reduce target above current level")
    if r == x.r:
        return x
    ring = x.ring
    rows = tuple(tuple(ring.reduce_to(e, r) for e in row) for row in x.rows)
    return GrassPoint(x.kind, x.q, x.n, x.k, r, rows)


def fiber_iter(x: GrassPoint, r2: int):
    """Level-r2 points reducing to x (r2 >= x.r), in a deterministic but
    unsorted order (digit lifts of the free entries)."""
    if r2 < x.r:
        raise ValueError("fiber target below current level")
    if r2 == x.r:
        yield x
        return
    ring = x.ring
    pivots = x.pivots()
    pivset = set(pivots)
    positions = [(i, j) for i in range(x.k) for j in range(x.n) if j not in pivset]
    lift_sets = [tuple(ring.lifts_to(x.rows[i][j], r2)) for (i, j) in positions]
    base = [[next(ring.lifts_to(e, r2)) for e in row] for row in x.rows]
    for choice in itertools.product(*lift_sets):
        rows = [list(r) for r in base]
        for (i, j), v in zip(positions, choice):
            rows[i][j] = v
        yield GrassPoint(x.kind, x.q, x.n, x.k, r2, tuple(tuple(r) for r in rows))


def fiber_points(x: GrassPoint, r2: int):
    """All level-r2 points reducing to x (r2 >= x.r), in index order."""
    out = list(fiber_iter(x, r2))
    out.sort(key=GrassPoint.sort_key)
    return out


def lift_subspace(x: GrassPoint, field: FieldModel | None = None) -> Subspace:
    """Exact subspace spanned by the canonical polynomial / least-residue
    lifts of the rows; its lattice intersection reduces back to x."""
    field = field or x.field
    ring = x.ring
    rows = [tuple(ring.lift_scalar(e) for e in row) for row in x.rows]
    return Subspace(field, x.n, rows)


def annihilator_point(x: GrassPoint) -> GrassPoint:
    """Annihilator summand in the dual module under the standard pairing."""
    ring = x.ring
    n, k = x.n, x.k
    piv = x.pivots()
    pivset = set(piv)
    free = [j for j in range(n) if j not in pivset]
    rows = []
    for j0 in free:
        vec = [ring.zero()] * n
        vec[j0] = ring.one()
        for i, jp in enumerate(piv):
            vec[jp] = ring.neg(x.rows[i][j0])
        rows.append(tuple(vec))
    canon = canonicalize(ring, rows)
    assert canon is not None
    return GrassPoint(x.kind, x.q, n, n - k, x.r, canon)


def point_contains(big: GrassPoint, small: GrassPoint) -> bool:
    """Module containment test on canonical forms (same n, q, r)."""
    if (big.n, big.q, big.r) != (small.n, small.q, small.r):
        raise ValueError("containment requires matching parameters")
    ring = big.ring
    piv = big.pivots()
    for vec in small.rows:
        coeff = [vec[j] for j in piv]
        residual = list(vec)
        for c, row in zip(coeff, big.rows):
            for j in range(big.n):
                residual[j] = ring.sub(residual[j], ring.mul(c, row[j]))
        if any(not ring.is_zero(e) for e in residual):
            return False
    return True


def act_point(x: GrassPoint, g_rows) -> GrassPoint:
    """Image of x under the invertible ring matrix g (v -> v . g on rows)."""
    ring = x.ring
    n = x.n
    new_rows = []
    for row in x.rows:
        out = [ring.zero()] * n
        for i, c in enumerate(row):
            if not ring.is_zero(c):
                for j in range(n):
                    out[j] = ring.add(out[j], ring.mul(c, g_rows[i][j]))
        new_rows.append(tuple(out))
    canon = canonicalize(ring, new_rows)
    if canon is None:
        raise ValueError("matrix does not act invertibly on the summand")
    return GrassPoint(x.kind, x.q, x.n, x.k, x.r, canon)


# ---------------------------------------------------------------------------
# pair orbit invariant
# ---------------------------------------------------------------------------

def _chain_snf_orders(ring: ChainRing, rows):
    """Multiset of elementary-divisor orders of the row module."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if a else 0
    orders = []
    for s in range(min(m, n)):
        best, pos = ring.r, None
        for i in range(s, m):
            for j in range(s, n):
                o = ring.ord(a[i][j])
                if o < best:
                    best, pos = o, (i, j)
        if pos is None:
            break
        i0, j0 = pos
        a[s], a[i0] = a[i0], a[s]
        for r_ in a:
            r_[s], r_[j0] = r_[j0], r_[s]
        piv = a[s][s]
        for i in range(s + 1, m):
            if ring.ord(a[i][s]) < ring.r:
                f = ring.divide_exact(a[i][s], piv)
                for j in range(s, n):
                    a[i][j] = ring.sub(a[i][j], ring.mul(f, a[s][j]))
        for j in range(s + 1, n):
            if ring.ord(a[s][j]) < ring.r:
                f = ring.divide_exact(a[s][j], piv)
                for i in range(s, m):
                    a[i][j] = ring.sub(a[i][j], ring.mul(f, a[i][s]))
        orders.append(best)
    return tuple(sorted(orders))


def pair_orbit_invariant(x: GrassPoint, y: GrassPoint):
    """Discrete invariant of the simultaneous GL_n(O/m^r) orbit of (x, y).

    At r=1 this is dim(x intersect y), which classifies orbits of pairs of
    subspaces over the residue field.  At deeper levels the elementary
    divisor profile of the joint span is returned.
    """
    if (x.n, x.q, x.r, x.kind) != (y.n, y.q, y.r, y.kind):
        raise ValueError("pair invariant requires matching parameters")
    ring = x.ring
    orders = _chain_snf_orders(ring, list(x.rows) + list(y.rows))
    if x.r == 1:
        rank = sum(1 for o in orders if o == 0)
        return x.k + y.k - rank
    return orders
