"""Independent brute-force oracles used to freeze expected values.

Nothing here goes through the canonical-form, enumeration, or adaptive
integration code paths under test: spans are materialized as element sets,
counts come from exhaustive matrix generation, and integrals from
finite-depth Riemann bounds.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from latticeval.field import INF, det_valuation
from latticeval.grassmann import fiber_points, grassmannian_size, lift_subspace
from latticeval.ring import chain_ring


def span_elements(ring, rows, n):
    """Frozenset of all module elements generated by the rows."""
    vecs = {tuple(ring.zero() for _ in range(n))}
    for row in rows:
        new = set()
        for c in ring.elements():
            scaled = tuple(ring.mul(c, x) for x in row)
            for v in vecs:
                new.add(tuple(ring.add(a, b) for a, b in zip(v, scaled)))
        vecs = new
    return frozenset(vecs)


def is_free_summand(ring, rows, n, q, r):
    """Independent freeness test: the span has q^(rk) elements and its
    reduction modulo the maximal ideal has q^k elements."""
    k = len(rows)
    span = span_elements(ring, rows, n)
    if len(span) != q ** (r * k):
        return False
    red = {tuple(ring.reduce_to(x, 1) for x in v) for v in span}
    return len(red) == q**k


def brute_grassmannian_spans(field, n, k, r):
    """All free rank-k direct summands of (O/m^r)^n as span sets."""
    ring = chain_ring(field, r)
    q = field.q
    elems = tuple(ring.elements())
    spans = set()
    for rows in itertools.product(itertools.product(elems, repeat=n), repeat=k):
        if is_free_summand(ring, rows, n, q, r):
            spans.add(span_elements(ring, rows, n))
    return spans


def brute_intersection_dim(field, n, x_point, y_point):
    """dim of the intersection of two level-1 summands via span sets."""
    ring = chain_ring(field, 1)
    sx = span_elements(ring, x_point.rows, n)
    sy = span_elements(ring, y_point.rows, n)
    size = len(sx & sy)
    d = 0
    while field.q**d < size:
        d += 1
    assert field.q**d == size
    return d


def riemann_kernel_bounds(E, cell, depth):
    """Finite-depth enclosure of the kernel integral over a cell: exact
    contributions from lifts whose determinant valuation resolves above the
    perturbation scale, trivial bounds for the rest."""
    field = E.field
    q = field.q
    lo = Fraction(0)
    unresolved = 0
    pts = fiber_points(cell, depth)
    mass = Fraction(1, grassmannian_size(cell.n, cell.k, q, depth))
    for pt in pts:
        rows = [list(r) for r in E.rows + lift_subspace(pt).rows]
        v = det_valuation(rows, field)
        if v is not INF and v < depth:
            lo += Fraction(1, q**v) * mass
        else:
            unresolved += 1
    hi = lo + unresolved * mass * Fraction(1, q**depth)
    return lo, hi
