"""Exact linear subspaces of F^n, normalized against the standard lattice.

A Subspace is stored by the canonical primitive basis of its intersection
with O^n (see field.primitive_basis), so equal subspaces compare equal and
hash identically.
"""

from __future__ import annotations

from .field import (
    FieldModel,
    extend_to_lattice_basis,
    pivot_columns,
    primitive_basis,
    solve_in_span,
)


class Subspace:
    __slots__ = ("field", "n", "rows")

    def __init__(self, field: FieldModel, n: int, rows, *, _canonical=False):
        self.field = field
        self.n = n
        self.rows = tuple(tuple(r) for r in rows) if _canonical else primitive_basis(rows, field, n)

    @classmethod
    def from_span(cls, field, n, vectors):
        return cls(field, n, vectors)

    @classmethod
    def zero(cls, field, n):
        return cls(field, n, (), _canonical=True)

    @classmethod
    def full(cls, field, n):
        one, z = field.one(), field.zero()
        rows = tuple(tuple(one if i == j else z for j in range(n)) for i in range(n))
        return cls(field, n, rows, _canonical=True)

    @classmethod
    def coordinate(cls, field, n, indices):
        one, z = field.one(), field.zero()
        rows = tuple(tuple(one if j == i else z for j in range(n)) for i in sorted(indices))
        return cls(field, n, rows, _canonical=True)

    @property
    def dim(self):
        return len(self.rows)

    def pivots(self):
        return pivot_columns(self.rows)

    def lattice_complement(self):
        """Standard-basis rows completing the primitive basis to a lattice basis."""
        return extend_to_lattice_basis(self.rows, self.field, self.n)

    def annihilator(self):
        """Subspace of the dual space pairing to zero with self (dual basis
        coordinates; the dual of the standard lattice is again O^n)."""
        f, n = self.field, self.n
        if not self.rows:
            return Subspace.full(f, n)
        piv = self.pivots()
        pivset = set(piv)
        free = [j for j in range(n) if j not in pivset]
        rows = []
        for j0 in free:
            vec = [f.zero()] * n
            vec[j0] = f.one()
            for i, jp in enumerate(piv):
                vec[jp] = -self.rows[i][j0]
            rows.append(tuple(vec))
        return Subspace(f, n, rows)

    def add(self, other):
        return Subspace(self.field, self.n, self.rows + other.rows)

    def intersect(self, other):
        return self.annihilator().add(other.annihilator()).annihilator()

    def contains_vector(self, vec):
        return solve_in_span(vec, self.rows, self.field) is not None

    def contains(self, other):
        return all(self.contains_vector(r) for r in other.rows)

    def coords_of(self, vec):
        """Coordinates of vec in the primitive basis, or None."""
        return solve_in_span(vec, self.rows, self.field)

    def reduce(self, r: int):
        """Level-r class: the free summand (span + m^r Lambda)/m^r Lambda."""
        from .grassmann import GrassPoint, canonicalize
        from .ring import chain_ring

        ring = chain_ring(self.field, r)
        rows = [tuple(ring.from_scalar(x) for x in row) for row in self.rows]
        canon = canonicalize(ring, rows)
        assert canon is not None, "primitive basis must reduce to a free summand"
        return GrassPoint(self.field.kind, self.field.q, self.n, self.dim, r, canon)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.field == other.field
                and self.n == other.n and self.rows == other.rows)

    def __hash__(self):
        return hash((self.field, self.n, self.rows))

    def __repr__(self):
        enc = [[x.encode() for x in row] for row in self.rows]
        return f"Subspace(n={self.n}, rows={enc})"
