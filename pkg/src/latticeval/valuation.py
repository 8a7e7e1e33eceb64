"""Finite-level valuation spaces: coefficient vectors over a LevelIndex.

A LevelValuation of degree k assigns to every level-r point E the exact
coefficient of the lattice-normalized measure on E (the measure giving
E intersect O^n mass 1).  Degree 0 and degree n spaces are the scalars:
multiples of the Euler-characteristic element and of the normalized
volume respectively.  The `twist` counter tracks tensoring with the dual
of the ambient density line (0 = plain sections, 1 = density-dual
twisted, as produced by the Fourier transform).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .field import FieldModel
from .grassmann import GrassPoint, LevelIndex, enumerate_grassmannian
from .intervals import CertValue, cert_sum
from .subspace import Subspace

PRIMAL, DUAL = "primal", "dual"


def dual_space(space: str) -> str:
    return DUAL if space == PRIMAL else PRIMAL


@dataclass(frozen=True)
class LevelValuation:
    field: FieldModel
    n: int
    k: int
    r: int
    coeffs: tuple
    space: str = PRIMAL
    twist: int = 0

    def __post_init__(self):
        assert len(self.coeffs) == len(self.index)

    @property
    def index(self) -> LevelIndex:
        return enumerate_grassmannian(self.field, self.n, self.k, self.r)

    # -- constructors ---------------------------------------------------------
    @classmethod
    def from_coeffs(cls, field, n, k, r, coeffs, space=PRIMAL, twist=0):
        cv = tuple(c if isinstance(c, CertValue) else CertValue.exact(Fraction(c)) for c in coeffs)
        return cls(field, n, k, r, cv, space, twist)

    @classmethod
    def zero(cls, field, n, k, r, space=PRIMAL, twist=0):
        m = len(enumerate_grassmannian(field, n, k, r))
        return cls.from_coeffs(field, n, k, r, [0] * m, space, twist)

    @classmethod
    def constant(cls, field, n, k, r, value=1, space=PRIMAL, twist=0):
        m = len(enumerate_grassmannian(field, n, k, r))
        return cls.from_coeffs(field, n, k, r, [value] * m, space, twist)

    @classmethod
    def indicator(cls, point: GrassPoint, space=PRIMAL, twist=0):
        field = point.field
        ix = enumerate_grassmannian(field, point.n, point.k, point.r)
        coeffs = [0] * len(ix)
        coeffs[ix.index(point)] = 1
        return cls.from_coeffs(field, point.n, point.k, point.r, coeffs, space, twist)

    # -- access ---------------------------------------------------------------
    def at_point(self, point: GrassPoint) -> CertValue:
        return self.coeffs[self.index.index(point)]

    def at_subspace(self, sub: Subspace) -> CertValue:
        if sub.dim != self.k:
            raise ValueError(f"evaluating degree-{self.k} valuation on a {sub.dim}-dim subspace")
        return self.at_point(sub.reduce(self.r))

    def is_exact(self) -> bool:
        return all(c.is_point for c in self.coeffs)

    def fractions(self):
        return [c.point() for c in self.coeffs]

    # -- arithmetic -------------------------------------------------------------
    def _check_compatible(self, other):
        if (self.field, self.n, self.k, self.r, self.space, self.twist) != (
                other.field, other.n, other.k, other.r, other.space, other.twist):
            raise ValueError("incompatible valuations")

    def __add__(self, other):
        self._check_compatible(other)
        return replace(self, coeffs=tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check_compatible(other)
        return replace(self, coeffs=tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c):
        cv = c if isinstance(c, CertValue) else CertValue.exact(Fraction(c))
        return replace(self, coeffs=tuple(cv * x for x in self.coeffs))

    def close_to(self, other, max_width) -> bool:
        """Certified agreement: intervals overlap and widths stay small."""
        self._check_compatible(other)
        w = Fraction(max_width)
        for a, b in zip(self.coeffs, other.coeffs):
            if not a.overlaps(b):
                return False
            if a.width > w or b.width > w:
                return False
        return True

    # -- serialization ----------------------------------------------------------
    def to_json(self):
        return {
            "model": self.field.kind,
            "q": self.field.q,
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "space": self.space,
            "twist": self.twist,
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data):
        field = FieldModel(data["model"], data["q"])
        coeffs = tuple(CertValue.from_json(c) for c in data["coeffs"])
        return cls(field, data["n"], data["k"], data["r"], coeffs,
                   data.get("space", PRIMAL), data.get("twist", 0))


def spherical(field, n, k, r, space=PRIMAL, twist=0) -> LevelValuation:
    """The lattice-invariant section, constant 1 in normalized coordinates.

    For k=1 this is the degree-one invariant valuation normalized to give
    every line l the measure with mass 1 on l intersect O^n; k=0 gives the
    Euler element, k=n the normalized volume."""
    return LevelValuation.constant(field, n, k, r, 1, space, twist)


@dataclass(frozen=True)
class ValSubspaceBasis:
    """Basis of the image of the degree-k cosine operator on level-r data."""

    field: FieldModel
    n: int
    k: int
    r: int
    basis: tuple          # LevelValuations spanning the image
    preimages: tuple      # coefficient vectors on the source Grassmannian

    @property
    def dim(self):
        return len(self.basis)

    def contains(self, v: LevelValuation) -> bool:
        from .exactlinalg import solve, transpose

        cols = [b.fractions() for b in self.basis]
        return solve(transpose(cols), v.fractions()) is not None


def val_space_basis(field, n, k, r, matrix=None) -> ValSubspaceBasis:
    """Column-space basis of the level-r cosine matrix for degree k."""
    from .exactlinalg import column_space_pivots
    from .transforms import cosine_matrix

    op = matrix if matrix is not None else cosine_matrix(field, n, k, r)
    cols_fr = op.fraction_entries()
    pivots = column_space_pivots(cols_fr)
    basis = []
    preim = []
    src_size = len(op.col_index)
    for j in pivots:
        coeffs = [row[j] for row in cols_fr]
        basis.append(LevelValuation.from_coeffs(field, n, k, r, coeffs))
        e = [Fraction(0)] * src_size
        e[j] = Fraction(1)
        preim.append(tuple(e))
    return ValSubspaceBasis(field, n, k, r, tuple(basis), tuple(preim))
