"""Exact rational values with optional certified enclosures.

Status ladder (best to worst): "exact" (closed-form rational), "geom"
(exact value obtained by summing a certified geometric tail), "interval"
(rational enclosure within tolerance), "uncertified" (enclosure that missed
the tolerance before the depth cap).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_RANK = {"exact": 0, "geom": 1, "interval": 2, "uncertified": 3}


@dataclass(frozen=True)
class CertValue:
    lo: Fraction
    hi: Fraction
    status: str = "exact"

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")
        if self.status not in _RANK:
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def exact(cls, x, status: str = "exact"):
        x = Fraction(x)
        return cls(x, x, status)

    @classmethod
    def hull(cls, lo, hi, status: str = "interval"):
        return cls(Fraction(lo), Fraction(hi), status)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_exact(self) -> bool:
        return self.is_point and _RANK[self.status] <= 1

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def point(self) -> Fraction:
        if not self.is_point:
            raise ValueError(f"not a point value: [{self.lo}, {self.hi}]")
        return self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def _join_status(self, other) -> str:
        a, b = _RANK[self.status], _RANK[other.status]
        return self.status if a >= b else other.status

    def __add__(self, other):
        other = _coerce(other)
        return CertValue(self.lo + other.lo, self.hi + other.hi, self._join_status(other))

    __radd__ = __add__

    def __neg__(self):
        return CertValue(-self.hi, -self.lo, self.status)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __mul__(self, other):
        other = _coerce(other)
        prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return CertValue(min(prods), max(prods), self._join_status(other))

    __rmul__ = __mul__

    def overlaps(self, other) -> bool:
        other = _coerce(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def contains(self, x) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def widen(self, eps) -> "CertValue":
        eps = Fraction(eps)
        status = self.status if _RANK[self.status] >= 2 else "interval"
        return CertValue(self.lo - eps, self.hi + eps, status)

    def to_json(self):
        if self.is_point:
            return {"value": str(self.lo), "status": self.status}
        return {"lo": str(self.lo), "hi": str(self.hi), "status": self.status}

    @classmethod
    def from_json(cls, data):
        if "value" in data:
            return cls.exact(Fraction(data["value"]), data.get("status", "exact"))
        return cls(Fraction(data["lo"]), Fraction(data["hi"]), data.get("status", "interval"))

    def __repr__(self):
        if self.is_point:
            return f"CertValue({self.lo}, {self.status})"
        return f"CertValue([{self.lo}, {self.hi}], {self.status})"


def _coerce(x):
    if isinstance(x, CertValue):
        return x
    return CertValue.exact(Fraction(x))


def cert_sum(values):
    total = CertValue.exact(0)
    for v in values:
        total = total + v
    return total
