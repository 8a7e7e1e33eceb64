"""Arithmetic in the finite chain ring O/m^r.

Equal-characteristic elements are fixed-length tuples of GF(q) codes
(coefficients of t^0 .. t^(r-1)); mixed-characteristic elements are
integers in range(p^r).  Both encodings are hashable and order-stable,
which makes canonical forms directly comparable.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .field import FieldModel, INF, pmul, ptrim


class ChainRing:
    __slots__ = ("field", "r", "q")

    def __init__(self, field: FieldModel, r: int):
        if r < 1:
            raise ValueError("level must be >= 1")
        self.field = field
        self.r = r
        self.q = field.q

    # -- element constructors -------------------------------------------------
    def zero(self):
        return (0,) * self.r if self.field.kind == "equichar" else 0

    def one(self):
        if self.field.kind == "equichar":
            return (1,) + (0,) * (self.r - 1)
        return 1 % self.field.p**self.r

    def t(self):
        if self.field.kind == "equichar":
            return tuple(1 if i == 1 else 0 for i in range(self.r)) if self.r > 1 else self.zero()
        return self.field.p % self.field.p**self.r

    def elements(self):
        """All elements in a deterministic order."""
        if self.field.kind == "equichar":
            return iter(itertools.product(range(self.q), repeat=self.r))
        return iter(range(self.field.p**self.r))

    def ideal_elements(self):
        """Elements of the maximal ideal."""
        if self.field.kind == "equichar":
            return ((0,) + c for c in itertools.product(range(self.q), repeat=self.r - 1))
        p = self.field.p
        return (p * m for m in range(p ** (self.r - 1)))

    # -- arithmetic ------------------------------------------------------------
    def add(self, a, b):
        if self.field.kind == "equichar":
            g = self.field.gf
            return tuple(g.add(x, y) for x, y in zip(a, b))
        return (a + b) % self.field.p**self.r

    def neg(self, a):
        if self.field.kind == "equichar":
            g = self.field.gf
            return tuple(g.neg(x) for x in a)
        return (-a) % self.field.p**self.r

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.field.kind == "equichar":
            g = self.field.gf
            r = self.r
            out = [0] * r
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        if y and i + j < r:
                            out[i + j] = g.add(out[i + j], g.mul(x, y))
            return tuple(out)
        return (a * b) % self.field.p**self.r

    def ord(self, a):
        """Uniformizer-adic order, in 0..r; r encodes the zero element."""
        if self.field.kind == "equichar":
            for i, x in enumerate(a):
                if x:
                    return i
            return self.r
        if a == 0:
            return self.r
        p, v = self.field.p, 0
        while a % p == 0:
            a //= p
            v += 1
        return v

    def is_unit(self, a):
        return self.ord(a) == 0

    def is_zero(self, a):
        return self.ord(a) == self.r

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("non-unit in chain ring")
        if self.field.kind == "equichar":
            g, r = self.field.gf, self.r
            out = [0] * r
            out[0] = g.inv(a[0])
            for i in range(1, r):
                s = 0
                for j in range(1, i + 1):
                    if j < len(a) and a[j]:
                        s = g.add(s, g.mul(a[j], out[i - j]))
                out[i] = g.neg(g.mul(s, out[0]))
            return tuple(out)
        return pow(a, -1, self.field.p**self.r)

    def divide_exact(self, a, b):
        """A representative of a/b when ord(a) >= ord(b)."""
        ob = self.ord(b)
        if ob == self.r:
            raise ZeroDivisionError("division by zero in chain ring")
        if self.ord(a) < ob:
            raise ValueError("inexact chain-ring division")
        if self.field.kind == "equichar":
            ash = tuple(a[ob:]) + (0,) * ob
            bsh = tuple(b[ob:]) + (0,) * ob
            return self.mul(ash, self.inv(bsh))
        p = self.field.p
        return ((a // p**ob) * self.inv_unit_int(b // p**ob)) % p**self.r

    def inv_unit_int(self, u):
        return pow(u, -1, self.field.p**self.r)

    # -- conversions ------------------------------------------------------------
    def reduce_to(self, a, r2: int):
        """Image in O/m^r2 for r2 <= r."""
        if r2 > self.r:
            raise ValueError("cannot reduce upward")
        if self.field.kind == "equichar":
            return tuple(a[:r2])
        return a % self.field.p**r2

    def lifts_to(self, a, r2: int):
        """All preimages in O/m^r2 for r2 >= r, deterministic order."""
        if r2 < self.r:
            raise ValueError("lift target below current level")
        if self.field.kind == "equichar":
            for tail in itertools.product(range(self.q), repeat=r2 - self.r):
                yield tuple(a) + tail
        else:
            step = self.field.p**self.r
            for m in range(self.field.p ** (r2 - self.r)):
                yield a + m * step

    def from_scalar(self, x):
        """Reduction of an integral scalar modulo m^r."""
        f = self.field
        if f.kind == "equichar":
            v = x.val()
            if v == INF or v >= self.r:
                return self.zero()
            if v < 0:
                raise ValueError("cannot reduce a non-integral scalar")
            series = list(x.num) + [0] * self.r
            inv_den = self._series_inverse(x.den)
            prod = pmul(f.gf, ptrim(tuple(series[: self.r])), inv_den)
            coeffs = [0] * self.r
            for i, c in enumerate(prod[: self.r - v]):
                coeffs[i + v] = c
            return tuple(coeffs)
        fr = x.frac
        mod = f.p**self.r
        d = fr.denominator % mod
        return (fr.numerator % mod) * pow(d, -1, mod) % mod

    def _series_inverse(self, den):
        g, r = self.field.gf, self.r
        out = [0] * r
        out[0] = g.inv(den[0])
        for i in range(1, r):
            s = 0
            for j in range(1, min(i, len(den) - 1) + 1):
                s = g.add(s, g.mul(den[j], out[i - j]))
            out[i] = g.neg(g.mul(s, out[0]))
        return ptrim(tuple(out))

    def lift_scalar(self, a):
        """Canonical scalar representative (polynomial / least residue)."""
        f = self.field
        if f.kind == "equichar":
            return f.poly(a)
        return f.from_int(a)

    def random_element(self, rng):
        if self.field.kind == "equichar":
            return tuple(rng.randrange(self.q) for _ in range(self.r))
        return rng.randrange(self.field.p**self.r)

    def encode(self, a):
        if self.field.kind == "equichar":
            return ",".join(str(c) for c in a)
        return str(a)

    def parse(self, text: str):
        if self.field.kind == "equichar":
            coeffs = tuple(int(c) for c in text.split(","))
            if len(coeffs) != self.r:
                coeffs = (coeffs + (0,) * self.r)[: self.r]
            return coeffs
        return int(text) % self.field.p**self.r

    def __eq__(self, other):
        return isinstance(other, ChainRing) and self.field == other.field and self.r == other.r

    def __hash__(self):
        return hash((self.field, self.r))

    def __repr__(self):
        return f"ChainRing({self.field!r}, r={self.r})"


@lru_cache(maxsize=None)
def _ring_cached(kind: str, q: int, r: int) -> ChainRing:
    return ChainRing(FieldModel(kind, q), r)


def chain_ring(field: FieldModel, r: int) -> ChainRing:
    return _ring_cached(field.kind, field.q, r)
