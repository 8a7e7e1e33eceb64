"""Residue-field arithmetic GF(q) for q = p^e.

Elements are encoded as integers in range(q).  For prime q the encoding is
the obvious one (Z/p).  For prime powers the integer is the base-p packing
of the coefficient vector of the element written in the power basis of
GF(p)[x] modulo a fixed irreducible polynomial, lowest degree first.
"""

from __future__ import annotations

from functools import lru_cache

# monic irreducible polynomials over GF(p), coefficients ascending
_IRREDUCIBLE = {
    4: (1, 1, 1),
    8: (1, 1, 0, 1),
    9: (1, 0, 1),
    16: (1, 1, 0, 0, 1),
    25: (2, 0, 1),
    27: (1, 2, 0, 1),
    32: (1, 0, 1, 0, 0, 1),
    49: (3, 1, 1),
}

_TABLE_LIMIT = 64


def _factor_prime_power(q):
    if q < 2:
        raise ValueError(f"residue size must be >= 2, got {q}")
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return q, 1
    e = 0
    m = q
    while m % p == 0:
        m //= p
        e += 1
    if m != 1:
        raise ValueError(f"residue size {q} is not a prime power")
    return p, e


class GF:
    """Arithmetic in the finite field with q elements."""

    __slots__ = ("q", "p", "e", "_mul", "_inv")

    def __init__(self, q: int):
        self.q = q
        self.p, self.e = _factor_prime_power(q)
        if self.e == 1:
            self._mul = None
            self._inv = None
        else:
            if q not in _IRREDUCIBLE:
                raise ValueError(f"no irreducible polynomial on record for GF({q})")
            if q > _TABLE_LIMIT:
                raise ValueError(f"GF({q}) tables not supported")
            self._build_tables()

    # -- encoding helpers (prime-power case) --------------------------------
    def _unpack(self, a):
        p = self.p
        return [(a // p**i) % p for i in range(self.e)]

    def _pack(self, coeffs):
        return sum(c * self.p**i for i, c in enumerate(coeffs))

    def _build_tables(self):
        q, p, e = self.q, self.p, self.e
        mod = _IRREDUCIBLE[q]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            ca = self._unpack(a)
            for b in range(a, q):
                cb = self._unpack(b)
                prod = [0] * (2 * e - 1)
                for i, x in enumerate(ca):
                    if x:
                        for j, y in enumerate(cb):
                            prod[i + j] = (prod[i + j] + x * y) % p
                # reduce modulo the defining polynomial
                for i in range(len(prod) - 1, e - 1, -1):
                    c = prod[i]
                    if c:
                        prod[i] = 0
                        for j in range(e):
                            prod[i - e + j] = (prod[i - e + j] - c * mod[j]) % p
                v = self._pack(prod[:e])
                mul[a][b] = v
                mul[b][a] = v
        self._mul = mul
        inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
        self._inv = inv

    # -- field operations ----------------------------------------------------
    def add(self, a, b):
        if self.e == 1:
            return (a + b) % self.q
        p = self.p
        return self._pack([(x + y) % p for x, y in zip(self._unpack(a), self._unpack(b))])

    def neg(self, a):
        if self.e == 1:
            return (-a) % self.q
        p = self.p
        return self._pack([(-x) % p for x in self._unpack(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.e == 1:
            return (a * b) % self.q
        return self._mul[a][b]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(q)")
        if self.e == 1:
            return pow(a, self.q - 2, self.q)
        return self._inv[a]

    def from_int(self, m: int):
        """Image of the rational integer m under Z -> GF(q)."""
        if self.e == 1:
            return m % self.q
        return m % self.p

    def __repr__(self):
        return f"GF({self.q})"


@lru_cache(maxsize=None)
def gf(q: int) -> GF:
    return GF(q)
