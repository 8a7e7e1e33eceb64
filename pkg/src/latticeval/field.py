"""Exact scalars of a dense subfield of a non-Archimedean local field,
plus lattice linear algebra over its ring of integers.

Two models are provided:

* equal characteristic: scalars are rational functions over the residue
  field GF(q), stored as ``t^m * num/den`` with ``num(0) != 0 != den(0)``,
  so the valuation is the stored shift ``m``;
* mixed characteristic: scalars are rationals, valuation is the p-adic one.

Conventions used throughout the package: vectors are rows, subspaces are
row spans, the standard lattice is O^n, and matrices of vectors stack rows.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .gf import GF, gf

INF = float("inf")


# ---------------------------------------------------------------------------
# polynomials over GF(q): tuples of field elements, ascending degree,
# no trailing zeros; () is the zero polynomial
# ---------------------------------------------------------------------------

def ptrim(c):
    i = len(c)
    while i > 0 and c[i - 1] == 0:
        i -= 1
    return tuple(c[:i])


def padd(g: GF, a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = g.add(out[i], x)
    return ptrim(out)


def pneg(g: GF, a):
    return tuple(g.neg(x) for x in a)


def psub(g: GF, a, b):
    return padd(g, a, pneg(g, b))


def pmul(g: GF, a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = g.add(out[i + j], g.mul(x, y))
    return ptrim(out)


def pscale(g: GF, a, c):
    if c == 0:
        return ()
    return ptrim(tuple(g.mul(x, c) for x in a))


def pshift(a, m):
    """Multiply by t^m (m >= 0)."""
    if not a:
        return ()
    return (0,) * m + tuple(a)


def pord(a):
    """Index of the lowest nonzero coefficient; INF for the zero polynomial."""
    for i, x in enumerate(a):
        if x:
            return i
    return INF


def pdivmod(g: GF, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    ilb = g.inv(lb)
    quo = [0] * max(0, len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            f = g.mul(c, ilb)
            quo[i - db] = f
            for j in range(db + 1):
                a[i - db + j] = g.sub(a[i - db + j], g.mul(f, b[j]))
    return ptrim(quo), ptrim(a)


def pgcd(g: GF, a, b):
    while b:
        _, a = pdivmod(g, a, b)
        a, b = b, a
    if a:
        a = pscale(g, a, g.inv(a[-1]))
    return a


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

class EquiScalar:
    """t^m * num/den with num(0) != 0 != den(0); zero is m=0, num=()."""

    __slots__ = ("field", "m", "num", "den")

    def __init__(self, field, m, num, den, _normalized=False):
        self.field = field
        if _normalized:
            self.m, self.num, self.den = m, num, den
            return
        g = field.gf
        num, den = ptrim(num), ptrim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.m, self.num, self.den = 0, (), (1,)
            return
        on, od = pord(num), pord(den)
        m += on - od
        num, den = num[on:], den[od:]
        d = pgcd(g, num, den)
        if len(d) > 1:
            num, _ = pdivmod(g, num, d)
            den, _ = pdivmod(g, den, d)
        c = g.inv(den[0])
        num, den = pscale(g, num, c), pscale(g, den, c)
        self.m, self.num, self.den = m, num, den

    def is_zero(self):
        return not self.num

    def val(self):
        return self.m if self.num else INF

    def __add__(self, other):
        f, g = self.field, self.field.gf
        if not self.num:
            return other
        if not other.num:
            return self
        m = min(self.m, other.m)
        a = pmul(g, pshift(self.num, self.m - m), other.den)
        b = pmul(g, pshift(other.num, other.m - m), self.den)
        return EquiScalar(f, m, padd(g, a, b), pmul(g, self.den, other.den))

    def __neg__(self):
        return EquiScalar(self.field, self.m, pneg(self.field.gf, self.num), self.den, _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        f, g = self.field, self.field.gf
        if not self.num or not other.num:
            return f.zero()
        return EquiScalar(f, self.m + other.m, pmul(g, self.num, other.num), pmul(g, self.den, other.den))

    def __truediv__(self, other):
        f, g = self.field, self.field.gf
        if not other.num:
            raise ZeroDivisionError("division by zero scalar")
        if not self.num:
            return f.zero()
        return EquiScalar(f, self.m - other.m, pmul(g, self.num, other.den), pmul(g, self.den, other.num))

    def __eq__(self, other):
        return (isinstance(other, EquiScalar) and self.m == other.m
                and self.num == other.num and self.den == other.den)

    def __hash__(self):
        return hash((self.m, self.num, self.den))

    def encode(self):
        num, den = self.num, self.den
        if self.num:
            if self.m >= 0:
                num = pshift(num, self.m)
            else:
                den = pshift(den, -self.m)
        fmt = lambda p: ",".join(str(c) for c in p) if p else "0"
        return f"{fmt(num)}/{fmt(den)}"

    def __repr__(self):
        return f"EquiScalar({self.encode()!r})"


class PadicScalar:
    """A rational number with its p-adic valuation."""

    __slots__ = ("field", "frac")

    def __init__(self, field, frac):
        self.field = field
        self.frac = Fraction(frac)

    def is_zero(self):
        return self.frac == 0

    def val(self):
        if self.frac == 0:
            return INF
        p = self.field.p
        v, n = 0, self.frac.numerator
        while n % p == 0:
            n //= p
            v += 1
        d = self.frac.denominator
        while d % p == 0:
            d //= p
            v -= 1
        return v

    def __add__(self, other):
        return PadicScalar(self.field, self.frac + other.frac)

    def __neg__(self):
        return PadicScalar(self.field, -self.frac)

    def __sub__(self, other):
        return PadicScalar(self.field, self.frac - other.frac)

    def __mul__(self, other):
        return PadicScalar(self.field, self.frac * other.frac)

    def __truediv__(self, other):
        return PadicScalar(self.field, self.frac / other.frac)

    def __eq__(self, other):
        return isinstance(other, PadicScalar) and self.frac == other.frac

    def __hash__(self):
        return hash(self.frac)

    def encode(self):
        return f"{self.frac.numerator}/{self.frac.denominator}"

    def __repr__(self):
        return f"PadicScalar({self.encode()!r})"


# ---------------------------------------------------------------------------
# field models
# ---------------------------------------------------------------------------

class FieldModel:
    """Arithmetic context: residue size q and the choice of model."""

    def __init__(self, kind: str, q: int):
        if kind not in ("equichar", "mixedchar"):
            raise ValueError(f"unknown field model {kind!r}")
        self.kind = kind
        self.q = q
        if kind == "equichar":
            self.gf = gf(q)
            self.p, self.e = self.gf.p, self.gf.e
        else:
            g = gf(q)
            if g.e != 1:
                raise ValueError("mixed characteristic requires q prime")
            self.gf = None
            self.p, self.e = q, 1

    # -- constructors --------------------------------------------------------
    def zero(self):
        if self.kind == "equichar":
            return EquiScalar(self, 0, (), (1,), _normalized=True)
        return PadicScalar(self, 0)

    def one(self):
        if self.kind == "equichar":
            return EquiScalar(self, 0, (1,), (1,), _normalized=True)
        return PadicScalar(self, 1)

    def uniformizer(self):
        return self.t_pow(1)

    def t_pow(self, a: int):
        if self.kind == "equichar":
            return EquiScalar(self, a, (1,), (1,), _normalized=True)
        return PadicScalar(self, Fraction(self.p) ** a)

    def from_int(self, m: int):
        if self.kind == "equichar":
            c = self.gf.from_int(m)
            return self.zero() if c == 0 else EquiScalar(self, 0, (c,), (1,), _normalized=True)
        return PadicScalar(self, m)

    def poly(self, coeffs):
        """Scalar from ascending coefficients; equichar coefficients are
        GF(q) codes, mixedchar digits of a base-p expansion."""
        if self.kind == "equichar":
            return EquiScalar(self, 0, ptrim(tuple(coeffs)), (1,))
        return PadicScalar(self, sum(c * self.p**i for i, c in enumerate(coeffs)))

    def parse(self, text: str):
        ns, _, ds = text.partition("/")
        split = lambda s: tuple(int(c) for c in s.split(","))
        if self.kind == "equichar":
            num, den = split(ns), split(ds) if ds else (1,)
            return EquiScalar(self, 0, ptrim(num), ptrim(den))
        return PadicScalar(self, Fraction(int(ns), int(ds) if ds else 1))

    def norm(self, x) -> Fraction:
        v = x.val()
        if v is INF or v == INF:
            return Fraction(0)
        return Fraction(1, self.q**v) if v >= 0 else Fraction(self.q ** (-v))

    def random_integral(self, rng, depth: int):
        """Haar-style random element of O truncated at the given depth."""
        if self.kind == "equichar":
            return self.poly([rng.randrange(self.q) for _ in range(depth)])
        return PadicScalar(self, rng.randrange(self.p**depth))

    def __eq__(self, other):
        return isinstance(other, FieldModel) and (self.kind, self.q) == (other.kind, other.q)

    def __hash__(self):
        return hash((self.kind, self.q))

    def __repr__(self):
        return f"FieldModel({self.kind!r}, q={self.q})"


def equichar(q: int) -> FieldModel:
    return FieldModel("equichar", q)


def mixedchar(p: int) -> FieldModel:
    return FieldModel("mixedchar", p)


# ---------------------------------------------------------------------------
# valuation and determinant valuation
# ---------------------------------------------------------------------------

def val(x):
    """m-adic valuation of a scalar; INF at zero."""
    return x.val()


def _equichar_row_polys(field, row):
    """Clear a row to polynomial entries; returns (polys, valuation shift)."""
    g = field.gf
    shift = min((x.m for x in row if x.num), default=0)
    shift = min(shift, 0)
    dens = [x.den for x in row]
    polys = []
    for i, x in enumerate(row):
        if not x.num:
            polys.append(())
            continue
        p = pshift(x.num, x.m - shift)
        for j, d in enumerate(dens):
            if j != i and len(d) > 1:
                p = pmul(g, p, d)
        polys.append(p)
    return polys, shift


def _poly_det(g: GF, rows):
    """Exact determinant of a square polynomial matrix (fraction-free)."""
    n = len(rows)
    if n == 0:
        return (1,)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return psub(g, pmul(g, rows[0][0], rows[1][1]), pmul(g, rows[0][1], rows[1][0]))
    if n == 3:
        acc = ()
        for sgn, (i, j, k) in (
            (1, (0, 1, 2)), (1, (1, 2, 0)), (1, (2, 0, 1)),
            (-1, (0, 2, 1)), (-1, (1, 0, 2)), (-1, (2, 1, 0)),
        ):
            term = pmul(g, rows[0][i], pmul(g, rows[1][j], rows[2][k]))
            acc = padd(g, acc, term if sgn > 0 else pneg(g, term))
        return acc
    # Bareiss elimination with exact polynomial division
    a = [list(r) for r in rows]
    prev = (1,)
    sign_neg = False
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign_neg = not sign_neg
                    break
            else:
                return ()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = psub(g, pmul(g, a[k][k], a[i][j]), pmul(g, a[i][k], a[k][j]))
                quo, rem = pdivmod(g, num, prev)
                assert not rem, "Bareiss division must be exact"
                a[i][j] = quo
            a[i][k] = ()
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return pneg(g, d) if sign_neg else d


def _int_det(rows):
    n = len(rows)
    if n == 0:
        return 1
    a = [[int(x) for x in r] for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det_valuation(rows, field):
    """Valuation of the determinant of a square scalar matrix; INF if singular."""
    n = len(rows)
    if n == 0:
        return 0
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if field.kind == "equichar":
        total_shift = 0
        polys = []
        for row in rows:
            p, s = _equichar_row_polys(field, row)
            polys.append(p)
            total_shift += s
        d = _poly_det(field.gf, polys)
        o = pord(d)
        return INF if o is INF else o + total_shift
    # mixedchar: clear denominators per row (coprime-to-p part is harmless,
    # p-parts shift the valuation)
    p = field.p
    vshift = 0
    int_rows = []
    for row in rows:
        lcm = 1
        for x in row:
            lcm = lcm * x.frac.denominator // math.gcd(lcm, x.frac.denominator)
        # row multipliers shift the determinant valuation by their p-part
        m = lcm
        while m % p == 0:
            m //= p
            vshift += 1
        cleared = [x.frac * lcm for x in row]
        assert all(f.denominator == 1 for f in cleared)
        int_rows.append([f.numerator for f in cleared])
    d = _int_det(int_rows)
    if d == 0:
        return INF
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v - vshift


# ---------------------------------------------------------------------------
# Smith normal form over the ring of integers
# ---------------------------------------------------------------------------

def _min_val_position(a, r0, c0):
    best, pos = INF, None
    for i in range(r0, len(a)):
        for j in range(c0, len(a[0])):
            v = a[i][j].val()
            if v < best:
                best, pos = v, (i, j)
    return best, pos


def smith_form(rows, field):
    """Diagonalize U*M*V = diag(t^a1, ..) over O with U, V integral of unit
    determinant.  Returns (sorted divisor valuations, U, V); zero diagonal
    entries are reported as INF."""
    m, n = len(rows), len(rows[0]) if rows else 0
    a = [list(r) for r in rows]
    one, zero = field.one(), field.zero()
    U = [[one if i == j else zero for j in range(m)] for i in range(m)]
    V = [[one if i == j else zero for j in range(n)] for i in range(n)]
    divs = []
    for s in range(min(m, n)):
        v, pos = _min_val_position(a, s, s)
        if pos is None or v is INF:
            divs.extend([INF] * (min(m, n) - s))
            break
        i0, j0 = pos
        if i0 != s:
            a[s], a[i0] = a[i0], a[s]
            U[s], U[i0] = U[i0], U[s]
        if j0 != s:
            for r in a:
                r[s], r[j0] = r[j0], r[s]
            for r in V:
                r[s], r[j0] = r[j0], r[s]
        piv = a[s][s]
        # clear column then row; quotients are integral since piv has min val
        for i in range(s + 1, m):
            if not a[i][s].is_zero():
                f = a[i][s] / piv
                for j in range(s, n):
                    a[i][j] = a[i][j] - f * a[s][j]
                for j in range(m):
                    U[i][j] = U[i][j] - f * U[s][j]
        for j in range(s + 1, n):
            if not a[s][j].is_zero():
                f = a[s][j] / piv
                for i in range(s, m):
                    a[i][j] = a[i][j] - f * a[i][s]
                for i in range(n):
                    V[i][j] = V[i][j] - f * V[i][s]
        # normalize pivot to a power of the uniformizer
        unit = piv / field.t_pow(v)
        for j in range(m):
            U[s][j] = U[s][j] / unit
        a[s][s] = field.t_pow(v)
        divs.append(v)
    divs_sorted = sorted(divs, key=lambda x: (x is INF, x))
    return divs_sorted, U, V


# ---------------------------------------------------------------------------
# saturated (primitive) bases of subspaces
# ---------------------------------------------------------------------------

def _nonzero_rows(rows):
    return [list(r) for r in rows if any(not x.is_zero() for x in r)]


def _rescale_integral(field, row):
    """Divide a nonzero row by t^(min valuation) so it is integral with a
    unit entry."""
    v = min(x.val() for x in row if not x.is_zero())
    if v != 0:
        f = field.t_pow(v)
        return [x / f for x in row]
    return row


def primitive_basis(vectors, field, n=None):
    """Canonical O-basis of span(S) intersected with the standard lattice.

    The output is in echelon form: unit pivots normalized to 1, pivot
    columns cleared, pivot columns strictly increasing, and every entry
    left of its row's pivot of positive valuation.  Two spanning sets of
    the same subspace produce identical output.
    """
    rows = _nonzero_rows(vectors)
    if not rows:
        return ()
    n = len(rows[0]) if n is None else n
    # pass 1: saturating elimination
    work = [_rescale_integral(field, r) for r in rows]
    done = []
    while work:
        piv_col = None
        for j in range(n):
            if any(r[j].val() == 0 for r in work):
                piv_col = j
                break
        assert piv_col is not None, "integral row with no unit entry"
        idx = next(i for i, r in enumerate(work) if r[piv_col].val() == 0)
        piv_row = work.pop(idx)
        piv = piv_row[piv_col]
        piv_row = [x / piv for x in piv_row]
        nxt = []
        for r in work:
            if not r[piv_col].is_zero():
                f = r[piv_col]
                r = [x - f * y for x, y in zip(r, piv_row)]
            if any(not x.is_zero() for x in r):
                nxt.append(_rescale_integral(field, r))
        done.append(piv_row)
        work = nxt
    # pass 2: canonical echelon on the saturated basis
    rows = done
    out = []
    while rows:
        piv_col = next(j for j in range(n) if any(r[j].val() == 0 for r in rows))
        idx = next(i for i, r in enumerate(rows) if r[piv_col].val() == 0)
        piv_row = rows.pop(idx)
        piv_row = [x / piv_row[piv_col] for x in piv_row]
        rows = [[x - r[piv_col] * y for x, y in zip(r, piv_row)] for r in rows]
        for prev in out:
            f = prev[piv_col]
            if not f.is_zero():
                for j in range(n):
                    prev[j] = prev[j] - f * piv_row[j]
        out.append(list(piv_row))
    out.sort(key=lambda r: next(j for j in range(n) if not r[j].is_zero()))
    return tuple(tuple(r) for r in out)


def pivot_columns(prim_rows):
    cols = []
    for r in prim_rows:
        cols.append(next(j for j, x in enumerate(r) if x.val() == 0))
    return cols


def extend_to_lattice_basis(prim_rows, field, n):
    """Standard-basis rows completing a canonical primitive basis to a basis
    of the full lattice (determinant of the stacked matrix is a unit)."""
    pivots = set(pivot_columns(prim_rows))
    rows = []
    one, zero = field.one(), field.zero()
    for j in range(n):
        if j not in pivots:
            rows.append(tuple(one if i == j else zero for i in range(n)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# generic exact linear algebra over the field (no lattice normalization)
# ---------------------------------------------------------------------------

def field_rank(rows, field):
    rows = [list(r) for r in _nonzero_rows(rows)]
    if not rows:
        return 0
    n = len(rows[0])
    rank = 0
    col = 0
    while rows and col < n:
        idx = next((i for i, r in enumerate(rows) if not r[col].is_zero()), None)
        if idx is None:
            col += 1
            continue
        piv = rows.pop(idx)
        piv = [x / piv[col] for x in piv]
        rows = [[x - r[col] * y for x, y in zip(r, piv)] for r in rows]
        rows = [r for r in rows if any(not x.is_zero() for x in r)]
        rank += 1
        col += 1
    return rank


def solve_in_span(vec, basis_rows, field):
    """Coefficients x with x . basis = vec, or None if vec is outside the
    span.  basis rows must be linearly independent."""
    if not basis_rows:
        return () if all(x.is_zero() for x in vec) else None
    k, n = len(basis_rows), len(basis_rows[0])
    # one equation per coordinate: sum_i x_i B[i][j] = vec[j]
    aug = [[basis_rows[i][j] for i in range(k)] + [vec[j]] for j in range(n)]
    pivots = []
    r = 0
    for c in range(k):
        idx = next((i for i in range(r, n) if not aug[i][c].is_zero()), None)
        if idx is None:
            continue
        aug[r], aug[idx] = aug[idx], aug[r]
        piv = aug[r][c]
        aug[r] = [x / piv for x in aug[r]]
        for i in range(n):
            if i != r and not aug[i][c].is_zero():
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append((r, c))
        r += 1
    for i in range(r, n):
        if not aug[i][k].is_zero():
            return None
    coeffs = [field.zero()] * k
    for ri, ci in pivots:
        coeffs[ci] = aug[ri][k]
    return tuple(coeffs)


def matmul(a, b, field):
    if not a or not b:
        return []
    zero = field.zero()
    bt = list(zip(*b))
    out = []
    for row in a:
        out.append(tuple(sum((x * y for x, y in zip(row, col)), zero) for col in bt))
    return out
