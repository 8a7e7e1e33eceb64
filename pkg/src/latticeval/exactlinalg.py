"""Exact linear algebra over the rationals (lists of lists of Fractions)."""

from __future__ import annotations

from fractions import Fraction


def identity(n):
    return [[Fraction(i == j) for j in range(n)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def matmul(a, b):
    if not a or not b:
        return []
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def rref(a):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    rows = [[Fraction(x) for x in r] for r in a]
    if not rows:
        return [], []
    m, n = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        idx = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if idx is None:
            continue
        rows[r], rows[idx] = rows[idx], rows[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(a):
    return len(rref(a)[1])


def nullspace(a):
    """Basis of {x : a @ x = 0} as row vectors."""
    if not a:
        return []
    n = len(a[0])
    rows, pivots = rref(a)
    pivset = set(pivots)
    basis = []
    for j in range(n):
        if j in pivset:
            continue
        vec = [Fraction(0)] * n
        vec[j] = Fraction(1)
        for r_i, c in enumerate(pivots):
            vec[c] = -rows[r_i][j]
        basis.append(vec)
    return basis


def solve(a, b):
    """One solution x of a @ x = b, or None if inconsistent."""
    if not a:
        return [] if all(x == 0 for x in b) else None
    m, n = len(a), len(a[0])
    aug = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(a)]
    rows, pivots = rref(aug)
    x = [Fraction(0)] * n
    for r_i, c in enumerate(pivots):
        if c == n:
            return None  # pivot in the constant column
        x[c] = rows[r_i][n]
    return x


def solve_matrix(a, b_cols):
    """Solve a @ X = B column by column; None if any column is inconsistent."""
    cols = []
    for col in transpose(b_cols):
        x = solve(a, col)
        if x is None:
            return None
        cols.append(x)
    return transpose(cols)


def det(a):
    n = len(a)
    rows = [[Fraction(x) for x in r] for r in a]
    d = Fraction(1)
    for c in range(n):
        idx = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if idx is None:
            return Fraction(0)
        if idx != c:
            rows[c], rows[idx] = rows[idx], rows[c]
            d = -d
        piv = rows[c][c]
        d *= piv
        rows[c] = [x / piv for x in rows[c]]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return d


def column_space_pivots(a):
    """Indices of a maximal independent set of columns."""
    return rref(a)[1]


def same_row_span(a, b):
    """Exact equality of row spans."""
    ra, pa = rref(a)
    rb, pb = rref(b)
    ra = [r for r in ra if any(x != 0 for x in r)]
    rb = [r for r in rb if any(x != 0 for x in r)]
    return ra == rb


def in_span(vec, rows):
    if not rows:
        return all(x == 0 for x in vec)
    a = transpose(rows)
    return solve(a, vec) is not None
