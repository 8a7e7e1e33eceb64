"""Monte Carlo oracle for Haar integrals of the covolume kernel.

Samples are uniform level-R points (R = cell level + 6 by default),
obtained by filling the free entries of the canonical form with uniform
digits; the kernel is evaluated exactly on the canonical lifts.  The
estimate therefore carries, besides the standard error, a discretization
bias bounded by q^(-R) times the measure still unresolved at depth R;
callers should fold that bound into comparison tolerances.

Equal-characteristic prime residue fields only (vectorized over GF(p)
polynomial coefficient arrays).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .grassmann import GrassPoint, enumerate_grassmannian, grassmannian_size
from .subspace import Subspace

DEFAULT_DEPTH_EXTRA = 6


def _scalar_coeff_row(field, row, width):
    out = np.zeros((len(row), width), dtype=np.int64)
    for j, x in enumerate(row):
        if x.is_zero():
            continue
        assert x.den == (1,) and x.m >= 0, "oracle requires polynomial entries"
        coeffs = (0,) * x.m + x.num
        assert len(coeffs) <= width
        out[j, : len(coeffs)] = coeffs
    return out


def _poly_mul_batch(a, b, q):
    s, da = a.shape
    db = b.shape[1]
    out = np.zeros((s, da + db - 1), dtype=np.int64)
    for i in range(da):
        col = a[:, i]
        if not col.any():
            continue
        out[:, i:i + db] += col[:, None] * b
    return out % q


def _det_batch(mat, q):
    """Determinant of a batch of polynomial matrices given as nested lists
    of (S, D) coefficient arrays."""
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return (_poly_mul_batch(mat[0][0], mat[1][1], q)
                - _poly_mul_batch(mat[0][1], mat[1][0], q)) % q
    total = None
    for j in range(n):
        minor = [[row[jj] for jj in range(n) if jj != j] for row in mat[1:]]
        term = _poly_mul_batch(mat[0][j], _det_batch(minor, q), q)
        if j % 2 == 1:
            term = (-term) % q
        if total is None:
            total = term
        else:
            width = max(total.shape[1], term.shape[1])
            if total.shape[1] < width:
                total = np.pad(total, ((0, 0), (0, width - total.shape[1])))
            if term.shape[1] < width:
                term = np.pad(term, ((0, 0), (0, width - term.shape[1])))
            total = (total + term) % q
    return total


def _kernel_values(e_coeffs, sample_rows, q):
    """s = q^(-ord det) for the stacked matrices; zero dets give s = 0."""
    s_count = sample_rows.shape[0]
    n = e_coeffs.shape[0] + sample_rows.shape[1]
    width = max(e_coeffs.shape[-1], sample_rows.shape[-1])

    def pad(a):
        if a.shape[-1] < width:
            return np.pad(a, [(0, 0)] * (a.ndim - 1) + [(0, width - a.shape[-1])])
        return a

    e = pad(e_coeffs)
    smp = pad(sample_rows)
    mat = []
    for i in range(e.shape[0]):
        mat.append([np.broadcast_to(e[i, j], (s_count, width)) for j in range(n)])
    for i in range(smp.shape[1]):
        mat.append([smp[:, i, j, :] for j in range(n)])
    det = _det_batch(mat, q)
    nz = det != 0
    has = nz.any(axis=1)
    v = np.where(has, nz.argmax(axis=1), 0)
    return np.where(has, np.power(float(q), -v.astype(np.float64)), 0.0)


def _sample_cell_rows(cell: GrassPoint, depth, count, rng, q):
    """Uniform canonical lifts of the cell at the given depth, as a
    (count, k, n, depth) digit array."""
    k, n, r = cell.k, cell.n, cell.r
    base = np.zeros((k, n, depth), dtype=np.int64)
    ring = cell.ring
    for i, row in enumerate(cell.rows):
        for j, e in enumerate(row):
            for d, c in enumerate(e):
                base[i, j, d] = c
    pivset = set(cell.pivots())
    free = [(i, j) for i in range(k) for j in range(n) if j not in pivset]
    rows = np.broadcast_to(base, (count, k, n, depth)).copy()
    if free and depth > r:
        digits = rng.integers(0, q, size=(count, len(free), depth - r), dtype=np.int64)
        for t_, (i, j) in enumerate(free):
            rows[:, i, j, r:] = digits[:, t_, :]
    return rows


def mc_cell_integral(E: Subspace, cell: GrassPoint, samples: int = 10**6,
                     seed: int = 0, depth: int | None = None, chunk: int = 200_000):
    """Monte Carlo estimate of the kernel integral over one cell.

    Returns a dict with the estimate and standard error (both already
    multiplied by the cell mass), the sampling depth, and the sample
    moments."""
    field = E.field
    if field.kind != "equichar" or field.e != 1:
        raise ValueError("oracle supports equal-characteristic prime q only")
    q = field.q
    depth = depth if depth is not None else cell.r + DEFAULT_DEPTH_EXTRA
    width = depth + 1
    e_coeffs = np.stack([_scalar_coeff_row(field, row, width) for row in E.rows]) \
        if E.dim else np.zeros((0, E.n, width), dtype=np.int64)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        rows = _sample_cell_rows(cell, depth, m, rng, q)
        if rows.shape[-1] < width:
            rows = np.pad(rows, ((0, 0), (0, 0), (0, 0), (0, width - rows.shape[-1])))
        vals = _kernel_values(e_coeffs, rows, q)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    se = math.sqrt(var / samples)
    mass = Fraction(1, grassmannian_size(cell.n, cell.k, q, cell.r))
    return {
        "estimate": mean * float(mass),
        "se": se * float(mass),
        "depth": depth,
        "samples": samples,
        "mean": mean,
        "mass": mass,
    }


def mc_matrix_entry(field, n, i, r, row_point, col_point, samples=10**6, seed=0,
                    depth=None):
    from .grassmann import lift_subspace

    return mc_cell_integral(lift_subspace(row_point), col_point, samples, seed, depth)


def mc_agreement(exact_value, mc_result, q, sigmas: float = 4.0, open_mass_bound=None):
    """Whether the exact value sits within `sigmas` standard errors of the
    Monte Carlo estimate.  The sampling discretization contributes a bias
    of at most q^(-depth) on each cell still unresolved at the sampling
    depth; a bound on that open mass tightens the tolerance rigorously."""
    bias = 0.0
    if open_mass_bound is not None:
        bias = float(open_mass_bound) * float(q) ** (-mc_result["depth"])
    tol = sigmas * mc_result["se"] + bias
    return abs(float(exact_value) - mc_result["estimate"]) <= tol, tol
