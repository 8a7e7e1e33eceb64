"""Integral transforms on finite-level Grassmannians, assembled exactly.

The covolume kernel s(M, N) = q^(-v) with v the determinant valuation of
the stacked primitive bases drives the cosine-type operator; the Radon
matrices are exact incidence averages; the Fourier transform transports
coefficients along the annihilator map with an explicitly computed
measure-duality scalar (observed to be 1 in lattice-normalized
coordinates, but always computed, never assumed).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import itertools

from .field import (INF, _equichar_row_polys, _poly_det, det_valuation,
                    padd, pmul, pneg, pord, ptrim)
from .grassmann import (
    GrassPoint,
    LevelIndex,
    annihilator_point,
    enumerate_grassmannian,
    grassmannian_size,
    lift_subspace,
    pair_orbit_invariant,
    point_contains,
)
from .integrate import IntegratorOptions, adaptive_cell_integral
from .intervals import CertValue, cert_sum
from .subspace import Subspace
from .valuation import LevelValuation, dual_space


# ---------------------------------------------------------------------------
# the kernel
# ---------------------------------------------------------------------------

def kernel_s(M: Subspace, N: Subspace) -> Fraction:
    """Normalized covolume of (M cap Lambda) + (N cap Lambda) in the ambient
    lattice; zero when M + N is a proper subspace."""
    if M.n != N.n or M.field != N.field:
        raise ValueError("kernel requires subspaces of one ambient space")
    if M.dim + N.dim != M.n:
        raise ValueError(f"kernel needs complementary dimensions, got {M.dim}+{N.dim} != {M.n}")
    v = det_valuation([list(r) for r in M.rows + N.rows], M.field)
    if v is INF:
        return Fraction(0)
    return Fraction(1, M.field.q**v)


def _kernel_assembler(E: Subspace):
    field = E.field
    q = field.q
    if field.kind == "equichar":
        # polynomial fast path: clear unit denominators per row (valuation
        # preserving), precompute the Laplace minors of the fixed block, and
        # evaluate each cell with division-free tuple arithmetic
        g = field.gf
        e_polys = []
        shift = 0
        for row in E.rows:
            p, s = _equichar_row_polys(field, row)
            e_polys.append(p)
            shift += s
        n = E.n
        i = len(e_polys)
        top_minors = []
        for cols in itertools.combinations(range(n), i):
            sub = [[e_polys[a][b] for b in cols] for a in range(i)]
            minor = _poly_det(g, sub)
            if minor:
                sign = (sum(cols) + i * (i - 1) // 2) % 2
                comp = tuple(b for b in range(n) if b not in cols)
                top_minors.append((comp, sign, minor))

        def assemble(cells, depth):
            (cell,) = cells
            rows = cell.rows
            acc = ()
            for comp, sign, minor in top_minors:
                sub = [[r[b] for b in comp] for r in rows]
                term = pmul(g, minor, _poly_det(g, sub))
                acc = padd(g, acc, pneg(g, term) if sign else term)
            o = pord(acc)
            bound = Fraction(1, q**depth)
            if o is INF:
                return Fraction(0), False, bound
            v = o + shift
            return Fraction(1, q**v), v < depth, bound

        return assemble

    e_rows = [list(r) for r in E.rows]

    def assemble(cells, depth):
        (cell,) = cells
        ring = cell.ring
        rows = e_rows + [[ring.lift_scalar(x) for x in row] for row in cell.rows]
        v = det_valuation(rows, field)
        bound = Fraction(1, q**depth)
        if v is INF:
            return Fraction(0), False, bound
        return Fraction(1, q**v), v < depth, bound

    return assemble


def haar_integrate(E: Subspace, cell: GrassPoint, options: IntegratorOptions | None = None,
                   assembler=None):
    """Integral of s(E, .) over the level cell of the Grassmannian carrying
    `cell`, with respect to the invariant probability measure.  Returns
    (CertValue, IntegralStats); the value is exact when every refinement
    closes or the closing contributions certify a geometric tail."""
    if assembler is None:
        if E.dim + cell.k != E.n:
            raise ValueError("integrand requires complementary dimensions")
        assembler = _kernel_assembler(E)
    return adaptive_cell_integral(assembler, [(cell,)], cell.r, E.field.q, options)


# ---------------------------------------------------------------------------
# operator matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorMatrix:
    transform: str
    meta: dict
    row_index: LevelIndex
    col_index: LevelIndex
    entries: tuple  # tuple of tuples of CertValue

    def entry(self, i, j) -> CertValue:
        return self.entries[i][j]

    def is_exact(self) -> bool:
        return all(c.is_point for row in self.entries for c in row)

    def max_width(self) -> Fraction:
        return max((c.width for row in self.entries for c in row), default=Fraction(0))

    def statuses(self):
        hist = {}
        for row in self.entries:
            for c in row:
                hist[c.status] = hist.get(c.status, 0) + 1
        return hist

    def fraction_entries(self):
        return [[c.point() for c in row] for row in self.entries]

    def apply(self, coeffs):
        out = []
        for row in self.entries:
            out.append(cert_sum(c * x for c, x in zip(row, coeffs)))
        return out

    def apply_valuation(self, v: LevelValuation) -> LevelValuation:
        assert v.index.meta() == self.col_index.meta()
        coeffs = self.apply(v.coeffs)
        m = self.row_index
        return LevelValuation(v.field, m.n, m.k, m.r, tuple(coeffs), v.space, v.twist)

    def row_sums(self):
        return [cert_sum(row) for row in self.entries]

    def to_json(self):
        return {
            "transform": self.transform,
            "meta": dict(self.meta),
            "rows": self.row_index.meta(),
            "cols": self.col_index.meta(),
            "entries": [[c.to_json() for c in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data):
        from .field import FieldModel

        def make_index(meta):
            kind, q, n, k, r = meta
            return enumerate_grassmannian(FieldModel(kind, q), n, k, r)

        entries = tuple(tuple(CertValue.from_json(c) for c in row) for row in data["entries"])
        return cls(data["transform"], data["meta"], make_index(tuple(data["rows"])),
                   make_index(tuple(data["cols"])), entries)


def cosine_matrix(field, n, i, r, options: IntegratorOptions | None = None,
                  validate_broadcast: bool = True) -> OperatorMatrix:
    """Matrix of the cosine-type operator from level-r functions on the
    rank-(n-i) Grassmannian to level-r functions on the rank-i one.

    Entry (M, N) is the integral of s(lift M, .) over the cell of N.  At
    r=1 entries depend only on the orbit invariant of the pair, so one
    integral per orbit is computed and broadcast (optionally validated on
    a second representative)."""
    rows = enumerate_grassmannian(field, n, i, r)
    cols = enumerate_grassmannian(field, n, n - i, r)
    opts = options or IntegratorOptions()

    def integral(mpt, npt):
        value, _stats = haar_integrate(lift_subspace(mpt), npt, opts)
        return value

    entries = []
    if r == 1:
        cache = {}
        seen_twice = set()
        for mpt in rows:
            row = []
            for npt in cols:
                key = pair_orbit_invariant(mpt, npt)
                if key not in cache:
                    cache[key] = integral(mpt, npt)
                elif validate_broadcast and key not in seen_twice:
                    seen_twice.add(key)
                    check = integral(mpt, npt)
                    assert check == cache[key], (
                        f"orbit broadcast mismatch at invariant {key}")
                row.append(cache[key])
            entries.append(tuple(row))
    else:
        for mpt in rows:
            E = lift_subspace(mpt)
            entries.append(tuple(haar_integrate(E, npt, opts)[0] for npt in cols))

    meta = {"q": field.q, "model": field.kind, "n": n, "k": i, "r": r,
            "depth_extra": opts.depth_extra, "tol_exp": opts.tol_exp}
    return OperatorMatrix("cosine", meta, rows, cols, tuple(entries))


def radon_matrix(field, n, p, qdim, r) -> OperatorMatrix:
    """Averaging operator from functions on rank-p summands to functions on
    rank-qdim summands: the row of E averages uniformly over the rank-p
    free summands contained in E.  Exact and row-stochastic."""
    if not (0 <= p < qdim <= n):
        raise ValueError(f"need 0 <= p < qdim <= n, got p={p}, qdim={qdim}, n={n}")
    rows = enumerate_grassmannian(field, n, qdim, r)
    cols = enumerate_grassmannian(field, n, p, r)
    count = grassmannian_size(qdim, p, field.q, r)
    w = CertValue.exact(Fraction(1, count))
    z = CertValue.exact(0)
    entries = tuple(
        tuple(w if point_contains(e, f) else z for f in cols) for e in rows)
    meta = {"q": field.q, "model": field.kind, "n": n, "p": p, "qdim": qdim, "r": r}
    return OperatorMatrix("radon", meta, rows, cols, entries)


def radon_avg_containing(field, n, p, qdim, r) -> OperatorMatrix:
    """Companion averaging operator in the other direction: the row of a
    rank-p summand W averages uniformly over the rank-qdim summands
    containing W."""
    if not (0 <= p < qdim <= n):
        raise ValueError(f"need 0 <= p < qdim <= n, got p={p}, qdim={qdim}, n={n}")
    rows = enumerate_grassmannian(field, n, p, r)
    cols = enumerate_grassmannian(field, n, qdim, r)
    count = grassmannian_size(n - p, qdim - p, field.q, r)
    w = CertValue.exact(Fraction(1, count))
    z = CertValue.exact(0)
    entries = tuple(
        tuple(w if point_contains(f, e) else z for f in cols) for e in rows)
    meta = {"q": field.q, "model": field.kind, "n": n, "p": p, "qdim": qdim, "r": r,
            "direction": "containing"}
    return OperatorMatrix("radon-containing", meta, rows, cols, entries)


# ---------------------------------------------------------------------------
# Fourier transform
# ---------------------------------------------------------------------------

@lru_cache(maxsize=65536)
def fourier_chain_scalar(E: Subspace):
    """Scalar by which the measure-duality chain multiplies the normalized
    measure on E when transported to its annihilator.

    The chain passes through the dual of E, the quotient of the dual space
    by the annihilator, and the density line of the ambient dual; each leg
    contributes an explicit covolume.  Returns (scalar, evidence)."""
    f, n, k = E.field, E.n, E.dim
    H = E.annihilator()
    comp = H.lattice_complement()  # k rows; quotient-lattice reference basis
    zero = f.zero()

    # covolume of the quotient lattice of the dual, restricted to E, against
    # the lattice dual to E cap Lambda (coordinates dual to the primitive basis)
    pair_rows = []
    for c_row in comp:
        pair_rows.append([
            sum((c_row[j] * e_row[j] for j in range(n)), zero) for e_row in E.rows])
    v_restrict = det_valuation(pair_rows, f) if k else 0

    # covolume of (H cap Lambda) + complement against the full dual lattice
    v_split = det_valuation([list(r) for r in H.rows + comp], f)

    assert v_restrict is not INF and v_split is not INF
    scalar = Fraction(f.q) ** (v_split - v_restrict)
    return scalar, {"v_restrict": v_restrict, "v_split": v_split}


@lru_cache(maxsize=4096)
def _ann_cached(pt):
    return annihilator_point(pt)


@lru_cache(maxsize=256)
def fourier(v: LevelValuation) -> LevelValuation:
    """Coefficient transport along the annihilator bijection, times the
    measure-chain scalar; an involution together with the twist flip."""
    field, n, k, r = v.field, v.n, v.k, v.r
    target = enumerate_grassmannian(field, n, n - k, r)
    coeffs = [None] * len(target)
    for pt, c in zip(v.index, v.coeffs):
        sc, _ = fourier_chain_scalar(lift_subspace(pt))
        coeffs[target.index(_ann_cached(pt))] = c * CertValue.exact(sc)
    return LevelValuation(field, n, n - k, r, tuple(coeffs),
                          dual_space(v.space), 1 - v.twist)


@lru_cache(maxsize=256)
def fourier_inv(w: LevelValuation) -> LevelValuation:
    """Inverse transport: fourier(fourier_inv(w)) == w."""
    field, n, k, r = w.field, w.n, w.k, w.r
    target = enumerate_grassmannian(field, n, n - k, r)
    coeffs = [None] * len(target)
    for hpt, c in zip(w.index, w.coeffs):
        ept = _ann_cached(hpt)
        sc, _ = fourier_chain_scalar(lift_subspace(ept))
        coeffs[target.index(ept)] = c * CertValue.exact(Fraction(1) / sc)
    return LevelValuation(field, n, n - k, r, tuple(coeffs),
                          dual_space(w.space), 1 - w.twist)


def fourier_eval(v: LevelValuation, H: Subspace) -> CertValue:
    """Pointwise value of fourier(v) at an exact subspace of the dual."""
    if H.dim != v.n - v.k:
        raise ValueError("dimension mismatch in pointwise Fourier evaluation")
    E = H.annihilator()
    sc, _ = fourier_chain_scalar(E)
    return v.at_point(E.reduce(v.r)) * CertValue.exact(sc)


def fourier_matrix(field, n, k, r) -> OperatorMatrix:
    """Exact matrix of the Fourier transport on level-r coefficients."""
    src = enumerate_grassmannian(field, n, k, r)
    dst = enumerate_grassmannian(field, n, n - k, r)
    z = CertValue.exact(0)
    cols = {}
    observed = set()
    for j, pt in enumerate(src):
        sc, _ = fourier_chain_scalar(lift_subspace(pt))
        observed.add(sc)
        cols[(dst.index(annihilator_point(pt)), j)] = CertValue.exact(sc)
    entries = tuple(
        tuple(cols.get((i, j), z) for j in range(len(src))) for i in range(len(dst)))
    meta = {"q": field.q, "model": field.kind, "n": n, "k": k, "r": r,
            "observed_scalars": sorted(str(s) for s in observed)}
    return OperatorMatrix("fourier", meta, dst, src, entries)
