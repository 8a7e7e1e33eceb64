"""Pull-back, push-forward, exterior product, product, convolution and the
duality pairing on finite-level valuations.

Measure bookkeeping convention: every subspace, quotient and density line
carries the basis normalized on the corresponding lattice (intersection,
quotient image, or product), so each structural isomorphism contributes an
explicit covolume factor q^(+-v) computed as a determinant valuation of a
change-of-basis matrix.  Quadratures integrate the single nonnegative
kernel q^(-v(det M)) per pair of level cells, where M expresses a fixed
exact subspace in quotient-normalized coordinates; a cell certifies as
closed when v is smaller than the refinement depth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import exactlinalg as xl
from .field import INF, det_valuation, field_rank, solve_in_span
from .grassmann import (
    GrassPoint,
    enumerate_grassmannian,
    lift_subspace,
)
from .integrate import IntegratorOptions, adaptive_cell_integral
from .intervals import CertValue, cert_sum
from .subspace import Subspace
from .transforms import cosine_matrix, fourier, fourier_chain_scalar, fourier_inv, radon_avg_containing
from .valuation import LevelValuation, PRIMAL, ValSubspaceBasis, val_space_basis


# ---------------------------------------------------------------------------
# linear maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearMap:
    """Row-vector convention: the image of x is x @ rows, so `rows` has one
    row per domain coordinate holding the image of that basis vector."""

    field: object
    dom: int
    cod: int
    rows: tuple

    @classmethod
    def from_rows(cls, field, rows):
        rows = tuple(tuple(r) for r in rows)
        dom = len(rows)
        cod = len(rows[0]) if rows else 0
        return cls(field, dom, cod, rows)

    @classmethod
    def identity(cls, field, n):
        one, z = field.one(), field.zero()
        return cls(field, n, n, tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)))

    @classmethod
    def coordinate_inclusion(cls, field, dom, cod, offset=0):
        one, z = field.one(), field.zero()
        return cls(field, dom, cod,
                   tuple(tuple(one if j == i + offset else z for j in range(cod)) for i in range(dom)))

    @classmethod
    def coordinate_projection(cls, field, dom, cod, offset=0):
        one, z = field.one(), field.zero()
        return cls(field, dom, cod,
                   tuple(tuple(one if i == j + offset else z for j in range(cod)) for i in range(dom)))

    @classmethod
    def diagonal_embedding(cls, field, n):
        one, z = field.one(), field.zero()
        return cls(field, n, 2 * n,
                   tuple(tuple(one if j % n == i else z for j in range(2 * n)) for i in range(n)))

    @classmethod
    def addition(cls, field, n):
        one, z = field.one(), field.zero()
        return cls(field, 2 * n, n,
                   tuple(tuple(one if j == i % n else z for j in range(n)) for i in range(2 * n)))

    def dual(self) -> "LinearMap":
        """Transpose matrix: the dual map between dual spaces."""
        cols = tuple(tuple(self.rows[i][j] for i in range(self.dom)) for j in range(self.cod))
        return LinearMap(self.field, self.cod, self.dom, cols)

    def apply(self, vec):
        z = self.field.zero()
        out = [z] * self.cod
        for c, row in zip(vec, self.rows):
            if not c.is_zero():
                for j in range(self.cod):
                    out[j] = out[j] + c * row[j]
        return tuple(out)

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self after other (dom(other) -> cod(self))."""
        assert other.cod == self.dom
        return LinearMap(self.field, other.dom, self.cod,
                         tuple(self.apply(r) for r in other.rows))

    def image_subspace(self, sub: Subspace) -> Subspace:
        return Subspace(self.field, self.cod, [self.apply(r) for r in sub.rows])

    def full_image(self) -> Subspace:
        return Subspace(self.field, self.cod, self.rows)

    def kernel_subspace(self) -> Subspace:
        f = self.field
        if self.dom == 0:
            return Subspace.zero(f, 0)
        cols = [[self.rows[i][j] for i in range(self.dom)] for j in range(self.cod)]
        sols = _field_nullspace(cols, f, self.dom)
        return Subspace(f, self.dom, sols)

    def preimage_subspace(self, sub: Subspace) -> Subspace:
        """Full preimage of sub (contains the kernel)."""
        f = self.field
        ann = sub.annihilator()
        if not ann.rows:
            return Subspace.full(f, self.dom)
        conditions = []
        for a in ann.rows:
            conditions.append([
                sum((self.rows[i][j] * a[j] for j in range(self.cod)), f.zero())
                for i in range(self.dom)])
        sols = _field_nullspace(conditions, f, self.dom)
        return Subspace(f, self.dom, sols)

    def det_val(self):
        if self.dom != self.cod:
            raise ValueError("determinant of a non-square map")
        return det_valuation([list(r) for r in self.rows], self.field)

    def is_integral(self):
        return all(x.val() >= 0 for r in self.rows for x in r if not x.is_zero())

    def to_json(self):
        return {"dom": self.dom, "cod": self.cod,
                "rows": [[x.encode() for x in r] for r in self.rows]}

    @classmethod
    def from_json(cls, field, data):
        rows = tuple(tuple(field.parse(x) for x in r) for r in data["rows"])
        return cls(field, data["dom"], data["cod"], rows)


def _field_nullspace(rows, field, width):
    """Solutions x (length width) of rows . x = 0, one condition per row."""
    work = [list(r) for r in rows]
    m = len(work)
    pivots = []
    r = 0
    for c in range(width):
        idx = next((i for i in range(r, m) if not work[i][c].is_zero()), None)
        if idx is None:
            continue
        work[r], work[idx] = work[idx], work[r]
        piv = work[r][c]
        work[r] = [x / piv for x in work[r]]
        for i in range(m):
            if i != r and not work[i][c].is_zero():
                fct = work[i][c]
                work[i] = [x - fct * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    pivset = set(pivots)
    basis = []
    for j in range(width):
        if j in pivset:
            continue
        vec = [field.zero()] * width
        vec[j] = field.one()
        for ri, c in enumerate(pivots):
            vec[c] = -work[ri][j]
        basis.append(tuple(vec))
    return basis


# ---------------------------------------------------------------------------
# density pull-back and pointwise valuation pull-back
# ---------------------------------------------------------------------------

def density_pullback(F: LinearMap, scale=Fraction(1)) -> Fraction:
    """Coefficient of the normalized target measure for nu(A) = mu(F(A));
    zero when F is singular."""
    v = F.det_val()
    if v is INF:
        return Fraction(0)
    q = F.field.q
    return Fraction(scale) * (Fraction(1, q**v) if v >= 0 else Fraction(q ** (-v)))


def _transport_factor(F: LinearMap, source: Subspace, target: Subspace):
    """Valuation of det of F restricted source -> target in the primitive
    bases (INF means the restriction is singular)."""
    coords = []
    for row in source.rows:
        c = target.coords_of(F.apply(row))
        assert c is not None, "image vector escaped the target subspace"
        coords.append(list(c))
    return det_valuation(coords, F.field)


def pullback_eval(F: LinearMap, f: LevelValuation, E: Subspace) -> CertValue:
    """Value of the pulled-back valuation at an exact subspace of the domain."""
    if E.dim != f.k:
        raise ValueError("pull-back evaluated on a subspace of the wrong dimension")
    if E.n != F.dom or f.n != F.cod:
        raise ValueError("pull-back dimensions do not match the map")
    B = F.image_subspace(E)
    if B.dim < f.k:
        return CertValue.exact(0)
    v = _transport_factor(F, E, B)
    if v is INF:
        return CertValue.exact(0)
    q = F.field.q
    factor = Fraction(1, q**v) if v >= 0 else Fraction(q ** (-v))
    return f.at_point(B.reduce(f.r)) * CertValue.exact(factor)


def pullback_matrix(g: LinearMap, k: int, r: int):
    """Matrix transporting level-r coefficients along E -> g(E).

    Exact operator matrix for integral g of unit determinant valuation and
    for coordinate inclusions; for integral diagonal maps with uniformizer
    entries it is the class-transport matrix validated pointwise at the
    canonical lifts.  Anything else must go through pullback_eval."""
    from .transforms import OperatorMatrix

    field = g.field
    if g.dom == g.cod and g.is_integral():
        unit_det = g.det_val() == 0
    else:
        unit_det = False
    inclusion = (g.dom <= g.cod and g.rows ==
                 LinearMap.coordinate_inclusion(field, g.dom, g.cod).rows)
    diagonal = (g.dom == g.cod and g.is_integral()
                and all(g.rows[i][j].is_zero() for i in range(g.dom)
                        for j in range(g.cod) if i != j))
    if not (unit_det or inclusion or diagonal):
        raise ValueError("map is not level-compatible; evaluate with pullback_eval")

    rows_ix = enumerate_grassmannian(field, g.dom, k, r)
    cols_ix = enumerate_grassmannian(field, g.cod, k, r)
    q = field.q
    z = CertValue.exact(0)
    entries = [[z] * len(cols_ix) for _ in rows_ix]
    for i, pt in enumerate(rows_ix):
        E = lift_subspace(pt)
        B = g.image_subspace(E)
        if B.dim < k:
            continue
        v = _transport_factor(g, E, B)
        factor = Fraction(1, q**v) if v >= 0 else Fraction(q ** (-v))
        entries[i][cols_ix.index(B.reduce(r))] = CertValue.exact(factor)
    meta = {"q": q, "model": field.kind, "dom": g.dom, "cod": g.cod, "k": k, "r": r,
            "exact_operator": bool(unit_det or inclusion)}
    return OperatorMatrix("pullback", meta, rows_ix, cols_ix,
                          tuple(tuple(row) for row in entries))


# ---------------------------------------------------------------------------
# push-forward (twisted valuations)
# ---------------------------------------------------------------------------

def _qpow(q, v):
    return Fraction(1, q**v) if v >= 0 else Fraction(q ** (-v))


def _complement_within(sub: Subspace, big: Subspace):
    """Lattice vectors completing prim(sub) to a primitive basis of big."""
    f = sub.field
    if sub.dim == big.dim:
        return ()
    coords = [big.coords_of(r) for r in sub.rows]
    coord_sub = Subspace(f, big.dim, coords) if coords else Subspace.zero(f, big.dim)
    comp = coord_sub.lattice_complement()
    out = []
    for cc in comp:
        vec = [f.zero()] * big.n
        for c, brow in zip(cc, big.rows):
            if not c.is_zero():
                vec = [x + c * y for x, y in zip(vec, brow)]
        out.append(tuple(vec))
    return tuple(out)


def pushforward_eval(F: LinearMap, v: LevelValuation, E: Subspace,
                     path: str = "explicit") -> CertValue:
    """Value of the push-forward of a density-dual twisted valuation at an
    exact subspace of the codomain.

    path "explicit" uses the structural transport formulas (split by F
    injective / surjective); path "definitional" conjugates the dual-map
    pull-back by the Fourier transport.  Both are exact; their agreement
    is a verified property."""
    if v.twist != 1:
        raise ValueError("push-forward acts on density-dual twisted valuations")
    if v.n != F.dom:
        raise ValueError("valuation lives on the wrong space")
    expected = v.k + F.cod - F.dom
    if E.dim != expected:
        raise ValueError(f"push-forward evaluation needs dim {expected}, got {E.dim}")
    if path == "definitional":
        return _pushforward_definitional(F, v, E)
    K = F.kernel_subspace()
    if K.dim == 0:
        return _pushforward_injective_eval(F, v, E)
    if F.full_image().dim == F.cod:
        return _pushforward_surjective_eval(F, v, E)
    # neither injective nor surjective: the Fourier-conjugated route stays
    # pointwise exact for arbitrary maps
    return _pushforward_definitional(F, v, E)


def _pushforward_definitional(F, v, E):
    u = fourier_inv(v)
    H = E.annihilator()
    w_val = pullback_eval(F.dual(), u, H)
    sc, _ = fourier_chain_scalar(H)
    return w_val * CertValue.exact(sc)


def _pushforward_injective_eval(F, v, E):
    field, q = F.field, F.field.q
    Ximg = F.full_image()
    if field_rank([list(r) for r in E.rows + Ximg.rows], field) < F.cod:
        return CertValue.exact(0)
    E0 = E.intersect(Ximg)
    assert E0.dim == v.k, "intersection dimension must match the source degree"
    E0p = F.preimage_subspace(E0)
    assert E0p.dim == v.k
    # transport X -> F(X): restriction and ambient determinant valuations
    v_sub = _transport_factor(F, E0p, E0) if v.k else 0
    std = Subspace.full(field, F.dom)
    v_amb = _transport_factor(F, std, Ximg)
    # inclusion F(X) into Y: splitting, quotient identification E/E0 = Y/F(X)
    comp_X = Ximg.lattice_complement()
    w1 = det_valuation([list(r) for r in Ximg.rows + tuple(comp_X)], field)
    CE = _complement_within(E0, E)
    basis = list(Ximg.rows) + list(comp_X)
    tail = []
    for row in CE:
        c = solve_in_span(row, basis, field)
        assert c is not None
        tail.append(list(c[Ximg.dim:]))
    w2 = det_valuation(tail, field) if tail else 0
    assert INF not in (v_sub, v_amb, w1, w2)
    factor = _qpow(q, -(v_sub - v_amb + w1 - w2))
    return v.at_point(E0p.reduce(v.r)) * CertValue.exact(factor)


def _pushforward_surjective_eval(F, v, E):
    field, q = F.field, F.field.q
    K = F.kernel_subspace()
    Etil = F.preimage_subspace(E)
    assert Etil.dim == v.k
    CK_in = _complement_within(K, Etil)
    u2_rows = []
    for row in CK_in:
        c = E.coords_of(F.apply(row))
        assert c is not None
        u2_rows.append(list(c))
    u2 = det_valuation(u2_rows, field) if u2_rows else 0
    comp_K = K.lattice_complement()
    u3a = det_valuation([list(r) for r in K.rows + tuple(comp_K)], field)
    u3b = det_valuation([list(F.apply(r)) for r in comp_K], field) if comp_K else 0
    assert INF not in (u2, u3a, u3b)
    factor = _qpow(q, -(u2 + u3a - u3b))
    return v.at_point(Etil.reduce(v.r)) * CertValue.exact(factor)


def pushforward(F: LinearMap, v: LevelValuation, path: str = "explicit") -> LevelValuation:
    """Push-forward materialized on level-r classes of the codomain via the
    canonical lifts.  For surjective coordinate-split maps this is the exact
    level-r representation; in general the push-forward of a level function
    need not be a level function, and pushforward_is_level_exact reports
    whether the table is faithful."""
    expected = v.k + F.cod - F.dom
    field = v.field
    if expected < 0 or expected > F.cod:
        raise ValueError("push-forward lands outside the grading range")
    target = enumerate_grassmannian(field, F.cod, expected, v.r)
    coeffs = [pushforward_eval(F, v, lift_subspace(pt), path) for pt in target]
    return LevelValuation(field, F.cod, expected, v.r, tuple(coeffs), v.space, 1)


def pushforward_is_level_exact(F: LinearMap, v: LevelValuation, probes: int = 2) -> bool:
    """Check on deeper lifts whether the push-forward is constant on the
    level-r cells of the codomain."""
    expected = v.k + F.cod - F.dom
    target = enumerate_grassmannian(v.field, F.cod, expected, v.r)
    from .grassmann import fiber_points

    for pt in target:
        base = pushforward_eval(F, v, lift_subspace(pt))
        for deep in fiber_points(pt, v.r + 1)[:probes]:
            if pushforward_eval(F, v, lift_subspace(deep)) != base:
                return False
    return True


# ---------------------------------------------------------------------------
# quadrature kernel shared by product and exterior product
# ---------------------------------------------------------------------------

def _leg_quotient_columns(field, E_rows, block, cell):
    """Quotient-lattice coordinates of the restricted rows of E for one leg.

    block = (offset, width): coordinate slab of the leg's ambient factor;
    cell: level point of the leg's Grassmannian at the current depth.
    The canonical echelon structure gives the coordinates in closed form:
    the primitive-basis coefficients are the entries at the pivot columns,
    and the quotient coordinate at a free column f is
    e[f] - sum_l e[pivot_l] * prim_l[f].
    """
    off, width = block
    ring = cell.ring
    prim = [tuple(ring.lift_scalar(x) for x in row) for row in cell.rows]
    piv = cell.pivots()
    free = [j for j in range(width) if j not in set(piv)]
    cols = []
    for e_row in E_rows:
        seg = e_row[off:off + width]
        out = []
        for f in free:
            acc = seg[f]
            for l, jl in enumerate(piv):
                acc = acc - seg[jl] * prim[l][f]
            out.append(acc)
        cols.append(out)
    return cols


def _pair_kernel_assembler(field, E: Subspace, blocks):
    """Assembler for the kernel q^(-v(det M)) where M maps E into the product
    of the legs' quotients.  blocks: list of (offset,width) per leg."""
    q = field.q
    dim = E.dim
    if field.kind == "equichar":
        return _pair_kernel_assembler_fast(field, E, blocks)

    e_rows = [list(r) for r in E.rows]

    def assemble(cells, depth):
        mat = [[] for _ in range(dim)]
        for block, cell in zip(blocks, cells):
            cols = _leg_quotient_columns(field, e_rows, block, cell)
            for i in range(dim):
                mat[i].extend(cols[i])
        assert all(len(row) == dim for row in mat), "quotient dimensions mismatch"
        v = det_valuation(mat, field)
        bound = Fraction(1, q**depth)
        if v is INF:
            return Fraction(0), False, bound
        return Fraction(1, q**v), v < depth, bound

    return assemble


def _pair_kernel_assembler_fast(field, E: Subspace, blocks):
    """Equal-characteristic fast path on raw coefficient tuples; rows of E
    are cleared of their (unit) denominators first, which only scales the
    determinant by units."""
    from .field import _equichar_row_polys, _poly_det, pord, psub, pmul, ptrim

    g = field.gf
    q = field.q
    dim = E.dim
    e_polys = []
    shift = 0
    for row in E.rows:
        p, s = _equichar_row_polys(field, row)
        e_polys.append(p)
        shift += s

    def assemble(cells, depth):
        mat = [[] for _ in range(dim)]
        for (off, width), cell in zip(blocks, cells):
            prim = [tuple(ptrim(x) for x in row) for row in cell.rows]
            piv = cell.pivots()
            free = [j for j in range(width) if j not in set(piv)]
            for i in range(dim):
                seg = e_polys[i][off:off + width]
                for f in free:
                    acc = seg[f]
                    for l, jl in enumerate(piv):
                        acc = psub(g, acc, pmul(g, seg[jl], prim[l][f]))
                    mat[i].append(acc)
        assert all(len(row) == dim for row in mat), "quotient dimensions mismatch"
        o = pord(_poly_det(g, mat))
        bound = Fraction(1, q**depth)
        if o is INF:
            return Fraction(0), False, bound
        v = o + shift
        return Fraction(1, q**v), v < depth, bound

    return assemble


_PAIR_CACHE: dict = {}


def pair_cell_integral(E: Subspace, blocks, cells, options=None):
    """Certified integral of the quotient kernel over a product of cells."""
    key = (E, tuple(blocks), tuple(cells),
           options.depth_extra if options else None,
           options.tol_exp if options else None)
    hit = _PAIR_CACHE.get(key)
    if hit is not None:
        return hit
    assembler = _pair_kernel_assembler(E.field, E, blocks)
    value, _stats = adaptive_cell_integral(assembler, [tuple(cells)], cells[0].r,
                                           E.field.q, options)
    _PAIR_CACHE[key] = value
    return value


def clear_quadrature_cache():
    _PAIR_CACHE.clear()


# ---------------------------------------------------------------------------
# preimages under the cosine operator
# ---------------------------------------------------------------------------

def cosine_preimage(v: LevelValuation, matrix=None, alternate: bool = False):
    """Exact solution x of (cosine matrix) x = v, as a tuple of Fractions on
    the complementary Grassmannian.  With alternate=True a second solution
    differing by a kernel vector is returned when the kernel is nonzero."""
    op = matrix if matrix is not None else cosine_matrix(v.field, v.n, v.k, v.r)
    A = op.fraction_entries()
    if not v.is_exact():
        return _interval_preimage(A, v)
    x = xl.solve(A, v.fractions())
    if x is None:
        raise ValueError("valuation is not in the image of the cosine operator")
    if alternate:
        null = xl.nullspace(A)
        if null:
            x = [a + b for a, b in zip(x, null[0])]
    return tuple(CertValue.exact(c) for c in x)


def _interval_preimage(A, v):
    mid = [c.midpoint() for c in v.coeffs]
    x_mid = xl.solve(A, mid)
    if x_mid is None:
        raise ValueError("midpoint system inconsistent; cannot enclose a preimage")
    # linear response bound: resolve each unit deviation through the same
    # pivot structure
    m = len(A)
    widths = [c.width / 2 for c in v.coeffs]
    bounds = [Fraction(0)] * len(x_mid)
    for j in range(m):
        if widths[j] == 0:
            continue
        e = [Fraction(0)] * m
        e[j] = Fraction(1)
        resp = xl.solve(A, e)
        if resp is None:
            raise ValueError("deviation direction leaves the column space; "
                             "cannot enclose a preimage")
        for i, rv in enumerate(resp):
            bounds[i] += abs(rv) * widths[j]
    return tuple(CertValue.hull(xm - b, xm + b) for xm, b in zip(x_mid, bounds))


# ---------------------------------------------------------------------------
# product and exterior product
# ---------------------------------------------------------------------------

def product_eval(phi: LevelValuation, psi: LevelValuation, E: Subspace,
                 options=None, pre_phi=None, pre_psi=None) -> CertValue:
    """Value of the product at one exact subspace (dim = sum of degrees)."""
    _check_product_args(phi, psi)
    n, field = phi.n, phi.field
    if E.dim != phi.k + psi.k:
        raise ValueError("product evaluated at a subspace of the wrong dimension")
    f_pre = pre_phi if pre_phi is not None else cosine_preimage(phi)
    g_pre = pre_psi if pre_psi is not None else cosine_preimage(psi)
    idx_f = enumerate_grassmannian(field, n, n - phi.k, phi.r)
    idx_g = enumerate_grassmannian(field, n, n - psi.k, psi.r)
    blocks = [(0, n), (0, n)]
    total = CertValue.exact(0)
    for a, fa in enumerate(f_pre):
        if fa.is_point and fa.point() == 0:
            continue
        for b, gb in enumerate(g_pre):
            if gb.is_point and gb.point() == 0:
                continue
            w = pair_cell_integral(E, blocks, (idx_f[a], idx_g[b]), options)
            total = total + fa * gb * w
    return total


def product(phi: LevelValuation, psi: LevelValuation, options=None,
            pre_phi=None, pre_psi=None) -> LevelValuation:
    """Graded commutative product; the unit is the degree-0 element."""
    _check_product_args(phi, psi)
    n, field, r = phi.n, phi.field, phi.r
    k = phi.k + psi.k
    if k > n:
        warnings.warn("product degree exceeds the ambient dimension; returning zero")
        return LevelValuation.zero(field, n, n, r, phi.space, phi.twist)
    f_pre = pre_phi if pre_phi is not None else cosine_preimage(phi)
    g_pre = pre_psi if pre_psi is not None else cosine_preimage(psi)
    target = enumerate_grassmannian(field, n, k, r)
    coeffs = [product_eval(phi, psi, lift_subspace(pt), options, f_pre, g_pre)
              for pt in target]
    return LevelValuation(field, n, k, r, tuple(coeffs), phi.space, phi.twist)


def _check_product_args(phi, psi):
    if (phi.field, phi.n, phi.r, phi.space) != (psi.field, psi.n, psi.r, psi.space):
        raise ValueError("product factors live on different spaces")
    if phi.twist != 0 or psi.twist != 0:
        raise ValueError("product is defined on untwisted valuations")


def exterior_product_eval(phi: LevelValuation, psi_preimage, psi_meta,
                          E: Subspace, options=None, pre_phi=None) -> CertValue:
    """Value of (phi boxtimes psi) at an exact subspace of the product space.

    psi is presented by a preimage section on the complementary Grassmannian
    of its own factor: psi_preimage is the coefficient tuple, psi_meta =
    (nY, j) gives the factor dimension and the degree.  The first factor's
    preimage is solved internally (or supplied)."""
    nY, j = psi_meta
    nX, i = phi.n, phi.k
    field = phi.field
    if E.n != nX + nY or E.dim != i + j:
        raise ValueError("exterior product evaluated at incompatible subspace")
    f_pre = pre_phi if pre_phi is not None else cosine_preimage(phi)
    idx_f = enumerate_grassmannian(field, nX, nX - i, phi.r)
    idx_g = enumerate_grassmannian(field, nY, nY - j, phi.r)
    blocks = [(0, nX), (nX, nY)]
    total = CertValue.exact(0)
    for a, fa in enumerate(f_pre):
        if fa.is_point and fa.point() == 0:
            continue
        for b, gb in enumerate(psi_preimage):
            gb = gb if isinstance(gb, CertValue) else CertValue.exact(Fraction(gb))
            if gb.is_point and gb.point() == 0:
                continue
            w = pair_cell_integral(E, blocks, (idx_f[a], idx_g[b]), options)
            total = total + fa * gb * w
    return total


def exterior_product(phi: LevelValuation, psi: LevelValuation, options=None) -> LevelValuation:
    """Exterior product materialized on the level classes of the product
    space (twists must match and add up on the product lattice)."""
    if phi.field != psi.field or phi.r != psi.r or phi.space != psi.space:
        raise ValueError("exterior factors are incompatible")
    if phi.twist != psi.twist:
        raise ValueError("exterior factors carry different twists")
    field, r = phi.field, phi.r
    nX, nY = phi.n, psi.n
    k = phi.k + psi.k
    g_pre = cosine_preimage(psi)
    f_pre = cosine_preimage(phi)
    target = enumerate_grassmannian(field, nX + nY, k, r)
    coeffs = [exterior_product_eval(phi, g_pre, (nY, psi.k), lift_subspace(pt),
                                    options, pre_phi=f_pre)
              for pt in target]
    return LevelValuation(field, nX + nY, k, r, tuple(coeffs), phi.space, phi.twist)


# ---------------------------------------------------------------------------
# spherical powers, hard Lefschetz route, pairing, convolution
# ---------------------------------------------------------------------------

_V1_CACHE: dict = {}


def v1_power(field, n, k, r, options=None) -> LevelValuation:
    """k-fold product of the degree-one invariant valuation (degree-k result),
    computed by iterated certified quadrature."""
    from .valuation import spherical

    key = (field.kind, field.q, n, k, r)
    hit = _V1_CACHE.get(key)
    if hit is not None:
        return hit
    if k == 0:
        out = spherical(field, n, 0, r)
    elif k == 1:
        out = spherical(field, n, 1, r)
    else:
        out = product(v1_power(field, n, k - 1, r, options), spherical(field, n, 1, r),
                      options)
    _V1_CACHE[key] = out
    return out


def lefschetz_operator(field, n, i, k, r):
    """Matrix of the composite (cosine_(i+k) . averaging over containing
    summands) realizing multiplication by the k-th spherical power on
    preimage sections, up to a positive constant."""
    cos = cosine_matrix(field, n, i + k, r)
    if k == 0:
        raise ValueError("empty product: the averaging leg is undefined for k = 0")
    rad = radon_avg_containing(field, n, n - i - k, n - i, r)
    a = cos.fraction_entries()
    b = rad.fraction_entries()
    return xl.matmul(a, b), cos, rad


def lefschetz_calibration(field, n, i, k, r, options=None):
    """Positive constant matching the matrix route against the quadrature
    product on the spherical line."""
    if i + k > n:
        raise ValueError("calibration outside the grading range")
    phi = v1_power(field, n, i, r, options)
    vk = v1_power(field, n, k, r, options)
    mat, _, _ = lefschetz_operator(field, n, i, k, r)
    pre = cosine_preimage(phi)
    raw = xl.mat_vec(mat, [c.point() for c in pre])
    target = enumerate_grassmannian(field, n, i + k, r)
    idx = next((a for a in range(len(target)) if raw[a] != 0), None)
    if idx is None:
        raise ArithmeticError("matrix route vanished on the spherical input")
    lhs_c = product_eval(phi, vk, lift_subspace(target[idx]), options)
    return lhs_c * CertValue.exact(Fraction(1) / raw[idx])


def product_with_v1_power(phi_preimage, field, n, i, k, r, options=None) -> LevelValuation:
    """Product with the k-th spherical power computed through the matrix
    route, calibrated on the spherical line; exact entries."""
    if k == 0:
        cos = cosine_matrix(field, n, i, r)
        coeffs = cos.apply(list(phi_preimage))
        return LevelValuation(field, n, i, r, tuple(coeffs))
    if i + k > n:
        raise ValueError("spherical-power product exceeds the top degree")
    mat, _, _ = lefschetz_operator(field, n, i, k, r)
    c = lefschetz_calibration(field, n, i, k, r, options)
    pre = [x.point() if isinstance(x, CertValue) else Fraction(x) for x in phi_preimage]
    raw = xl.mat_vec(mat, pre)
    coeffs = tuple(c * CertValue.exact(x) for x in raw)
    return LevelValuation(field, n, i + k, r, coeffs)


@dataclass(frozen=True)
class PairingMatrix:
    field: object
    n: int
    i: int
    r: int
    basis_left: ValSubspaceBasis
    basis_right: ValSubspaceBasis
    entries: tuple

    def is_exact(self):
        return all(c.is_point for row in self.entries for c in row)

    def verdict(self):
        """'nonsingular' / 'singular' when exact; 'inconclusive' otherwise."""
        if not self.is_exact():
            return "inconclusive"
        d = xl.det([[c.point() for c in row] for row in self.entries])
        return "nonsingular" if d != 0 else "singular"

    def max_width(self):
        return max((c.width for row in self.entries for c in row), default=Fraction(0))


def poincare_pairing(field, n, i, r, options=None) -> PairingMatrix:
    """Matrix of the top-degree pairing between the degree-i and the
    complementary-degree valuation spaces in their cosine-image bases."""
    left = val_space_basis(field, n, i, r)
    right = val_space_basis(field, n, n - i, r)
    idx_f = enumerate_grassmannian(field, n, n - i, r)
    idx_g = enumerate_grassmannian(field, n, i, r)
    top = Subspace.full(field, n)
    blocks = [(0, n), (0, n)]
    # kernel matrix over source-cell pairs, reused for every basis pair
    W = [[pair_cell_integral(top, blocks, (fa, gb), options) for gb in idx_g]
         for fa in idx_f]
    entries = []
    for pa in left.preimages:
        row = []
        for pb in right.preimages:
            total = CertValue.exact(0)
            for a, ca in enumerate(pa):
                if ca == 0:
                    continue
                for b, cb in enumerate(pb):
                    if cb == 0:
                        continue
                    total = total + CertValue.exact(ca * cb) * W[a][b]
            row.append(total)
        entries.append(tuple(row))
    return PairingMatrix(field, n, i, r, left, right, tuple(entries))


def convolution(phi: LevelValuation, psi: LevelValuation, options=None) -> LevelValuation:
    """Convolution of density-dual twisted valuations, computed through the
    Fourier conjugation of the product."""
    if phi.twist != 1 or psi.twist != 1:
        raise ValueError("convolution acts on density-dual twisted valuations")
    u, w = fourier_inv(phi), fourier_inv(psi)
    if u.k + w.k > phi.n:
        warnings.warn("convolution degree fell below zero; returning zero")
        return LevelValuation.zero(phi.field, phi.n, 0, phi.r, phi.space, 1)
    return fourier(product(u, w, options))
