"""Adaptive exact integration over level cells of finite Grassmannians.

The Haar measure conditions uniformly on the cells of every deeper level,
so an integral over a cell refines into equal-mass integrals over its
fiber cells.  An integrand assembler reports, for a tuple of cells at
depth d, the value at the canonical lifts together with a certificate
that the integrand is constant on the whole cell (typically: the relevant
determinant valuation is smaller than d, so depth-d perturbations cannot
move it).  Certified cells close with an exact contribution; open cells
are either refined, summed exactly when their closing contributions
stabilize to a geometric pattern, or enclosed by the trivial bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .grassmann import fiber_iter, grassmannian_size
from .intervals import CertValue


@dataclass(frozen=True)
class IntegratorOptions:
    depth_extra: int = 8      # depth cap = start depth + depth_extra
    tol_exp: int = 10         # interval tolerance q^(-tol_exp)
    geom_run: int = 3         # equal consecutive ratios required for tail summation
    geom_guard: int = 1       # additional confirmation depths beyond the run
    geom_two_term: bool = True  # also try tails A q^(-a d) + B q^(-b d)
    max_cells: int = 500_000  # refinement safety valve


@dataclass
class IntegralStats:
    depths: list = dc_field(default_factory=list)
    open_counts: list = dc_field(default_factory=list)
    closed_contribs: list = dc_field(default_factory=list)
    open_bounds: list = dc_field(default_factory=list)
    tail_ratio: Fraction | None = None

    def open_mass_bound(self, depth):
        """Bound on the open mass at the deepest refinement <= depth."""
        for d, b in zip(reversed(self.depths), reversed(self.open_bounds)):
            if d <= depth:
                return b
        return self.open_bounds[-1] if self.open_bounds else Fraction(0)


def cells_mass(cells, depth, q):
    """Product Haar mass of a tuple of cells at the given depth."""
    mass = Fraction(1)
    for c in cells:
        mass /= grassmannian_size(c.n, c.k, q, depth)
    return mass


def _children(cells, depth):
    return itertools.product(*(fiber_iter(c, depth) for c in cells))


def adaptive_cell_integral(assembler, root_cells, start_depth, q,
                           options: IntegratorOptions | None = None):
    """Integrate an assembler-described function over a union of cells.

    assembler(cells, depth) -> (value, certified, bound): exact value at
    the canonical lifts, whether that value holds on the whole cell, and
    an upper bound for the integrand on the cell (used when open).
    Returns (CertValue, IntegralStats).
    """
    opts = options or IntegratorOptions()
    tol = Fraction(1, q**opts.tol_exp)
    cap = start_depth + opts.depth_extra
    stats = IntegralStats()

    frontier = list(root_cells)
    total = Fraction(0)
    depth = start_depth
    while True:
        mass = cells_mass(frontier[0], depth, q) if frontier else Fraction(0)
        closed = Fraction(0)
        survivors = []
        open_bound = Fraction(0)
        for cells in frontier:
            value, certified, bound = assembler(cells, depth)
            if certified:
                closed += value * mass
            else:
                survivors.append(cells)
                open_bound += bound * mass
        total += closed
        stats.depths.append(depth)
        stats.open_counts.append(len(survivors))
        stats.closed_contribs.append(closed)
        stats.open_bounds.append(open_bound)

        if not survivors:
            return CertValue.exact(total), stats

        tail = _certified_tail(stats.closed_contribs, q, opts, stats)
        if tail is not None and tail <= open_bound:
            return CertValue.exact(total + tail, status="geom"), stats

        branch = 1
        for c in survivors[0]:
            branch *= q ** (c.k * (c.n - c.k))
        too_big = len(survivors) * branch > opts.max_cells
        if depth >= cap or too_big:
            status = "interval" if open_bound <= tol else "uncertified"
            return CertValue(total, total + open_bound, status), stats

        depth += 1
        frontier = [tuple(child) for cells in survivors for child in _children(cells, depth)]


def _certified_tail(contribs, q, opts, stats):
    """Exact sum of the remaining closing contributions, when their pattern
    certifies.

    Two models are tried on the contributions after the first nonzero one.
    The single-ratio model requires geom_run + geom_guard equal consecutive
    exact ratios rho < 1 and sums the geometric series.  The two-term model
    fits A q^(-a d) + B q^(-b d) with integer exponents on two values and
    demands exact agreement on the remaining observed values (counting the
    cell-measure generating series is a rational function of q^(-d), so
    short exact recurrences are the expected regime; the fit is still
    validated, never assumed).  Returns None when neither model certifies.
    """
    first = next((i for i, c in enumerate(contribs) if c != 0), None)
    if first is None:
        return None
    vals = contribs[first:]
    if any(c == 0 for c in vals):
        return None

    run = opts.geom_run + opts.geom_guard
    if len(vals) >= run + 1:
        window = vals[-(run + 1):]
        ratios = {b / a for a, b in zip(window, window[1:])}
        if len(ratios) == 1:
            rho = next(iter(ratios))
            if 0 < rho < 1:
                stats.tail_ratio = rho
                return vals[-1] * rho / (1 - rho)

    if opts.geom_two_term and len(vals) >= 4:
        got = _two_term_tail(vals, q)
        if got is not None:
            stats.tail_ratio = got[1]
            return got[0]
    return None


def _two_term_tail(vals, q):
    """Fit c_d = A ra^d + B rb^d (d relative to the fourth-to-last value,
    ra = q^-a, rb = q^-b) on two values and sum the tail when the remaining
    two observed values match exactly."""
    c1, c2, c3, c4 = vals[-4], vals[-3], vals[-2], vals[-1]
    for a in range(1, 9):
        for b in range(a + 1, a + 9):
            ra, rb = Fraction(1, q**a), Fraction(1, q**b)
            A = (c2 - c1 * rb) / (ra - rb)
            B = c1 - A
            if c3 != A * ra**2 + B * rb**2 or c4 != A * ra**3 + B * rb**3:
                continue
            if A * ra**4 + B * rb**4 <= 0:
                continue
            tail = A * ra**4 / (1 - ra) + B * rb**4 / (1 - rb)
            if tail <= 0:
                continue
            return tail, (ra, rb)
    return None
