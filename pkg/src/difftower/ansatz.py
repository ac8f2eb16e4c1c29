"""Bounded undetermined-coefficients searches.

Membership questions, linear relations and first-order equations all reduce
to the same move: clear denominators, match coefficients of every monomial
in the tower variables, and solve the resulting exact linear system over Q.
Searches are three-valued by design: a Found result always carries a
substitution-verified witness, and a miss only ever means "not within these
bounds".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import linalg
from .errors import BoundsExceeded, DiffTowerError
from .ratfun import MPoly, RatFun, poly_lcm
from .tower import SubfieldSpec, Tower


@dataclass(frozen=True)
class Bounds:
    """Search caps.  The escalation ladder multiplies the degree caps once
    (by default) before a search gives up."""

    max_num_degree: int = 8
    max_den_degree: int = 8
    max_derivative_order: int = 4
    escalation: Tuple[int, ...] = (2,)

    def __post_init__(self):
        if min(self.max_num_degree, self.max_den_degree,
               self.max_derivative_order) < 1:
            raise ValueError("bounds must be positive")

    def escalated_degrees(self) -> Tuple[int, int]:
        m = 1
        for step in self.escalation:
            m *= step
        return self.max_num_degree * m, self.max_den_degree * m


@dataclass(frozen=True)
class Witness:
    """Formal rational expression R(x0..xn) with R(args) = target, checked
    at construction."""

    expr: RatFun          # over formal variables x0..xn
    args: Tuple[RatFun, ...]   # designated arguments over the tower
    target: RatFun

    def __post_init__(self):
        if self.substituted() != self.target:
            raise DiffTowerError("witness does not substitute to its target")

    def substituted(self) -> RatFun:
        mapping = {f"x{i}": a for i, a in enumerate(self.args)}
        return self.expr.substitute(mapping, self.target.vars)


@dataclass(frozen=True)
class Found:
    value: object


@dataclass(frozen=True)
class NoSolutionWithinBounds:
    bounds: Bounds
    certified: bool = False


SearchOutcome = object  # Found | NoSolutionWithinBounds


def monomials_upto(n_vars: int, max_deg: int) -> List[tuple]:
    """Exponent tuples of total degree <= max_deg, descending deglex."""
    out = [e for e in itertools.product(range(max_deg + 1), repeat=n_vars)
           if sum(e) <= max_deg]
    out.sort(key=lambda e: (sum(e), e), reverse=True)
    return out


def _assemble_rows(exprs: Sequence[RatFun]):
    """Clear denominators across exprs and return the coefficient-matching
    rows: one row per monomial of the cleared polynomials, one column per
    expression."""
    if not exprs:
        return []
    variables = exprs[0].vars
    lcm = MPoly.const(variables, 1)
    seen = set()
    for e in exprs:
        if e.den not in seen:
            seen.add(e.den)
            lcm = poly_lcm(lcm, e.den)
    by_monom = {}
    for col, e in enumerate(exprs):
        cleared = e.num * lcm.try_divexact(e.den)
        for exp, c in cleared.terms.items():
            by_monom.setdefault(exp, {})[col] = c
    return [by_monom[key] for key in sorted(by_monom)]


def solve_linear_ansatz(terms: Sequence[RatFun], target: RatFun) -> List[Tuple[Fraction, ...]]:
    """Solutions of sum_i c_i * terms_i = target over Q.

    Homogeneous target: returns a kernel basis.  Inhomogeneous: returns the
    particular solution (free coordinates zero) followed by the kernel
    basis, or [] when inconsistent.  Ordering is deterministic.
    """
    n = len(terms)
    rows_full = _assemble_rows(list(terms) + [target])
    linalg.check_size(len(rows_full), n + 1)
    if target.is_zero():
        rows = [{c: v for c, v in r.items() if c < n} for r in rows_full]
        basis = linalg.nullspace([r for r in rows if r], n)
        return [tuple(v) for v in basis]
    rhs = [r.pop(n, Fraction(0)) for r in rows_full]
    particular, kernel = linalg.solve_affine(rows_full, rhs, n)
    if particular is None:
        return []
    return [tuple(particular)] + [tuple(v) for v in kernel]


def _closure_values(gens: Sequence[RatFun], tower: Tower, order: int) -> List[RatFun]:
    """Generators plus derivatives up to the given order, constants and
    duplicates dropped, in generator-major order."""
    out: List[RatFun] = []
    for g in gens:
        cur = g
        for j in range(order + 1):
            if cur.used_vars() and cur not in out:
                out.append(cur)
            if j < order:
                cur = tower.differentiate(cur)
    return out


def _membership_at(u: RatFun, values: Sequence[RatFun],
                   num_deg: int, den_deg: int) -> Optional[RatFun]:
    """Fixed-degree bilinear ansatz u*Q(values) - P(values) = 0.

    Returns the canonical formal witness P/Q, selected deterministically:
    the RREF of the kernel (denominator coefficients first, deglex
    descending) and, among rows with a nonzero denominator block, the one
    whose denominator has the deglex-least leading monomial.
    """
    m = len(values)
    if m == 0:
        return None
    xvars = tuple(f"x{i}" for i in range(m))
    monoms_q = monomials_upto(m, den_deg)
    monoms_p = monomials_upto(m, num_deg)
    cache = {}

    def value_of(exp) -> RatFun:
        if exp in cache:
            return cache[exp]
        acc = RatFun.const(u.vars, 1)
        for i, k in enumerate(exp):
            for _ in range(k):
                acc = acc * values[i]
        cache[exp] = acc
        return acc

    exprs = [u * value_of(e) for e in monoms_q]
    exprs += [-value_of(e) for e in monoms_p]
    n_cols = len(exprs)
    rows = _assemble_rows(exprs)
    linalg.check_size(len(rows), n_cols)
    kernel = linalg.nullspace(rows, n_cols)
    if not kernel:
        return None
    reduced, pivots = linalg.rref(
        [{i: v for i, v in enumerate(vec) if v} for vec in kernel], n_cols)
    nq = len(monoms_q)
    candidates = [(p, row) for row, p in zip(reduced, pivots) if p < nq]
    # Largest pivot column = deglex-least leading denominator monomial.
    for _, row in sorted(candidates, key=lambda t: -t[0]):
        q_poly = MPoly(xvars, {monoms_q[c]: v for c, v in row.items() if c < nq})
        if value_of_poly(q_poly, values, u.vars).is_zero():
            continue
        p_poly = MPoly(xvars, {monoms_p[c - nq]: v for c, v in row.items() if c >= nq})
        witness = RatFun(p_poly, q_poly)
        return witness
    return None


def value_of_poly(p: MPoly, values: Sequence[RatFun], target_vars) -> RatFun:
    mapping = {f"x{i}": v for i, v in enumerate(values)}
    return RatFun.from_poly(p).substitute(mapping, target_vars)


def _degree_ladder(bounds: Bounds):
    """(num_deg, den_deg, order) triples in increasing total effort."""
    cap_num, cap_den = bounds.escalated_degrees()
    cap_d = max(cap_num, cap_den)
    cap_o = bounds.max_derivative_order
    for effort in range(1, cap_d + cap_o + 1):
        for order in range(0, min(cap_o, effort - 1) + 1):
            d = effort - order
            if d < 1 or d > cap_d:
                continue
            yield min(d, cap_num), min(d, cap_den), order


def subfield_membership(u: RatFun, K: SubfieldSpec, tower: Tower,
                        bounds: Bounds = Bounds()) -> SearchOutcome:
    """Search for u as a rational expression in K's generators and their
    derivatives.  Ascending effort ladder, so a Found witness is the one at
    the least (degree, order) bound."""
    closures = {}
    for num_deg, den_deg, order in _degree_ladder(bounds):
        if order not in closures:
            closures[order] = _closure_values(K.generators, tower, order)
        values = closures[order]
        try:
            expr = _membership_at(u, values, num_deg, den_deg)
        except BoundsExceeded:
            # rung too large for the cell cap; the miss stays bounded-honest
            continue
        if expr is not None:
            return Found(Witness(expr=expr, args=tuple(values), target=u))
    return NoSolutionWithinBounds(bounds)


def solve_first_order(f: RatFun, g: RatFun, tower: Tower,
                      bounds: Bounds = Bounds()) -> SearchOutcome:
    """Bounded search for w with D(w) = f + g*w.

    The ansatz is w = N/d with unknown polynomial numerator and a fixed
    candidate denominator built from the denominators of f, g and the tower
    derivatives; only the numerator degree escalates.  For the homogeneous
    equation (f = 0, g != 0) the trivial solution w = 0 is excluded.
    """
    variables = tower.vars
    lcm = poly_lcm(f.den, g.den)
    for d in tower.derivatives:
        lcm = poly_lcm(lcm, d.den)
    cap_num, _ = bounds.escalated_degrees()
    denom = MPoly.const(variables, 1)
    if lcm.total_degree() > 0:
        power = max(1, bounds.max_den_degree // max(1, lcm.total_degree()))
        denom = lcm ** power
    denom_rf = RatFun.from_poly(denom)

    # the caps bound w itself; the fixed denominator shifts the numerator
    offset = max(0, denom.total_degree())
    degrees = sorted({d + offset for d in range(1, bounds.max_num_degree + 1)}
                     | {cap_num + offset})
    cap_cells = linalg.max_cells()
    for deg in degrees:
        monoms = monomials_upto(len(variables), deg)
        if len(monoms) ** 2 > cap_cells:
            continue
        terms = []
        for exp in monoms:
            mono = RatFun.from_poly(MPoly(variables, {exp: Fraction(1)}))
            w_e = mono / denom_rf
            terms.append(tower.differentiate(w_e) - g * w_e)
        if f.is_zero():
            try:
                basis = solve_linear_ansatz(terms, f)
            except BoundsExceeded:
                continue
            for vec in basis:
                w = _vec_to_ratfun(vec, monoms, variables) / denom_rf
                if not w.is_zero():
                    _check_solution(w, f, g, tower)
                    return Found(w)
            if g.is_zero():
                return Found(RatFun.const(variables, 0))
            continue
        try:
            sols = solve_linear_ansatz(terms, f)
        except BoundsExceeded:
            continue
        if not sols:
            continue
        w = _vec_to_ratfun(sols[0], monoms, variables) / denom_rf
        if g.is_zero():
            w = w - _poly_part_constant(w)
        _check_solution(w, f, g, tower)
        return Found(w)
    certified = (not tower.gen_names and g.is_zero()
                 and not _has_rational_antiderivative_base(f, tower))
    return NoSolutionWithinBounds(bounds, certified=certified)


def _vec_to_ratfun(vec, monoms, variables) -> RatFun:
    terms = {exp: c for exp, c in zip(monoms, vec) if c}
    return RatFun.from_poly(MPoly(variables, terms))


def _check_solution(w: RatFun, f: RatFun, g: RatFun, tower: Tower):
    if tower.differentiate(w) != f + g * w:
        raise DiffTowerError("first-order solution failed verification")


def _poly_part_constant(w: RatFun) -> RatFun:
    """Constant term of the polynomial part of w (deglex reduction)."""
    num, den = w.num, w.den
    const = Fraction(0)
    le_d = den.leading_exp()
    lc_d = den.terms[le_d]
    rem = dict(num.terms)
    while rem:
        le = max(rem, key=lambda e: (sum(e), e))
        diff = tuple(a - b for a, b in zip(le, le_d))
        if any(x < 0 for x in diff):
            break
        c = rem[le] / lc_d
        if sum(diff) == 0:
            const += c
        for e, v in den.terms.items():
            tgt = tuple(a + b for a, b in zip(e, diff))
            nv = rem.get(tgt, Fraction(0)) - c * v
            if nv == 0:
                rem.pop(tgt, None)
            else:
                rem[tgt] = nv
    return RatFun.const(w.vars, const)


def _has_rational_antiderivative_base(f: RatFun, tower: Tower) -> bool:
    from .ratint import has_rational_antiderivative
    return has_rational_antiderivative(f)
