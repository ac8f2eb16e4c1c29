"""Constructive structure theory of antiderivative towers.

Implements relation detection among antiderivatives, decomposition over flat
towers, normal towers, compositum bases, leading-coefficient shift
extraction and the greedy subfield-structure report.

Subfields generated by z, tower generators and Q-linear combinations of
generators (with base-field shifts) admit an exact membership test: a
linear change of generators turns membership into "which variables occur in
the canonical form".  Everything else falls back to the bounded ansatz and
is reported as Partial when a query comes back unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import linalg
from .ansatz import (Bounds, Found, NoSolutionWithinBounds, Witness,
                     monomials_upto, subfield_membership)
from .errors import (AlreadyInBase, DiffTowerError, MalformedAntiderivative,
                     NotAntiderivative, NotFlat, Unsupported)
from .ratfun import MPoly, RatFun, poly_gcd, poly_lcm
from .tower import BASE_VAR, SubfieldSpec, Tower


def formal_partial(u: RatFun, var: str) -> RatFun:
    """Partial derivative of u with respect to one tower variable."""
    i = u.vars.index(var)
    num = RatFun.from_poly(u.num)
    den = RatFun.from_poly(u.den)
    dnum = RatFun.from_poly(u.num.partial(i))
    dden = RatFun.from_poly(u.den.partial(i))
    return (dnum * den - num * dden) / (den * den)


def linearize(u: RatFun, tower: Tower):
    """Write u as sum(alpha_v * v) + rest with rational alpha and rest over
    Q(z); the z-linear part is folded into alpha.  None if u is not of this
    shape."""
    coeffs = [Fraction(0)] * len(tower.vars)
    rest = u
    for i, name in enumerate(tower.vars):
        if name == BASE_VAR:
            continue
        part = formal_partial(u, name)
        if not part.is_const():
            return None
        coeffs[i] = part.const_value()
        if coeffs[i]:
            rest = rest - tower.gen(name).scale(coeffs[i])
    if not rest.used_vars() <= {BASE_VAR}:
        return None
    zpart = formal_partial(rest, BASE_VAR)
    if zpart.is_const() and rest.is_poly() and rest.num.total_degree() <= 1:
        coeffs[0] = zpart.const_value()
        rest = rest - tower.gen(BASE_VAR).scale(coeffs[0])
    return coeffs, rest


class NotLinearField(DiffTowerError):
    """The given generators do not admit the exact coordinate treatment."""


class LinearField:
    """Exact membership oracle for F = Q(entries) where each entry is a
    Q-linear combination of tower variables plus a Q(z) shift."""

    def __init__(self, tower: Tower, entries: Sequence[RatFun]):
        self.tower = tower
        nv = len(tower.vars)
        rows = []  # [coeff list, rest, expr]
        for expr in entries:
            lin = linearize(expr, tower)
            if lin is None:
                raise NotLinearField(f"not linear over the tower: {expr!r}")
            coeffs, rest = lin
            if not any(coeffs):
                if rest.is_const():
                    continue
                raise NotLinearField(f"pure base element: {expr!r}")
            rows.append([list(coeffs), rest, expr])
        # exact RREF over the coefficient columns, carrying rest and expr
        reduced = []  # (pivot column, [coeffs, rest, expr])
        for col in range(nv):
            pivot = next((r for r in rows if r[0][col] != 0), None)
            if pivot is None:
                continue
            rows.remove(pivot)
            inv = 1 / pivot[0][col]
            pivot = [[c * inv for c in pivot[0]],
                     pivot[1].scale(inv), pivot[2].scale(inv)]
            for r in rows + [row for _, row in reduced]:
                f = r[0][col]
                if f:
                    r[0][:] = [a - f * b for a, b in zip(r[0], pivot[0])]
                    r[1] = r[1] - pivot[1].scale(f)
                    r[2] = r[2] - pivot[2].scale(f)
            reduced.append((col, pivot))
            rows = [r for r in rows if any(r[0]) or not r[1].is_const()]
        for r in rows:
            if any(r[0]) or not r[1].is_const():
                # leftover pure-z dependency like z**2; not representable
                raise NotLinearField("generators hide a nonlinear base element")
        self.rows = reduced
        zi = tower.vars.index(BASE_VAR)
        self.z_in_field = any(
            col == zi and _is_unit(row[0], col) and row[1].is_const()
            for col, row in reduced)
        if not self.z_in_field:
            for col, row in reduced:
                if col == zi and _is_unit(row[0], col):
                    raise NotLinearField("z entangled with a base shift")
        z_pivot_combo = any(col == zi and not _is_unit(row[0], col)
                            for col, row in reduced)
        if z_pivot_combo and any(not row[1].is_const() for _, row in reduced):
            raise NotLinearField("z pivoted inside a combination with shifts")
        self._build_coordinates()

    def _build_coordinates(self):
        tower = self.tower
        synth = []
        self.names = []       # field coordinate names, placement order
        self.pretty = {}      # coordinate name -> defining expr over tower
        plan = []
        for col, (coeffs, rest, expr) in self.rows:
            var = tower.vars[col]
            unit = _is_unit(coeffs, col)
            if unit and (rest.is_const() or self.z_in_field):
                self.names.append(var)
                self.pretty[var] = tower.gen(var)
                continue
            name = f"~{len(synth)}"
            synth.append(name)
            self.names.append(name)
            self.pretty[name] = expr
            plan.append((col, coeffs, rest, name))
        self.ext_vars = tower.vars + tuple(synth)
        if self.z_in_field and BASE_VAR not in self.names:
            self.names.insert(0, BASE_VAR)
            self.pretty[BASE_VAR] = tower.gen(BASE_VAR)
        subst = {}
        z_expr = None
        for col, coeffs, rest, name in plan:
            # entry = var + sum(c_j var_j) + rest  ->  var = name - sum - rest
            value = RatFun.var(self.ext_vars, name)
            for j, c in enumerate(coeffs):
                if j != col and c:
                    value = value - RatFun.var(self.ext_vars, tower.vars[j]).scale(c)
            value = value - rest.extend_vars(self.ext_vars)
            if tower.vars[col] == BASE_VAR:
                z_expr = value
            subst[tower.vars[col]] = value
        if z_expr is not None:
            # rests were constant by construction, so no nesting through z
            pass
        self.subst = subst
        self.allowed = set(self.names)

    def rewrite(self, u: RatFun) -> RatFun:
        ext = u.extend_vars(self.ext_vars)
        if not self.subst:
            return ext
        return ext.substitute(self.subst, self.ext_vars)

    def contains(self, u: RatFun) -> bool:
        return self.rewrite(u).used_vars() <= self.allowed


def _is_unit(coeffs, col) -> bool:
    return coeffs[col] == 1 and all(c == 0 for j, c in enumerate(coeffs) if j != col)


# -- membership front end -----------------------------------------------------

IN, OUT, UNKNOWN = "in", "out", "unknown"


class MembershipOracle:
    """Exact when the subfield generators are linear over the tower,
    three-valued (bounded ansatz) otherwise."""

    def __init__(self, tower: Tower, K: SubfieldSpec, bounds: Bounds):
        self.tower = tower
        self.K = K
        self.bounds = bounds
        try:
            self.field: Optional[LinearField] = LinearField(tower, K.generators)
        except NotLinearField:
            self.field = None

    def query(self, u: RatFun):
        """Returns (IN | OUT | UNKNOWN, certificate-or-None)."""
        if self.field is not None:
            rewritten = self.field.rewrite(u)
            if rewritten.used_vars() <= self.field.allowed:
                return IN, rewritten
            return OUT, None
        outcome = subfield_membership(u, self.K, self.tower, self.bounds)
        if isinstance(outcome, Found):
            return IN, outcome.value
        return UNKNOWN, None


# -- Ostrowski relations ------------------------------------------------------

@dataclass(frozen=True)
class Independent:
    pass


@dataclass(frozen=True)
class Relation:
    """alpha . ws lands in K; remainder is that K-element."""

    alpha: Tuple[Fraction, ...]
    remainder: RatFun


def ostrowski_relation(ws: Sequence[RatFun], K: SubfieldSpec, tower: Tower,
                       bounds: Bounds = Bounds()):
    """Either the given antiderivatives of K are (pairwise jointly)
    independent over K, or a rational linear combination of them lands in
    K; returns the deglex-least normalized relation in the latter case."""
    oracle = MembershipOracle(tower, K, bounds)
    if oracle.field is None:
        raise Unsupported("K does not admit the exact coordinate treatment")
    field = oracle.field
    outside = [v for v in field.ext_vars if v not in field.allowed]
    coeff_rows = {}
    for j, w in enumerate(ws):
        status, _ = oracle.query(tower.differentiate(w))
        if status != IN:
            raise NotAntiderivative(f"derivative of argument {j} is not in K")
        rewritten = field.rewrite(w)
        remainder = rewritten
        for o in outside:
            part = formal_partial(rewritten, o)
            if not part.is_const():
                raise Unsupported(
                    f"argument {j} is not Q-linear in the generators outside K")
            c = part.const_value()
            if c:
                remainder = remainder - RatFun.var(field.ext_vars, o).scale(c)
                coeff_rows.setdefault(o, {})[j] = c
        if not remainder.used_vars() <= field.allowed:
            raise Unsupported(
                f"argument {j} is not Q-linear in the generators outside K")
    rows = [coeff_rows[o] for o in outside if o in coeff_rows]
    kernel = linalg.nullspace(rows, len(ws))
    if not kernel:
        return Independent()
    alpha = _normalize_first_one(kernel[0])
    remainder = RatFun.const(tower.vars, 0)
    for a, w in zip(alpha, ws):
        if a:
            remainder = remainder + w.scale(a)
    status, _ = oracle.query(remainder)
    if status != IN:
        raise DiffTowerError("relation remainder failed the membership check")
    return Relation(alpha=tuple(alpha), remainder=remainder)


def _normalize_first_one(vec):
    lead = next(v for v in vec if v)
    return tuple(v / lead for v in vec)


# -- decomposition over flat towers ------------------------------------------

def antiderivative_decompose(g: RatFun, tower: Tower):
    """Over a flat tower, write an antiderivative g of F as
    sum(alpha_i zeta_i) + a with a in Q(z)."""
    if not tower.is_flat():
        raise NotFlat("decomposition requires a flat tower")
    dg = tower.differentiate(g)
    if not dg.used_vars() <= {BASE_VAR}:
        raise NotAntiderivative(f"D(g) is not in Q(z): {dg!r}")
    alphas = []
    rest = g
    for name in tower.gen_names:
        part = formal_partial(g, name)
        if not part.is_const():
            raise MalformedAntiderivative(
                f"D(g) lands in Q(z) but g is not linear in {name}")
        c = part.const_value()
        alphas.append(c)
        if c:
            rest = rest - tower.gen(name).scale(c)
    if not rest.used_vars() <= {BASE_VAR}:
        raise MalformedAntiderivative("nonlinear generator dependence")
    return tuple(alphas), rest


# -- normal tower ---------------------------------------------------------------

@dataclass(frozen=True)
class NormalTower:
    """levels[j] lists the new generators adjoined at level j as
    (display-expression) RatFuns; level 0 is the constant field Q."""

    levels: Tuple[Tuple[RatFun, ...], ...]
    partial: bool


def normal_tower(tower: Tower, bounds: Bounds = Bounds()) -> NormalTower:
    """Iterated antiderivative closure: at each level adjoin every Q-linear
    combination of the not-yet-captured tower variables whose derivative
    lies in the previous level's field."""
    entries: List[RatFun] = []
    levels: List[Tuple[RatFun, ...]] = [()]
    partial = False
    while True:
        field = LinearField(tower, entries)
        unplaced = [v for v in tower.vars
                    if not field.contains(tower.gen(v))]
        if not unplaced:
            break
        new_exprs = _closure_step(tower, field, unplaced, bounds)
        new_exprs = [e for e in new_exprs if not field.contains(e)]
        if not new_exprs:
            partial = True
            break
        levels.append(tuple(new_exprs))
        entries.extend(new_exprs)
    return NormalTower(levels=tuple(levels), partial=partial)


def _closure_step(tower: Tower, field: LinearField,
                  unplaced: List[str], bounds: Bounds) -> List[RatFun]:
    """All normalized Q-linear combinations of the unplaced variables whose
    derivative lies in the current field, via one exact linear solve."""
    derivs = [field.rewrite(tower.deriv_of(v)) for v in unplaced]
    lcm = MPoly.const(field.ext_vars, 1)
    for d in derivs:
        lcm = poly_lcm(lcm, d.den)
    nums = [d.num * lcm.try_divexact(d.den) for d in derivs]
    allowed_idx = {field.ext_vars.index(n) for n in field.allowed}
    content = _content_over(lcm, allowed_idx)
    pp = lcm.try_divexact(content)
    max_deg = max([n.total_degree() for n in nums] + [0]) - pp.total_degree()
    beta_monoms = []
    if max_deg >= 0:
        for exp in monomials_upto(len(field.ext_vars), max_deg):
            if all(k == 0 or i in allowed_idx for i, k in enumerate(exp)):
                beta_monoms.append(exp)
    n_alpha = len(unplaced)
    cols = {}
    for j, num in enumerate(nums):
        for e, c in num.terms.items():
            cols.setdefault(e, {})[j] = c
    for m, exp in enumerate(beta_monoms):
        prod = pp * MPoly(field.ext_vars, {exp: Fraction(1)})
        for e, c in prod.terms.items():
            cols.setdefault(e, {})[n_alpha + m] = -c
    rows = [cols[k] for k in sorted(cols)]
    n_cols = n_alpha + len(beta_monoms)
    linalg.check_size(len(rows), n_cols)
    kernel = linalg.nullspace(rows, n_cols)
    alpha_rows = [{i: v for i, v in enumerate(vec[:n_alpha]) if v}
                  for vec in kernel]
    reduced, _ = linalg.rref([r for r in alpha_rows if r], n_alpha)
    out = []
    for row in reduced:
        expr = RatFun.const(tower.vars, 0)
        for i, c in sorted(row.items()):
            expr = expr + tower.gen(unplaced[i]).scale(c)
        out.append(expr)
    return out


def _content_over(p: MPoly, allowed_idx) -> MPoly:
    """Largest divisor of p lying in the subring generated by the allowed
    variables: gcd of the allowed-variable coefficients grouped by the
    exponent pattern of the other variables."""
    groups = {}
    for e, c in p.terms.items():
        outer = tuple(0 if i in allowed_idx else k for i, k in enumerate(e))
        inner = tuple(k if i in allowed_idx else 0 for i, k in enumerate(e))
        groups.setdefault(outer, {})[inner] = c
    cont = MPoly.zero(p.vars)
    for terms in groups.values():
        cont = poly_gcd(cont, MPoly(p.vars, terms))
        if cont.is_const() and not cont.is_zero():
            break
    return cont


# -- compositum basis -----------------------------------------------------------

@dataclass(frozen=True)
class CompositumBasis:
    chosen: Tuple[str, ...]
    partial: bool


def compositum_basis(K: SubfieldSpec, tower: Tower,
                     bounds: Bounds = Bounds()) -> CompositumBasis:
    """Greedy transcendence base of KE over K from the tower's generators:
    take the smallest-index generator not yet in the current field, adjoin,
    repeat."""
    current = list(K.generators)
    chosen = []
    partial = False
    for name in tower.gen_names:
        oracle = MembershipOracle(
            tower, SubfieldSpec(generators=tuple(current)), bounds)
        status, _ = oracle.query(tower.gen(name))
        if status == IN:
            continue
        if status == UNKNOWN:
            partial = True
        chosen.append(name)
        current.append(tower.gen(name))
    return CompositumBasis(chosen=tuple(chosen), partial=partial)


# -- Lemma 4.4 shift extraction --------------------------------------------------

def minimal_shift(u: RatFun, tower: Tower, topgen: str) -> RatFun:
    """From u outside L* = F(zeta_1..zeta_{t-1}), read the leading
    coefficients of the component (numerator or denominator) of top degree
    in zeta_t and return zeta_t + a_{n-1}/(n a_n)."""
    if topgen not in tower.vars:
        raise DiffTowerError(f"unknown generator {topgen!r}")
    idx = tower.vars.index(topgen)
    if u.num.degree_in(idx) <= 0 and u.den.degree_in(idx) <= 0:
        raise AlreadyInBase(f"{u!r} does not involve {topgen}")
    comp = u.num if u.num.degree_in(idx) > 0 else u.den
    n = comp.degree_in(idx)
    a_n = RatFun.from_poly(comp.coeff_in(idx, n))
    a_n1 = RatFun.from_poly(comp.coeff_in(idx, n - 1))
    shift = a_n1 / a_n.scale(n)
    return tower.gen(topgen) + shift


# -- subfield structure -----------------------------------------------------------

@dataclass(frozen=True)
class StructureGenerator:
    expr: RatFun
    derivative_witness: object   # RatFun over the previous field or Witness
    membership_witness: Witness  # expresses expr over K's closure


@dataclass(frozen=True)
class StructureReport:
    status: str                  # "resolved" | "partial"
    generators: Tuple[StructureGenerator, ...]
    input_witnesses: Tuple[object, ...]  # per K generator, Witness or None


def subfield_structure(K: SubfieldSpec, tower: Tower,
                       bounds: Bounds = Bounds()) -> StructureReport:
    """Greedy ascent per the structure theorem: repeatedly adjoin an
    antiderivative of the current field F* that lies in K but not in F*,
    then check that every K generator is expressible over the result."""
    fstar: List[StructureGenerator] = []

    def fstar_contains(u: RatFun):
        exprs = tuple(g.expr for g in fstar)
        if not exprs:
            if u.is_const():
                return IN, u
            return OUT, None
        oracle = MembershipOracle(
            tower, SubfieldSpec(generators=exprs), bounds)
        return oracle.query(u)

    candidates = [tower.gen(v) for v in tower.vars]
    for g in K.generators:
        cur = g
        for _ in range(3):
            if cur not in candidates:
                candidates.append(cur)
            cur = tower.differentiate(cur)
    if tower.gen_names:
        top = tower.gen_names[-1]
        for g in K.generators:
            try:
                shift = minimal_shift(g, tower, top)
            except (AlreadyInBase, DiffTowerError):
                continue
            if shift not in candidates:
                candidates.append(shift)

    max_gens = len(tower.vars) + len(K.generators)
    progress = True
    while progress and len(fstar) < max_gens:
        progress = False
        for cand in candidates:
            status, _ = fstar_contains(cand)
            if status != OUT:
                continue
            dstatus, dwit = fstar_contains(tower.differentiate(cand))
            if dstatus != IN:
                continue
            outcome = subfield_membership(cand, K, tower, bounds)
            if not isinstance(outcome, Found):
                continue
            fstar.append(StructureGenerator(
                expr=cand, derivative_witness=dwit,
                membership_witness=outcome.value))
            progress = True
            break

    input_witnesses: List[object] = []
    resolved = bool(fstar) or not K.generators
    exprs = tuple(g.expr for g in fstar)
    for g in K.generators:
        if not exprs:
            input_witnesses.append(None)
            resolved = False
            continue
        outcome = subfield_membership(
            g, SubfieldSpec(generators=exprs), tower, bounds)
        if isinstance(outcome, Found):
            input_witnesses.append(outcome.value)
        else:
            input_witnesses.append(None)
            resolved = False
    return StructureReport(
        status="resolved" if resolved else "partial",
        generators=tuple(fstar),
        input_witnesses=tuple(input_witnesses))
