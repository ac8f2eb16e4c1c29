"""Differential towers Q(z) = F, F(zeta1), ..., F(zeta1..zetat).

A tower is declared: each generator comes with the derivative it is asserted
to have, and validation checks the refutable part of the declaration (prefix
closure, known symbols).  The derivation extends to arbitrary rational
functions over the tower by the chain rule

    D(u) = du/dz + sum_i du/dzeta_i * zeta_i'

together with the quotient rule, and maps the tower's function field into
itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (DuplicateName, ForwardReference, InvalidTowerConstant,
                     UnknownSymbol)
from .ratfun import MPoly, RatFun

BASE_VAR = "z"


@dataclass(frozen=True)
class TowerSpec:
    """Ordered generator declarations (name, derivative over the prefix).

    The base variable z with D(z) = 1 is implicit and always present.
    Derivatives are rational functions over the full variable list
    (z, gen1, ..., gent); validation enforces that each one only uses z and
    strictly earlier generators.
    """

    generators: tuple  # tuple[tuple[str, RatFun], ...]

    @property
    def names(self):
        return tuple(name for name, _ in self.generators)

    @property
    def all_vars(self):
        return (BASE_VAR,) + self.names


class Tower:
    """Validated tower; immutable.  Construct via validate_tower."""

    def __init__(self, spec: TowerSpec, _token=None):
        if _token is not _VALIDATED:
            raise TypeError("construct towers via validate_tower()")
        self.spec = spec
        self.vars = spec.all_vars
        # derivative table indexed like self.vars; z first with D(z) = 1
        self.derivatives = (RatFun.const(self.vars, 1),) + tuple(
            d for _, d in spec.generators)

    @property
    def gen_names(self):
        return self.spec.names

    def gen(self, name: str) -> RatFun:
        if name not in self.vars:
            raise UnknownSymbol(name)
        return RatFun.var(self.vars, name)

    def deriv_of(self, name: str) -> RatFun:
        return self.derivatives[self.vars.index(name)]

    def is_flat(self) -> bool:
        """Every generator derivative lies in the base field Q(z)."""
        return all(d.used_vars() <= {BASE_VAR} for d in self.derivatives[1:])

    # -- the derivation ---------------------------------------------------

    def differentiate(self, u: RatFun) -> RatFun:
        def d_poly(p: MPoly) -> RatFun:
            total = RatFun.const(self.vars, 0)
            for i in p.used_indices():
                part = p.partial(i)
                total = total + RatFun.from_poly(part) * self.derivatives[i]
            return total

        dn = d_poly(u.num)
        dd = d_poly(u.den)
        den = RatFun.from_poly(u.den)
        return (dn * den - RatFun.from_poly(u.num) * dd) / (den * den)

    def nth_derivative(self, u: RatFun, n: int) -> RatFun:
        if n < 0:
            raise ValueError("derivative order must be nonnegative")
        for _ in range(n):
            u = self.differentiate(u)
        return u

    def is_constant(self, u: RatFun) -> bool:
        """True iff D(u) = 0 and u is a rational literal.

        D(u) = 0 for a non-literal u means the declared tower admits a new
        constant and therefore cannot sit inside a no-new-constants
        extension; that is reported as InvalidTowerConstant rather than
        answered.
        """
        if not self.differentiate(u).is_zero():
            return False
        if u.is_const():
            return True
        raise InvalidTowerConstant(
            f"D(u) = 0 but u involves generators: {u!r}")

    def __repr__(self):
        gens = ", ".join(self.gen_names)
        return f"Tower(z, {gens})" if gens else "Tower(z)"


_VALIDATED = object()


def validate_tower(spec: TowerSpec) -> Tower:
    """Check prefix closure of the declared derivatives and build the tower.

    Raises DuplicateName, UnknownSymbol (derivative over undeclared
    symbols) or ForwardReference (derivative mentioning the generator
    itself or a later one).
    """
    names = []
    for name, deriv in spec.generators:
        if name == BASE_VAR or name in names:
            raise DuplicateName(name)
        if not name.isidentifier():
            raise UnknownSymbol(f"bad generator name {name!r}")
        allowed = {BASE_VAR, *names}
        if deriv.vars != spec.all_vars:
            raise UnknownSymbol(
                f"derivative of {name} is over {deriv.vars!r}, "
                f"expected {spec.all_vars!r}")
        used = deriv.used_vars()
        late = used - allowed
        if late:
            raise ForwardReference(
                f"derivative of {name} references {sorted(late)}")
        names.append(name)
    return Tower(spec, _token=_VALIDATED)


def tower_from_pairs(pairs) -> Tower:
    """Build and validate a tower from (name, derivative RatFun) pairs."""
    return validate_tower(TowerSpec(generators=tuple(pairs)))


@dataclass(frozen=True)
class SubfieldSpec:
    """Differential generators g_1..g_s of K = F<g_1,...,g_s> over a tower."""

    generators: tuple  # tuple[RatFun, ...]
    names: tuple = ()

    def __post_init__(self):
        if not self.names:
            object.__setattr__(
                self, "names",
                tuple(f"g{i}" for i in range(len(self.generators))))
        if len(self.names) != len(self.generators):
            raise ValueError("names/generators length mismatch")


def base_subfield(tower: Tower) -> SubfieldSpec:
    """K = Q(z), the base field as a subfield spec."""
    return SubfieldSpec(generators=(tower.gen(BASE_VAR),), names=(BASE_VAR,))
