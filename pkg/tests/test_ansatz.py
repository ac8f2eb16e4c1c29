"""Bounded searches: membership witnesses, linear relations, first-order
equations.  A miss is always NoSolutionWithinBounds, never a nonexistence
claim, except where the exact residue criterion certifies one."""

import random
from fractions import Fraction

import pytest

from difftower.ansatz import (Bounds, Found, NoSolutionWithinBounds, Witness,
                              monomials_upto, solve_first_order,
                              solve_linear_ansatz, subfield_membership)
from difftower.errors import DiffTowerError
from difftower.parser import parse_expr
from difftower.randexpr import random_ratfun
from difftower.ratfun import RatFun
from difftower.tower import SubfieldSpec, base_subfield, tower_from_pairs

SMALL = Bounds(3, 3, 2, escalation=())


def log_tower():
    return tower_from_pairs([("zeta1", parse_expr("1/z", ("z", "zeta1")))])


def two_log_tower():
    v = ("z", "zeta1", "zeta2")
    return tower_from_pairs([("zeta1", parse_expr("1/z", v)),
                             ("zeta2", parse_expr("1/(z+1)", v))])


class TestBounds:
    def test_defaults_positive(self):
        with pytest.raises(ValueError):
            Bounds(0, 1, 1)

    def test_escalation(self):
        assert Bounds(4, 3, 2, escalation=(2,)).escalated_degrees() == (8, 6)
        assert Bounds(4, 3, 2, escalation=()).escalated_degrees() == (4, 3)


class TestWitness:
    def test_verified_at_construction(self):
        T = log_tower()
        u = parse_expr("zeta1/z", T)
        expr = parse_expr("x0/x1", ("x0", "x1"))
        w = Witness(expr=expr, args=(parse_expr("zeta1", T), parse_expr("z", T)),
                    target=u)
        assert w.substituted() == u

    def test_bad_witness_rejected(self):
        T = log_tower()
        with pytest.raises(DiffTowerError):
            Witness(expr=parse_expr("x0", ("x0",)),
                    args=(parse_expr("z", T),),
                    target=parse_expr("zeta1", T))


class TestMonomials:
    def test_descending_deglex(self):
        ms = monomials_upto(2, 2)
        assert ms[0] == (2, 0) and ms[-1] == (0, 0)
        degs = [sum(m) for m in ms]
        assert degs == sorted(degs, reverse=True)


class TestLinearAnsatz:
    def test_particular_plus_kernel(self):
        T = log_tower()
        terms = [parse_expr(t, T) for t in ("1/z", "z", "2/z")]
        target = parse_expr("3*z", T)
        sols = solve_linear_ansatz(terms, target)
        assert sols[0] == (Fraction(0), Fraction(3), Fraction(0))
        assert len(sols) == 2  # one kernel vector: (2, 0, -1) direction

    def test_homogeneous_kernel(self):
        T = log_tower()
        terms = [parse_expr(t, T) for t in ("1/z", "2/z")]
        basis = solve_linear_ansatz(terms, parse_expr("0", T))
        assert basis == [(Fraction(-2), Fraction(1))]

    def test_inconsistent(self):
        T = log_tower()
        assert solve_linear_ansatz([parse_expr("z", T)],
                                   parse_expr("zeta1", T)) == []


class TestMembership:
    def test_recover_base_variable(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1/z", T),))
        out = subfield_membership(parse_expr("z", T), K, T, SMALL)
        assert isinstance(out, Found)
        w = out.value
        assert w.expr == parse_expr("(x0*x1 + x2)/(x0*x2 - 3*x1^2)",
                                    ("x0", "x1", "x2"))

    def test_recover_generator(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1/z", T),))
        out = subfield_membership(parse_expr("zeta1", T), K, T, SMALL)
        assert isinstance(out, Found)
        assert out.value.expr == parse_expr(
            "(x0^2*x1 + x0*x2)/(x0*x2 - 3*x1^2)", ("x0", "x1", "x2"))

    def test_direct_member(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("z^2", T),))
        out = subfield_membership(parse_expr("z^4 + 1", T), K, T, SMALL)
        assert isinstance(out, Found)

    def test_miss_is_bounded(self):
        T = log_tower()
        out = subfield_membership(parse_expr("zeta1", T), base_subfield(T),
                                  T, Bounds(2, 2, 1, escalation=()))
        assert isinstance(out, NoSolutionWithinBounds)
        assert not out.certified

    def test_witness_substitutes_randomly(self):
        rng = random.Random(11)
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1", T),
                                     parse_expr("z", T)))
        for _ in range(10):
            target = random_ratfun(rng, T.vars, max_deg=2, max_terms=3)
            out = subfield_membership(target, K, T, SMALL)
            assert isinstance(out, Found)
            assert out.value.substituted() == target


class TestFirstOrder:
    def test_polynomial_antiderivative(self):
        T = tower_from_pairs([])
        out = solve_first_order(parse_expr("2*z", T), parse_expr("0", T),
                                T, SMALL)
        assert isinstance(out, Found)
        assert out.value == parse_expr("z^2", T)  # constant term normalized away

    def test_log_derivative(self):
        T = log_tower()
        out = solve_first_order(parse_expr("1/z", T), parse_expr("0", T),
                                T, Bounds(4, 4, 2, escalation=()))
        assert isinstance(out, Found)
        assert out.value == parse_expr("zeta1", T)

    def test_homogeneous_nontrivial(self):
        T = log_tower()
        # D(w) = w/z has solution w = c*z; w = 0 is excluded
        out = solve_first_order(parse_expr("0", T), parse_expr("1/z", T),
                                T, SMALL)
        assert isinstance(out, Found)
        assert not out.value.is_zero()
        assert T.differentiate(out.value) == out.value / parse_expr("z", T)

    def test_exponential_obstruction(self):
        T = tower_from_pairs([])
        out = solve_first_order(parse_expr("0", T), parse_expr("1", T),
                                T, SMALL)
        assert isinstance(out, NoSolutionWithinBounds)

    def test_certified_refutation(self):
        T = tower_from_pairs([])
        out = solve_first_order(parse_expr("1/z", T), parse_expr("0", T),
                                T, SMALL)
        assert isinstance(out, NoSolutionWithinBounds)
        assert out.certified

    def test_rational_antiderivative(self):
        T = tower_from_pairs([])
        out = solve_first_order(parse_expr("-1/z^2", T), parse_expr("0", T),
                                T, SMALL)
        assert isinstance(out, Found)
        assert out.value == parse_expr("1/z", T)

    def test_solution_verified(self):
        rng = random.Random(3)
        T = two_log_tower()
        # build solvable instances: pick nonzero w, set f = D(w) - g*w
        for _ in range(5):
            w = RatFun.const(T.vars, 0)
            while w.is_zero():
                w = random_ratfun(rng, ("z",), max_deg=2).extend_vars(T.vars)
            g = random_ratfun(rng, ("z",), max_deg=1).extend_vars(T.vars)
            f = T.differentiate(w) - g * w
            out = solve_first_order(f, g, T, Bounds(4, 4, 2, escalation=()))
            assert isinstance(out, Found)
            assert T.differentiate(out.value) == f + g * out.value
