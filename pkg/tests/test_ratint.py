"""Exact residue criterion for rational antiderivatives over Q(z)."""

import random
from fractions import Fraction

import pytest

from difftower.errors import DiffTowerError
from difftower.parser import parse_expr
from difftower.ratint import has_rational_antiderivative
from difftower.tower import tower_from_pairs


def R(text):
    return parse_expr(text, ("z",))


class TestCriterion:
    def test_polynomials_integrate(self):
        assert has_rational_antiderivative(R("3*z^2 + 1"))
        assert has_rational_antiderivative(R("0"))

    def test_simple_pole_refuted(self):
        assert not has_rational_antiderivative(R("1/z"))
        assert not has_rational_antiderivative(R("1/(z-2)"))

    def test_double_pole_integrates(self):
        assert has_rational_antiderivative(R("1/z^2"))
        assert has_rational_antiderivative(R("-2/z^3"))

    def test_mixed_poles(self):
        # 1/z^2 + 1/z: nonzero residue at 0 survives the Hermite part
        assert not has_rational_antiderivative(R("(z + 1)/z^2"))

    def test_log_derivative_of_product(self):
        assert not has_rational_antiderivative(R("(3*z^2+1)/(z^3+z)"))

    def test_zero_residues_higher_order(self):
        # d/dz [z/(z^2+1)] has only even-order pole structure
        u = R("z/(z^2+1)")
        T = tower_from_pairs([])
        assert has_rational_antiderivative(T.differentiate(u))

    def test_generators_rejected(self):
        T = tower_from_pairs([("zeta1", parse_expr("1/z", ("z", "zeta1")))])
        with pytest.raises(DiffTowerError):
            has_rational_antiderivative(parse_expr("zeta1", T))

    def test_agrees_with_differentiation(self):
        """Soundness: derivatives of random rational functions always pass."""
        from difftower.randexpr import random_ratfun
        rng = random.Random(99)
        T = tower_from_pairs([])
        for _ in range(40):
            u = random_ratfun(rng, ("z",), max_deg=4)
            f = T.differentiate(u)
            assert has_rational_antiderivative(f), f

    def test_shifted_simple_poles(self):
        """Completeness spot check: adding any simple pole flips the answer."""
        from difftower.randexpr import random_ratfun
        rng = random.Random(5)
        T = tower_from_pairs([])
        for _ in range(20):
            u = random_ratfun(rng, ("z",), max_deg=3)
            f = T.differentiate(u) + R("1/(z-1)")
            assert not has_rational_antiderivative(f), f
