"""Structure theory: relations, decomposition, normal towers, bases,
shift extraction, subfield reports."""

import random
from fractions import Fraction

import pytest

from difftower import structure
from difftower.ansatz import Bounds, Witness
from difftower.errors import (AlreadyInBase, MalformedAntiderivative,
                              NotAntiderivative, NotFlat)
from difftower.parser import format_ratfun, parse_expr
from difftower.structure import (Independent, LinearField, NotLinearField,
                                 Relation, antiderivative_decompose,
                                 compositum_basis, minimal_shift,
                                 normal_tower, ostrowski_relation,
                                 subfield_structure)
from difftower.tower import SubfieldSpec, base_subfield, tower_from_pairs

SMALL = Bounds(3, 3, 2, escalation=())


def log_tower():
    return tower_from_pairs([("zeta1", parse_expr("1/z", ("z", "zeta1")))])


def two_log_tower():
    v = ("z", "zeta1", "zeta2")
    return tower_from_pairs([("zeta1", parse_expr("1/z", v)),
                             ("zeta2", parse_expr("1/(z+1)", v))])


def loglog_tower():
    v = ("z", "zeta1", "zeta2")
    return tower_from_pairs([("zeta1", parse_expr("1/z", v)),
                             ("zeta2", parse_expr("1/(zeta1*z)", v))])


class TestLinearField:
    def test_plain_generators(self):
        T = two_log_tower()
        F = LinearField(T, (parse_expr("z", T), parse_expr("zeta1", T)))
        assert F.contains(parse_expr("(z + zeta1^2)/(zeta1 - 1)", T))
        assert not F.contains(parse_expr("zeta2", T))

    def test_combination_generator(self):
        T = two_log_tower()
        F = LinearField(T, (parse_expr("z", T),
                            parse_expr("zeta1 + zeta2", T)))
        assert F.contains(parse_expr("zeta1 + zeta2 + z^2", T))
        assert not F.contains(parse_expr("zeta1", T))
        # adding zeta1 separates the combination into both generators
        F2 = LinearField(T, (parse_expr("z", T),
                             parse_expr("zeta1 + zeta2", T),
                             parse_expr("zeta1", T)))
        assert F2.contains(parse_expr("zeta2", T))

    def test_shifted_generator_without_z(self):
        T = log_tower()
        F = LinearField(T, (parse_expr("zeta1 + z^2", T),))
        assert F.contains(parse_expr("zeta1 + z^2", T))
        assert not F.contains(parse_expr("zeta1", T))
        assert not F.contains(parse_expr("z", T))

    def test_empty_is_constants(self):
        T = log_tower()
        F = LinearField(T, ())
        assert F.contains(parse_expr("7/3", T))
        assert not F.contains(parse_expr("z", T))

    def test_nonlinear_rejected(self):
        T = log_tower()
        with pytest.raises(NotLinearField):
            LinearField(T, (parse_expr("zeta1^2", T),))
        with pytest.raises(NotLinearField):
            LinearField(T, (parse_expr("z^2", T),))


class TestOstrowski:
    def test_independent_pair(self):
        T = two_log_tower()
        out = ostrowski_relation([parse_expr("zeta1", T),
                                  parse_expr("zeta2", T)],
                                 base_subfield(T), T, SMALL)
        assert isinstance(out, Independent)

    def test_single_antiderivative(self):
        T = log_tower()
        out = ostrowski_relation([parse_expr("zeta1", T)],
                                 base_subfield(T), T, SMALL)
        assert isinstance(out, Independent)

    def test_constructed_relation(self):
        T = two_log_tower()
        ws = [parse_expr(t, T)
              for t in ("zeta1", "zeta2", "zeta1 + zeta2 + 3*z^2")]
        out = ostrowski_relation(ws, base_subfield(T), T, SMALL)
        assert isinstance(out, Relation)
        assert out.alpha == (Fraction(1), Fraction(1), Fraction(-1))
        assert out.remainder == parse_expr("-3*z^2", T)

    def test_first_nonzero_normalized_to_one(self):
        T = two_log_tower()
        ws = [parse_expr("2*zeta1 + z", T), parse_expr("zeta1", T)]
        out = ostrowski_relation(ws, base_subfield(T), T, SMALL)
        assert isinstance(out, Relation)
        assert out.alpha[0] == 1

    def test_not_antiderivative(self):
        T = loglog_tower()
        with pytest.raises(NotAntiderivative):
            ostrowski_relation([parse_expr("zeta2", T)],
                               base_subfield(T), T, SMALL)


class TestDecompose:
    def test_basic(self):
        T = two_log_tower()
        alpha, a = antiderivative_decompose(parse_expr("2*zeta1 + z^2", T), T)
        assert alpha == (Fraction(2), Fraction(0))
        assert a == parse_expr("z^2", T)

    def test_both_generators(self):
        T = two_log_tower()
        alpha, a = antiderivative_decompose(
            parse_expr("zeta1 + zeta2 + 1/z", T), T)
        assert alpha == (Fraction(1), Fraction(1))
        assert a == parse_expr("1/z", T)

    def test_round_trip(self):
        T = two_log_tower()
        g = parse_expr("-3/2*zeta1 + 5*zeta2 + (z+1)/z", T)
        alpha, a = antiderivative_decompose(g, T)
        rebuilt = a
        for c, name in zip(alpha, T.gen_names):
            rebuilt = rebuilt + T.gen(name).scale(c)
        assert rebuilt == g

    def test_product_rejected(self):
        T = two_log_tower()
        with pytest.raises(NotAntiderivative):
            antiderivative_decompose(parse_expr("zeta1*zeta2", T), T)

    def test_requires_flat(self):
        with pytest.raises(NotFlat):
            antiderivative_decompose(
                parse_expr("zeta1", loglog_tower()), loglog_tower())


class TestNormalTower:
    def test_iterated_logs(self):
        nt = normal_tower(loglog_tower(), SMALL)
        assert not nt.partial
        rendered = [[format_ratfun(e) for e in lvl] for lvl in nt.levels]
        assert rendered == [[], ["z"], ["zeta1"], ["zeta2"]]

    def test_flat_two_logs(self):
        nt = normal_tower(two_log_tower(), SMALL)
        rendered = [[format_ratfun(e) for e in lvl] for lvl in nt.levels]
        assert rendered == [[], ["z"], ["zeta1", "zeta2"]]

    def test_delayed_generator(self):
        v = ("z", "zeta1", "zeta2", "zeta3")
        T = tower_from_pairs([("zeta1", parse_expr("1/z", v)),
                              ("zeta2", parse_expr("zeta1", v)),
                              ("zeta3", parse_expr("1/(z+1)", v))])
        nt = normal_tower(T, SMALL)
        rendered = [[format_ratfun(e) for e in lvl] for lvl in nt.levels]
        assert rendered == [[], ["z"], ["zeta1", "zeta3"], ["zeta2"]]

    def test_levels_strictly_grow(self):
        nt = normal_tower(loglog_tower(), SMALL)
        for lvl in nt.levels[1:]:
            assert len(lvl) >= 1

    def test_top_level_spans_all_generators(self):
        for T in (log_tower(), two_log_tower(), loglog_tower()):
            nt = normal_tower(T, SMALL)
            entries = [e for lvl in nt.levels for e in lvl]
            F = LinearField(T, entries)
            for v in T.vars:
                assert F.contains(T.gen(v))

    def test_translation_preserves_levels(self):
        """Each level generator maps to itself plus something one level down."""
        from difftower import autgroup
        T = two_log_tower()
        nt = normal_tower(T, SMALL)
        sigma = autgroup.make_translation_aut(T, (Fraction(1), Fraction(-2)))
        below: list = []
        for lvl in nt.levels:
            F = LinearField(T, below)
            for eta in lvl:
                moved = autgroup.apply(sigma, eta) - eta
                assert F.contains(moved)
            below.extend(lvl)


class TestCompositumBasis:
    def test_remaining_generator(self):
        T = two_log_tower()
        K = SubfieldSpec(generators=(parse_expr("z", T),
                                     parse_expr("zeta1", T)))
        out = compositum_basis(K, T, SMALL)
        assert out.chosen == ("zeta2",) and not out.partial

    def test_base_field(self):
        T = two_log_tower()
        out = compositum_basis(base_subfield(T), T, SMALL)
        assert out.chosen == ("zeta1", "zeta2")

    def test_combination_smallest_index(self):
        T = two_log_tower()
        K = SubfieldSpec(generators=(parse_expr("z", T),
                                     parse_expr("zeta1 + zeta2", T)))
        out = compositum_basis(K, T, SMALL)
        assert out.chosen == ("zeta1",) and not out.partial


class TestMinimalShift:
    def test_affine(self):
        T = two_log_tower()
        u = parse_expr("zeta2 + z", T)
        assert minimal_shift(u, T, "zeta2") == u

    def test_square(self):
        T = two_log_tower()
        u = parse_expr("(zeta2 + z)^2", T)
        assert minimal_shift(u, T, "zeta2") == parse_expr("zeta2 + z", T)

    def test_reciprocal_uses_denominator(self):
        T = two_log_tower()
        u = parse_expr("1/(zeta2 + z)", T)
        assert minimal_shift(u, T, "zeta2") == parse_expr("zeta2 + z", T)

    def test_rational_shift(self):
        T = two_log_tower()
        u = parse_expr("(zeta2 + zeta1/z)^3", T)
        assert minimal_shift(u, T, "zeta2") \
            == parse_expr("zeta2 + zeta1/z", T)

    def test_already_in_base(self):
        T = two_log_tower()
        with pytest.raises(AlreadyInBase):
            minimal_shift(parse_expr("zeta1 + z", T), T, "zeta2")


class TestSubfieldStructure:
    def test_log_over_z_generates_everything(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1/z", T),))
        report = subfield_structure(K, T, SMALL)
        assert report.status == "resolved"
        assert tuple(g.expr for g in report.generators) \
            == (parse_expr("z", T), parse_expr("zeta1", T))
        # the input generator is recovered as zeta1/z over (z, zeta1)
        assert report.input_witnesses[0].substituted() \
            == parse_expr("zeta1/z", T)

    def test_square_of_base(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("z^2", T),))
        report = subfield_structure(K, T, SMALL)
        assert report.status == "resolved"
        assert tuple(g.expr for g in report.generators) == (parse_expr("z", T),)

    def test_plain_generator(self):
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1", T),))
        report = subfield_structure(K, T, SMALL)
        assert report.status == "resolved"
        assert tuple(g.expr for g in report.generators) \
            == (parse_expr("z", T), parse_expr("zeta1", T))

    def test_derivative_chain_property(self):
        """Each found generator's derivative is witnessed over its
        predecessors, matching the iterated-antiderivative shape."""
        T = log_tower()
        K = SubfieldSpec(generators=(parse_expr("zeta1/z", T),))
        report = subfield_structure(K, T, SMALL)
        from difftower.ansatz import Found, subfield_membership
        for i, gen in enumerate(report.generators):
            prev = tuple(g.expr for g in report.generators[:i])
            d = T.differentiate(gen.expr)
            if not prev:
                assert d.used_vars() == set() or d.is_const()
            else:
                out = subfield_membership(
                    d, SubfieldSpec(generators=prev), T, SMALL)
                assert isinstance(out, Found)
