"""Exact pmf container: invariants, distances, serialization."""

from fractions import Fraction

import pytest

from findep.pmf import (ExactPmf, coloring_key, format_rational, order_key,
                        parse_coloring_key, parse_order_key, parse_rational,
                        tv_distance)


def _pmf(masses, kind="coloring", interval=(1, 2)):
    return ExactPmf(kind=kind, interval=interval, mass=masses, q=3)


class TestInvariants:
    def test_masses_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            _pmf({(1, 2): Fraction(1, 2)})

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            _pmf({(1, 2): Fraction(3, 2), (2, 1): Fraction(-1, 2)})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            ExactPmf(kind="widget", interval=(1, 1), mass={(1,): Fraction(1)})


class TestOps:
    def test_tv_against_self_is_zero(self):
        p = _pmf({(1, 2): Fraction(1, 2), (2, 1): Fraction(1, 2)})
        assert p.tv(p) == 0

    def test_tv_simple_value(self):
        p = _pmf({(1, 2): Fraction(1, 2), (2, 1): Fraction(1, 2)})
        q = _pmf({(1, 2): Fraction(1, 4), (2, 1): Fraction(3, 4)})
        assert p.tv(q) == Fraction(1, 4)

    def test_tv_distance_disjoint_supports(self):
        assert tv_distance({(1,): Fraction(1)}, {(2,): Fraction(1)}) == 1

    def test_restrict_coloring_marginalizes(self):
        p = ExactPmf(kind="coloring", interval=(1, 2),
                     mass={(1, 2): Fraction(1, 3), (1, 3): Fraction(1, 3),
                           (2, 1): Fraction(1, 3)}, q=3)
        r = p.restrict_coloring((1, 1))
        assert r.mass_of((1,)) == Fraction(2, 3)
        assert r.mass_of((2,)) == Fraction(1, 3)

    def test_restrict_window_must_be_inside(self):
        p = _pmf({(1, 2): Fraction(1)})
        with pytest.raises(ValueError):
            p.restrict_coloring((0, 1))


class TestSerialization:
    def test_rational_round_trip(self):
        for s in ("1/2", "3/2", "2/1", "0/1"):
            assert format_rational(parse_rational(s)) == s

    def test_coloring_key_round_trip(self):
        for colors in ((1,), (1, 2, 1), (4, 3, 4, 1)):
            assert parse_coloring_key(coloring_key(colors)) == colors

    def test_order_key_round_trip(self):
        ranks = (2, 4, 1, 5, 3)
        assert parse_order_key(order_key(ranks)) == ranks

    def test_json_round_trip(self):
        p = ExactPmf(kind="coloring", interval=(1, 2),
                     mass={(1, 2): Fraction(1, 3), (2, 1): Fraction(2, 3)},
                     q=3, w=Fraction(3, 2))
        q = ExactPmf.from_json_dict(p.to_json_dict())
        assert q.mass == p.mass
        assert q.interval == p.interval
        assert q.w == p.w

    def test_json_is_sorted_and_stable(self):
        p = ExactPmf(kind="order", interval=(1, 2),
                     mass={(2, 1): Fraction(1, 2), (1, 2): Fraction(1, 2)},
                     w=Fraction(1))
        assert p.to_json() == p.to_json()
        d = p.to_json_dict()
        keys = [e["key"] for e in d["entries"]]
        assert keys == sorted(keys)

    def test_rationals_never_serialize_as_floats(self):
        p = _pmf({(1, 2): Fraction(1, 3), (2, 1): Fraction(2, 3)})
        for entry in p.to_json_dict()["entries"]:
            assert "/" in entry["mass"]
