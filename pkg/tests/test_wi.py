"""Weighted-insertion model: exact laws, the sampler, and the joint oracle.

Expected values worked out independently (by hand from the recurrences, or
by the brute-force enumerator) are frozen as literal rationals.
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from findep.errors import CapacityError
from findep.orders import founders
from findep.pmf import tv_distance
from findep.rng import Stream
from findep.wi import (Coloring, InsertionStep, WiParams, enumerate_joint,
                       exact_coloring_pmf, exact_order_pmf,
                       insertion_point_pmf, proper_colorings, sample_wi,
                       w_star)

F = Fraction


class TestParams:
    def test_q_lower_bound(self):
        with pytest.raises(ValueError):
            WiParams(2, F(1))

    def test_weight_must_be_positive(self):
        with pytest.raises(ValueError):
            WiParams(4, F(0))

    def test_coloring_properness_enforced(self):
        with pytest.raises(ValueError):
            Coloring((1, 3), (1, 1, 2))


class TestInsertionStep:
    def test_apply_inserts_and_ranks(self):
        colors, ranks = [1, 2], [1, 2]
        InsertionStep(2, 3).apply(colors, ranks)
        assert colors == [1, 3, 2] and ranks == [1, 3, 2]

    def test_neighbor_collision_rejected(self):
        with pytest.raises(ValueError, match="collides"):
            InsertionStep(2, 1).apply([1, 2], [1, 2])

    def test_slot_bounds(self):
        with pytest.raises(ValueError, match="slot"):
            InsertionStep(4, 3).apply([1, 2], [1, 2])

    def test_boundary_neighbor_absent(self):
        colors, ranks = [1], [1]
        InsertionStep(1, 2).apply(colors, ranks)
        assert colors == [2, 1]


class TestWStar:
    def test_known_values(self):
        assert w_star(4) == F(3, 2)
        assert w_star(3) == F(2)
        assert w_star(5) == F(4, 3)

    def test_domain(self):
        with pytest.raises(ValueError):
            w_star(2)


class TestInsertionPointPmf:
    def test_length_one_is_fair_coin(self):
        assert insertion_point_pmf(WiParams(4, F(1)), 1) == (F(1, 2), F(1, 2))

    def test_endpoint_bias_three_halves(self):
        got = insertion_point_pmf(WiParams(4, F(3, 2)), 3)
        assert got == (F(3, 10), F(1, 5), F(1, 5), F(3, 10))

    def test_endpoint_bias_two(self):
        got = insertion_point_pmf(WiParams(4, F(2)), 2)
        assert got == (F(2, 5), F(1, 5), F(2, 5))

    @given(st.integers(3, 6), st.fractions(min_value=F(1, 3), max_value=4),
           st.integers(1, 9))
    def test_sums_to_one(self, q, w, n):
        if w <= 0:
            return
        assert sum(insertion_point_pmf(WiParams(q, w), n)) == 1


class TestExactColoringPmf:
    def test_base_case_uniform(self):
        p = exact_coloring_pmf(WiParams(4, F(2)), 1)
        assert all(m == F(1, 4) for m in p.mass.values())

    def test_length_three_critical_weight(self):
        p = exact_coloring_pmf(WiParams(4, F(3, 2)), 3)
        assert p.mass_of((1, 2, 1)) == F(1, 48)
        assert p.mass_of((1, 2, 3)) == F(1, 32)
        eq = sum((m for k, m in p.mass.items() if k[0] == k[2]), F(0))
        assert eq == F(1, 4)
        assert 1 - eq == F(3, 4)

    def test_q3_pairs_uniform(self):
        p = exact_coloring_pmf(WiParams(3, F(2)), 2)
        assert len(p.mass) == 6
        assert all(m == F(1, 6) for m in p.mass.values())

    def test_pairs_uniform_any_weight(self):
        for w in (F(1), F(3, 2), F(17, 5)):
            p = exact_coloring_pmf(WiParams(4, w), 2)
            assert all(m == F(1, 12) for m in p.mass.values())

    def test_masses_sum_to_one_and_support_proper(self):
        p = exact_coloring_pmf(WiParams(5, F(7, 3)), 4)
        assert sum(p.mass.values()) == 1
        for colors in p.support():
            assert all(x != y for x, y in zip(colors, colors[1:]))

    def test_capacity_guard(self):
        with pytest.raises(CapacityError, match="exceeds guard"):
            exact_coloring_pmf(WiParams(4, F(1)), 40)


class TestExactOrderPmf:
    def test_weight_one_uniform(self):
        for n in (2, 3, 5):
            p = exact_order_pmf(F(1), n)
            assert all(m == p.mass_of(next(iter(p.support())))
                       for m in p.mass.values())

    def test_two_sites_symmetric(self):
        p = exact_order_pmf(F(7, 2), 2)
        assert all(m == F(1, 2) for m in p.mass.values())

    def test_three_sites_founder_split(self):
        w = F(3, 2)
        p = exact_order_pmf(w, 3)
        z = 4 * w**3 + 2 * w**2
        hi, lo = w**3 / z, w**2 / z
        got = sorted(p.mass.values())
        assert got == [lo, lo] + [hi] * 4

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            exact_order_pmf(F(1), 12)


class TestSampler:
    def test_single_color_and_trivial_order(self):
        col, order = sample_wi(WiParams(4, F(1)), 1, Stream(5, 0))
        assert len(col.colors) == 1 and order.ranks == (1,)

    def test_outputs_proper_and_endpoints_founders(self):
        stream = Stream(17, 0)
        for _ in range(300):
            col, order = sample_wi(WiParams(4, F(3, 2)), 7, stream)
            assert all(x != y for x, y in zip(col.colors, col.colors[1:]))
            f = founders(order)
            assert 1 in f and 7 in f

    def test_deterministic_under_stream(self):
        a = sample_wi(WiParams(4, F(3, 2)), 6, Stream(3, 9))
        b = sample_wi(WiParams(4, F(3, 2)), 6, Stream(3, 9))
        assert a == b

    def test_pair_frequencies_close_to_uniform(self):
        # n=2 marginal is uniform over the 12 proper ordered pairs
        stream = Stream(21, 0)
        counts = {}
        n = 6000
        for _ in range(n):
            col, _ = sample_wi(WiParams(4, F(2)), 2, stream)
            counts[col.colors] = counts.get(col.colors, 0) + 1
        assert len(counts) == 12
        for c in counts.values():
            assert abs(c - n / 12) < 5 * (n / 12) ** 0.5


class TestJointOracle:
    @pytest.mark.parametrize("q", [3, 4, 5])
    @pytest.mark.parametrize("w", [F(1), F(3, 2), F(2)])
    def test_marginals_match_direct_laws(self, q, w):
        for n in (1, 2, 3, 4):
            joint = enumerate_joint(WiParams(q, w), n)
            assert joint.coloring_marginal().mass == \
                exact_coloring_pmf(WiParams(q, w), n).mass
            assert joint.order_marginal().mass == \
                exact_order_pmf(w, n).mass

    def test_single_site(self):
        joint = enumerate_joint(WiParams(4, F(1)), 1)
        assert joint.order_mass((1,)) == 1
        assert joint.mass((1,), (3,)) == F(1, 4)

    def test_joint_masses_sum_to_one(self):
        joint = enumerate_joint(WiParams(4, F(3, 2)), 4)
        assert sum(m for _, _, m in joint.items()) == 1

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            enumerate_joint(WiParams(4, F(1)), 8)


def test_proper_colorings_count():
    assert sum(1 for _ in proper_colorings(4, 5)) == 4 * 3**4
    assert sum(1 for _ in proper_colorings(3, 1)) == 3
