"""Total-order combinatorics: neighbor maps, founders, graphs, conditional
coloring laws and their Markov window property."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from findep.orders import (TotalOrder, build_graph, check_markov_window,
                           conditional_coloring_pmf, founder_positions,
                           founders, is_linear_extension, neighbor_maps,
                           random_linear_extension, restrict_ranks, to_dot)
from findep.rng import Stream


def order_of(*ranks, start=1):
    return TotalOrder((start, start + len(ranks) - 1), tuple(ranks))


def random_order(n, seed, start=1):
    return TotalOrder.random((start, start + n - 1), Stream(seed, 77))


orders_strategy = st.integers(2, 8).flatmap(
    lambda n: st.permutations(list(range(1, n + 1))))


class TestTotalOrder:
    def test_rank_bijection_enforced(self):
        with pytest.raises(ValueError):
            order_of(1, 1, 2)

    def test_restrict_reranks(self):
        o = order_of(2, 4, 1, 5, 3)
        assert o.restrict((2, 4)).ranks == (2, 1, 3)

    def test_by_rank_lists_sites_in_arrival_order(self):
        o = order_of(2, 4, 1, 5, 3)
        assert o.by_rank() == [3, 1, 5, 2, 4]

    def test_json_round_trip(self):
        o = order_of(2, 4, 1, 5, 3, start=-2)
        assert TotalOrder.from_json_dict(o.to_json_dict()) == o
        assert o.to_json_dict() == {"interval": [-2, 2],
                                    "ranks": [2, 4, 1, 5, 3]}


class TestNeighborMaps:
    def test_left_to_right_order(self):
        # ranks increasing left to right: everything looks back one step
        o = order_of(1, 2, 3, 4)
        nm = neighbor_maps(o)
        assert nm.left == (None, 1, 2, 3)
        assert nm.right == (None, None, None, None)

    def test_single_site(self):
        nm = neighbor_maps(order_of(1))
        assert nm.left == (None,) and nm.right == (None,)

    def test_worked_example(self):
        # the (2,4,1,5,3) order on [1..5]
        nm = neighbor_maps(order_of(2, 4, 1, 5, 3))
        assert nm.left == (None, 1, None, 3, 3)
        assert nm.right == (3, 3, None, 5, None)

    @given(orders_strategy)
    def test_matches_direct_definition(self, ranks):
        o = order_of(*ranks)
        nm = neighbor_maps(o)
        a = o.interval[0]
        for i in o.sites():
            ri = o.rank_of(i)
            left = [j for j in range(a, i) if o.rank_of(j) < ri]
            right = [j for j in range(i + 1, o.interval[1] + 1)
                     if o.rank_of(j) < ri]
            assert nm.left_of(i) == (max(left) if left else None)
            assert nm.right_of(i) == (min(right) if right else None)


class TestFounders:
    def test_endpoints_always_founders(self):
        for seed in range(20):
            o = random_order(6, seed)
            f = founders(o)
            assert o.interval[0] in f and o.interval[1] in f

    def test_rank_one_always_founder(self):
        for seed in range(20):
            o = random_order(7, seed)
            first = o.by_rank()[0]
            assert first in founders(o)

    def test_worked_example(self):
        assert founders(order_of(2, 4, 1, 5, 3)) == frozenset({1, 3, 5})

    @given(orders_strategy)
    def test_equals_infinite_neighbor_characterization(self, ranks):
        o = order_of(*ranks)
        nm = neighbor_maps(o)
        via_nm = frozenset(i for i in o.sites()
                           if nm.left_of(i) is None or nm.right_of(i) is None)
        assert founders(o) == via_nm

    def test_restrict_ranks_helper(self):
        assert restrict_ranks((2, 4, 1, 5, 3), 1, 4) == (2, 1, 3)


class TestGraph:
    def test_single_site_no_edges(self):
        assert build_graph(order_of(1)).edges == ()

    def test_two_sites_single_edge(self):
        g = build_graph(order_of(2, 1))
        assert g.edges == ((1, 2),)

    def test_worked_example_edges(self):
        g = build_graph(order_of(2, 4, 1, 5, 3))
        assert set(g.edges) == {(1, 3), (2, 1), (2, 3), (4, 3), (4, 5), (5, 3)}

    def test_degree_invariants_random(self):
        for seed in range(10_000):
            o = random_order(1 + seed % 30, seed)
            g = build_graph(o)
            f = founders(o)
            first = o.by_rank()[0]
            for s in o.sites():
                d = g.out_degree(s)
                if s == first:
                    assert d == 0
                elif s in f:
                    assert d == 1
                else:
                    assert d == 2

    def test_dot_export(self):
        # site 1 has rank 2, so it points at the earlier-arriving site 2
        txt = to_dot(build_graph(order_of(2, 1)))
        assert txt.startswith("digraph")
        assert '"1" -> "2";' in txt


class TestConditionalColoring:
    def test_single_site_uniform(self):
        p = conditional_coloring_pmf(order_of(1), 4)
        assert all(m == Fraction(1, 4) for m in p.mass.values())

    def test_support_is_proper(self):
        for seed in range(10):
            o = random_order(6, seed)
            p = conditional_coloring_pmf(o, 4)
            for colors in p.support():
                assert all(x != y for x, y in zip(colors, colors[1:]))

    def test_endpoint_pair_uniform_when_only_founders(self):
        # orders whose founders are exactly the endpoints: the two endpoint
        # colors are uniform over ordered unequal pairs
        found = 0
        for seed in range(200):
            o = random_order(5, seed)
            if founders(o) != frozenset({1, 5}):
                continue
            found += 1
            p = conditional_coloring_pmf(o, 4)
            marg = p.pushforward(lambda k: (k[0], k[-1]))
            assert len(marg.mass) == 12
            assert all(m == Fraction(1, 12) for m in marg.mass.values())
        assert found > 0

    def test_linear_extension_invariance(self):
        for seed in range(12):
            o = random_order(6, seed)
            base = conditional_coloring_pmf(o, 4)
            stream = Stream(seed, 5)
            for _ in range(3):
                seq = random_linear_extension(o, stream)
                assert is_linear_extension(o, seq)
                alt = conditional_coloring_pmf(o, 4, sequence=seq)
                assert alt.mass == base.mass

    def test_invalid_sequence_rejected(self):
        o = order_of(2, 1, 3)
        # site 1 processed before its earlier-ranked neighbor 2
        with pytest.raises(ValueError, match="linear extension"):
            conditional_coloring_pmf(o, 4, sequence=[1, 2, 3])


class TestMarkovWindow:
    def test_same_order_gives_zero(self):
        o = random_order(6, 3)
        assert check_markov_window(o, o, (2, 5), 4) == 0

    def test_matching_window_with_endpoint_founders_gives_zero(self):
        # rejection-sample pairs satisfying the window hypotheses
        window = (2, 5)
        trials = 0
        stream = Stream(99, 1)
        attempts = 0
        while trials < 5 and attempts < 20000:
            attempts += 1
            o1 = TotalOrder.random((1, 7), stream)
            r1 = o1.restrict(window)
            if founder_positions(r1.ranks) != (0, 3):
                continue
            o2 = TotalOrder.random((1, 7), stream)
            if o2.restrict(window).ranks != r1.ranks or o2.ranks == o1.ranks:
                continue
            assert check_markov_window(o1, o2, window, 4) == 0
            trials += 1
        assert trials == 5

    def test_violating_pair_exists(self):
        # some pair with differing window founders shows a positive distance
        stream = Stream(7, 2)
        for _ in range(5000):
            o1 = TotalOrder.random((1, 6), stream)
            o2 = TotalOrder.random((1, 6), stream)
            if check_markov_window(o1, o2, (2, 5), 4) > 0:
                return
        pytest.fail("no adversarial pair found")
