"""Graph construction, generators, clique chains, profiles."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedmis.graph import (
    BitThresholds,
    CliqueChainSpec,
    Graph,
    InvalidCliqueChainError,
    StrengthProfile,
    active_edge_count,
    clique_chain,
    clique_chain_biases,
    complete,
    cycle,
    default_num_cliques,
    generate,
    gnp,
    parse_graph_spec,
    path,
    star,
)
from mixedmis.strength import BiasedBits, BitSchedule, FairBits, TabulatedDyadic


class TestGraph:
    def test_rejects_self_loops_duplicates_and_range(self):
        with pytest.raises(ValueError, match="self-loops"):
            Graph(3, [(0, 0)])
        with pytest.raises(ValueError, match="duplicate"):
            Graph(3, [(0, 1), (1, 0)])
        with pytest.raises(ValueError, match="out of range"):
            Graph(3, [(0, 5)])

    def test_adjacency_is_sorted_and_symmetric(self):
        g = Graph(4, [(2, 0), (3, 1), (0, 1)])
        assert list(g.neighbors(0)) == [1, 2]
        assert list(g.neighbors(1)) == [0, 3]
        for u in range(4):
            for v in g.neighbors(u):
                assert u in g.neighbors(v)

    def test_max_degree_matches_lists(self):
        g = star(5)
        assert g.max_degree == 5 == len(g.neighbors(0))

    def test_single_agent_complete(self):
        g = complete(1)
        assert (g.n, g.num_edges, g.max_degree) == (1, 0, 0)

    def test_edge_list_roundtrip(self):
        g = gnp(20, 0.3, seed=4)
        again = Graph.from_edge_list_text(g.to_edge_list_text())
        assert again == g
        assert g.to_edge_list_text().startswith("n 20\n")


class TestGenerators:
    def test_shapes(self):
        assert complete(5).num_edges == 10
        assert star(4).num_edges == 4
        assert path(6).num_edges == 5
        assert cycle(6).num_edges == 6

    def test_gnp_determinism_and_bounds(self):
        a = gnp(64, 0.2, seed=9)
        b = gnp(64, 0.2, seed=9)
        assert a == b and a.to_edge_list_text() == b.to_edge_list_text()
        assert gnp(64, 0.2, seed=10) != a
        assert gnp(50, 0.0, seed=1).num_edges == 0
        assert gnp(10, 1.0, seed=1).num_edges == 45

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=60),
        p=st.floats(min_value=0, max_value=1),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_gnp_always_satisfies_graph_invariants(self, n, p, seed):
        g = gnp(n, p, seed)
        e = g.edges
        assert g.n == n
        if len(e):
            assert (e[:, 0] < e[:, 1]).all()
            assert e.min() >= 0 and e.max() < n
        degs = g.degrees
        assert g.max_degree == (int(degs.max()) if n else 0)

    def test_spec_parser(self):
        g, prof = parse_graph_spec("clique_chain(8,3)")
        assert g.n == 24 and prof is not None
        g2, prof2 = parse_graph_spec("gnp(30, 0.1)", seed=3)
        assert g2.n == 30 and prof2 is None
        with pytest.raises(ValueError):
            parse_graph_spec("torus(3)")
        assert generate("complete(4)")[0].num_edges == 6


class TestCliqueChain:
    def test_edge_count_by_hand(self):
        g, _ = clique_chain(4, 3)
        # 3 cliques of C(4,2) plus two complete bipartite links of 16
        assert g.num_edges == 3 * 6 + 2 * 16 == 50

    def test_bias_schedule_at_16_3(self):
        _, prof = clique_chain(16, 3)
        assert prof[0].q == Fraction(1, 2)
        assert prof[16].q == Fraction(3, 8)
        assert prof[32].q == Fraction(1, 4)

    def test_default_num_cliques(self):
        assert default_num_cliques(16) == 3
        assert default_num_cliques(256) == 4
        assert default_num_cliques(1024) == 4
        spec = CliqueChainSpec(16)
        assert spec.num_cliques == 3

    @pytest.mark.parametrize("nc", [2, 3, 4, 5, 7])
    def test_schedule_strictly_decreasing_within_range(self, nc):
        biases = clique_chain_biases(nc)
        assert biases[0] == Fraction(1, 2)
        assert biases[-1] == Fraction(1, 4)
        assert all(a > b for a, b in zip(biases, biases[1:]))
        assert all(Fraction(1, 4) <= b <= Fraction(1, 2) for b in biases)

    def test_custom_schedule_validated(self):
        with pytest.raises(InvalidCliqueChainError, match="outside the allowed range"):
            clique_chain(4, 3, biases=["1/2", "3/8", "1/8"])
        with pytest.raises(InvalidCliqueChainError, match="need 3 biases"):
            clique_chain(4, 3, biases=["1/2", "1/4"])

    def test_single_clique_degenerate(self):
        g, prof = clique_chain(4, 1)
        assert g.num_edges == 6
        assert prof[0].q == Fraction(1, 2)

    def test_profile_covers_all_agents(self):
        g, prof = clique_chain(8, 4)
        assert prof.n == g.n == 32


class TestActiveEdgeCount:
    def test_triangle(self):
        g = complete(3)
        assert active_edge_count(g, [0, 1, 2]) == 3
        assert active_edge_count(g, [0]) == 0

    def test_clique_chain_clique_removed(self):
        g, _ = clique_chain(4, 3)
        assert active_edge_count(g, range(4, 12)) == 50 - 6 - 16

    def test_full_and_empty_sets(self):
        g = gnp(30, 0.2, seed=2)
        assert active_edge_count(g, np.ones(30, dtype=bool)) == g.num_edges
        assert active_edge_count(g, []) == 0

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000), data=st.data())
    def test_monotone_under_inclusion(self, seed, data):
        g = gnp(25, 0.25, seed)
        small = data.draw(st.sets(st.integers(0, 24), max_size=12))
        extra = data.draw(st.sets(st.integers(0, 24), max_size=12))
        assert active_edge_count(g, small) <= active_edge_count(g, small | extra)


class TestStrengthProfile:
    def test_uniform_and_indexing(self):
        prof = StrengthProfile.uniform(4, FairBits())
        assert prof.n == 4 and prof[3] == FairBits()

    def test_spec_roundtrip(self, tmp_path):
        prof = StrengthProfile(
            [FairBits(), BiasedBits(Fraction(1, 3)), BitSchedule(["1/2", "1/4"])]
        )
        f = tmp_path / "profile.json"
        prof.save(f)
        again = StrengthProfile.load(f)
        assert [d.spec() for d in again] == [d.spec() for d in prof]

    def test_default_shorthand(self):
        prof = StrengthProfile.from_spec({"default": {"kind": "fair_bits"}, "n": 7})
        assert prof.n == 7

    def test_value_groups_compress(self):
        _, prof = clique_chain(8, 3)
        gid, reps = prof.value_groups()
        assert len(reps) == 3
        assert list(gid[:8]) == [0] * 8

    def test_thresholds_reject_tabulated(self):
        prof = StrengthProfile([FairBits(), TabulatedDyadic([1.0, 0.5])])
        with pytest.raises(ValueError, match="analysis-only"):
            prof.bit_thresholds()

    def test_cdf_float_matches_exact(self):
        prof = StrengthProfile([FairBits(), BiasedBits(Fraction(1, 4))])
        np.testing.assert_allclose(prof.cdf_float(3), [0.125, 1 / 64])


def test_bit_thresholds_schedule_positions():
    sched = BitSchedule([Fraction(1, 2), Fraction(1, 4)])
    prof = StrengthProfile([sched, FairBits()])
    thr = prof.bit_thresholds()
    agents = np.array([0, 1])
    le0, one0 = thr.le_at(agents, 0)
    le5, one5 = thr.le_at(agents, 5)
    assert not one0.any() and not one5.any()
    assert le0[0] == (1 << 63) - 1          # first bias 1/2
    assert le5[0] == (1 << 62) - 1          # past the list: last bias 1/4
    assert le0[1] == le5[1] == (1 << 63) - 1
