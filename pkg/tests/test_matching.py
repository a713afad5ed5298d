import numpy as np
import pytest

from helpers import (assert_valid_matching, brute_force_max_matching_weight,
                     cycle_graph, path_graph, random_graph)
from mlpart import (RATING_EXPANSION2, RATING_EX_ALG, RATING_INNER_OUTER,
                    Graph, contract_matching, edge_ratings, gpa_matching,
                    matching_schedule, random_matching, random_phase_levels,
                    rate_edge)


class TestRatings:
    def test_expansion_squared(self):
        g = Graph(2, [0], [1], [2.0], np.array([1.0, 2.0]))
        assert rate_edge(g, 0, RATING_EXPANSION2) == pytest.approx(2.0)

    def test_inner_outer_triangle(self):
        g = Graph(3, [0, 0, 1], [1, 2, 2], np.ones(3), None)
        for e in range(g.m):
            assert rate_edge(g, e, RATING_INNER_OUTER) == pytest.approx(0.5)

    def test_inner_outer_lone_edge_infinite(self):
        g = Graph(2, [0], [1], [3.0], None)
        assert rate_edge(g, 0, RATING_INNER_OUTER) == np.inf

    def test_ex_alg_division(self):
        g = Graph(2, [0], [1], [2.0], np.array([1.0, 2.0]))
        assert rate_edge(g, 0, RATING_EX_ALG, np.array([0.5])) == pytest.approx(4.0)

    def test_ex_alg_requires_couplings(self):
        g = Graph(2, [0], [1], [1.0], None)
        with pytest.raises(ValueError):
            edge_ratings(g, RATING_EX_ALG)

    def test_ratings_positive(self):
        for seed in range(8):
            g = random_graph(seed, weighted=True, node_weights=True)
            rho = np.random.default_rng(seed).uniform(0.1, 2.0, g.m)
            for kind, r in ((RATING_EXPANSION2, None), (RATING_INNER_OUTER, None),
                            (RATING_EX_ALG, rho)):
                assert np.all(edge_ratings(g, kind, r) > 0)


class TestRandomMatching:
    def test_disjoint_edges_all_matched(self):
        g = Graph(6, [0, 2, 4], [1, 3, 5], np.ones(3), None)
        for seed in range(5):
            assert random_matching(g, seed).size == 3

    def test_edgeless_empty(self):
        g = Graph(4, [], [], [], None)
        assert random_matching(g, 0).size == 0

    def test_deterministic(self):
        g = random_graph(3)
        assert np.array_equal(random_matching(g, 7), random_matching(g, 7))

    def test_valid_and_traversal_maximal(self):
        for seed in range(20):
            g = random_graph(seed)
            m = random_matching(g, seed)
            assert_valid_matching(g, m)
            # maximality: no edge with both endpoints unmatched remains
            matched = np.zeros(g.n, dtype=bool)
            for e in m:
                matched[g.edge_u[e]] = matched[g.edge_v[e]] = True
            for e in range(g.m):
                assert matched[g.edge_u[e]] or matched[g.edge_v[e]]

    def test_allowed_mask_respected(self):
        g = random_graph(4)
        allowed = np.zeros(g.m, dtype=bool)
        allowed[: g.m // 2] = True
        m = random_matching(g, 1, allowed)
        assert all(allowed[e] for e in m)


class TestGpa:
    def test_middle_edge_dominates(self):
        g = path_graph(4)
        m = gpa_matching(g, np.array([1.0, 5.0, 1.0]))
        assert [int(e) for e in m] == [1]

    def test_outer_edges_beat_middle(self):
        g = path_graph(4)
        m = gpa_matching(g, np.array([3.0, 5.0, 3.0]))
        assert [int(e) for e in m] == [0, 2]

    def test_even_cycle_perfect_matching(self):
        g = cycle_graph(4)
        m = gpa_matching(g, np.ones(4))
        assert m.size == 2
        assert_valid_matching(g, m)

    def test_infinite_ratings_handled(self):
        g = path_graph(3)
        m = gpa_matching(g, np.array([np.inf, 1.0]))
        assert 0 in list(m)
        assert_valid_matching(g, m)

    def test_deterministic(self):
        g = random_graph(9)
        r = np.random.default_rng(2).uniform(0.1, 1.0, g.m)
        assert np.array_equal(gpa_matching(g, r), gpa_matching(g, r))

    def test_valid_on_random_graphs(self):
        for seed in range(25):
            g = random_graph(seed)
            r = np.random.default_rng(seed).uniform(0.1, 1.0, g.m)
            assert_valid_matching(g, gpa_matching(g, r))

    def test_dp_matches_brute_force_on_paths_and_cycles(self):
        rng = np.random.default_rng(99)
        for trial in range(500):
            length = int(rng.integers(1, 13))
            is_cycle = length >= 4 and length % 2 == 0 and rng.random() < 0.5
            weights = rng.uniform(0.1, 10.0, size=length)
            if is_cycle:
                g = cycle_graph(length)
                edges = [(i, (i + 1) % length) for i in range(length)]
            else:
                g = path_graph(length + 1)
                edges = [(i, i + 1) for i in range(length)]
            # map canonical edge ids back onto construction order
            ratings = np.empty(g.m)
            for e in range(g.m):
                pair = (int(g.edge_u[e]), int(g.edge_v[e]))
                idx = edges.index(pair) if pair in edges else edges.index(pair[::-1])
                ratings[e] = weights[idx]
            m = gpa_matching(g, ratings)
            assert_valid_matching(g, m)
            got = float(ratings[m].sum())
            want = brute_force_max_matching_weight(
                [(int(g.edge_u[e]), int(g.edge_v[e])) for e in range(g.m)],
                list(ratings))
            assert got == pytest.approx(want)

    def test_matching_is_unit_row_interpolation(self):
        # contraction induces a fine-to-coarse map with one entry per row
        # and one or two entries per column
        for seed in range(5):
            g = random_graph(seed, n=10)
            r = np.random.default_rng(seed).uniform(0.1, 1.0, g.m)
            m = gpa_matching(g, r)
            coarse, mapping = contract_matching(g, m)
            P = np.zeros((g.n, coarse.n))
            for i, c in enumerate(mapping.fine_to_coarse):
                P[i, c] = 1.0
            assert np.all(P.sum(axis=1) == 1)
            cols = P.sum(axis=0)
            assert np.all((cols >= 1) & (cols <= 2))


class TestSchedule:
    def test_random_phase_levels(self):
        assert random_phase_levels(2) == 6
        assert random_phase_levels(8) == 4
        assert random_phase_levels(128) == 2
        assert random_phase_levels(1024) == 2

    def test_randomgpa_switches(self):
        assert matching_schedule("randomgpa", 0, 2) == ("random", None)
        assert matching_schedule("randomgpa", 5, 2) == ("random", None)
        assert matching_schedule("randomgpa", 6, 2) == ("gpa", RATING_EXPANSION2)
        assert matching_schedule("randomgpa", 1, 128) == ("random", None)
        assert matching_schedule("randomgpa", 2, 128) == ("gpa", RATING_EXPANSION2)

    def test_strong_uses_inner_outer_first(self):
        assert matching_schedule("strong", 0, 4) == ("gpa", RATING_INNER_OUTER)
        assert matching_schedule("strong", 1, 4) == ("gpa", RATING_EXPANSION2)

    def test_coupling_family_constant(self):
        for level in range(5):
            assert matching_schedule("gpa_alg", level, 4) == ("gpa", RATING_EX_ALG)
