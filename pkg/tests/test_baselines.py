import math

import numpy as np
import pytest

from granred.baselines import (
    AttributeScores,
    fisher_scores,
    gce_labeled_only,
    knn_graph,
    laplacian_scores,
    select_top_k,
)
from granred.errors import ParameterError, StateError
from granred.reduction import reduce
from granred.tabular import DecisionTable

from oracles import brute_laplacian, random_table


class TestFisher:
    def test_constant_attribute(self):
        t = DecisionTable(("a",), [[2], [2], [2], [2]], [1, 1, 0, 0])
        assert fisher_scores(t).scores.tolist() == [0.0]

    def test_perfect_separator(self):
        t = DecisionTable(("a",), [[1], [1], [0], [0]], [1, 1, 0, 0])
        assert math.isinf(fisher_scores(t).scores[0])

    def test_hand_computed(self):
        # mu+ = 0, mu- = 1.5, mu = 0.75: S_B = 2.25, S_W = 0.5
        t = DecisionTable(("a",), [[0], [0], [1], [2]], [1, 1, 0, 0])
        s = fisher_scores(t)
        assert s.higher_better
        assert s.scores[0] == pytest.approx(4.5)

    def test_one_class(self):
        t = DecisionTable(("a",), [[0], [1]], [1, 1])
        with pytest.raises(StateError):
            fisher_scores(t)

    def test_ignores_unlabeled_rows(self):
        rng = np.random.default_rng(4)
        base = DecisionTable(("a", "b"), rng.integers(0, 3, (10, 2)), [1, 0] * 5)
        extra = DecisionTable(
            ("a", "b"), np.vstack([base.codes, rng.integers(0, 3, (6, 2))]),
            np.concatenate([base.decision, [-1] * 6]),
        )
        assert np.allclose(fisher_scores(base).scores, fisher_scores(extra).scores)


class TestLaplacian:
    def test_constant_flagged_worst(self):
        t = DecisionTable(("k", "a"), [[1, 0], [1, 1], [1, 2], [1, 0]], [1, 0, 1, 0])
        s = laplacian_scores(t, neighbors=1)
        assert not s.higher_better
        assert math.isinf(s.scores[0]) and math.isfinite(s.scores[1])

    def test_matches_brute_force(self):
        t = DecisionTable(("a", "b", "c"), [[0, 1, 2], [0, 0, 2], [1, 1, 0], [2, 1, 1]],
                          [1, 0, 1, 0])
        assert laplacian_scores(t, neighbors=1).scores.tolist() == \
            pytest.approx(brute_laplacian(t.codes, 1))

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            t = random_table(rng)
            if t.n_rows < 3:
                continue
            k = int(rng.integers(1, t.n_rows))
            got = laplacian_scores(t, neighbors=k).scores
            assert got.tolist() == pytest.approx(brute_laplacian(t.codes, k))

    def test_complete_graph(self):
        t = DecisionTable(("a", "b"), [[0, 2], [1, 3], [2, 4], [0, 2]], [1, 0, 1, 0])
        s = laplacian_scores(t, neighbors=3).scores
        # b = a + 2 is a distance-preserving copy of a
        assert s[0] == pytest.approx(s[1])

    def test_label_invariant(self):
        rng = np.random.default_rng(0)
        codes = rng.integers(0, 3, (12, 3))
        a = laplacian_scores(DecisionTable(("x", "y", "z"), codes, [1] * 6 + [0] * 6))
        b = laplacian_scores(DecisionTable(("x", "y", "z"), codes, [-1] * 12))
        assert np.array_equal(a.scores, b.scores)

    def test_too_few_rows(self):
        t = DecisionTable(("a",), [[0], [1]], [1, 0])
        with pytest.raises(ParameterError):
            laplacian_scores(t, neighbors=5)

    def test_graph_symmetric(self):
        codes = np.random.default_rng(3).integers(0, 3, (15, 4))
        g = knn_graph(codes, 2)
        assert np.array_equal(g, g.T) and not g.diagonal().any()


class TestSelectTopK:
    def test_all(self):
        s = AttributeScores(np.array([3.0, 1.0, 2.0]), True)
        assert select_top_k(s, 3) == (0, 1, 2)

    def test_best(self):
        assert select_top_k(AttributeScores(np.array([3.0, 5.0, 2.0]), True), 1) == (1,)
        assert select_top_k(AttributeScores(np.array([3.0, 5.0, 2.0]), False), 1) == (2,)

    def test_ties_lowest_index(self):
        assert select_top_k(AttributeScores(np.array([1.0, 2.0, 2.0, 2.0]), True), 2) == (1, 2)

    def test_infinite_flags(self):
        assert select_top_k(AttributeScores(np.array([1.0, np.inf]), True), 1) == (1,)
        assert select_top_k(AttributeScores(np.array([np.inf, 4.0]), False), 1) == (1,)

    def test_range(self):
        with pytest.raises(ParameterError):
            select_top_k(AttributeScores(np.array([1.0]), True), 2)


class TestGceLabeledOnly:
    def test_fully_labeled_equals_gt(self):
        t = random_table(np.random.default_rng(5))
        assert gce_labeled_only(t).selected == reduce(t).selected

    def test_single_labeled_row(self):
        t = DecisionTable(("a", "b"), [[0, 1], [1, 0], [1, 1]], [-1, 1, -1])
        assert gce_labeled_only(t).selected == (0,)

    def test_no_labeled_rows(self):
        t = DecisionTable(("a",), [[0]], [-1])
        with pytest.raises(StateError):
            gce_labeled_only(t)
