import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from granred.errors import ParameterError, StateError
from granred.measures import (
    conditional_entropy,
    entropy,
    gh_attribute_given_reduct,
    granular_conditional_entropy,
    granularity,
    significance,
)
from granred.partition import Partition, decision_partition, partition_by, partition_trivial
from granred.tabular import DecisionTable

from oracles import naive_gh, naive_measures, random_table


@pytest.fixture
def two_attr():
    return DecisionTable(("a1", "a2"), [[0, 0], [0, 1], [1, 0], [1, 1]], [1, 1, 1, 0])


def blocks(lists, n):
    return Partition.from_blocks(lists, n)


class TestEntropy:
    def test_one_block(self):
        assert entropy(blocks([[0, 1, 2, 3]], 4)) == 0.0

    def test_uniform(self):
        assert entropy(blocks([[0], [1], [2], [3]], 4)) == pytest.approx(2.0, abs=1e-15)

    def test_halves(self):
        assert entropy(blocks([[0, 1], [2, 3]], 4)) == pytest.approx(1.0, abs=1e-15)

    def test_empty_universe(self):
        with pytest.raises(ParameterError):
            entropy(Partition((), 0))


class TestConditionalEntropy:
    def test_consistent(self, two_attr):
        cond = partition_by(two_attr, [0, 1])
        assert conditional_entropy(cond, decision_partition(two_attr)) == 0.0

    def test_single_block_balanced(self):
        dec = blocks([[0, 1], [2, 3]], 4)
        assert conditional_entropy(blocks([[0, 1, 2, 3]], 4), dec) == pytest.approx(1.0)

    def test_half_pure(self, two_attr):
        cond = partition_by(two_attr, [0])
        assert conditional_entropy(cond, decision_partition(two_attr)) == pytest.approx(0.5)

    def test_coverage_mismatch(self):
        with pytest.raises(StateError):
            conditional_entropy(blocks([[0, 1]], 4), blocks([[0, 1, 2, 3]], 4))


class TestGranularity:
    def test_extremes(self):
        assert granularity(blocks([[0, 1, 2, 3]], 4)) == 1.0
        assert granularity(blocks([[0], [1], [2], [3]], 4)) == 0.25

    def test_halves(self):
        assert granularity(blocks([[0, 1], [2, 3]], 4)) == 0.5

    def test_empty_universe(self):
        with pytest.raises(ParameterError):
            granularity(Partition((), 0))


class TestGranularConditionalEntropy:
    def test_consistent_is_zero(self, two_attr):
        cond = partition_by(two_attr, [0, 1])
        assert granular_conditional_entropy(cond, decision_partition(two_attr)) == 0.0

    def test_single_block_balanced(self):
        dec = blocks([[0, 1], [2, 3]], 4)
        assert granular_conditional_entropy(blocks([[0, 1, 2, 3]], 4), dec) == pytest.approx(1.0)

    def test_half_pure(self, two_attr):
        # 0.25 * 0 + 0.25 * 1
        cond = partition_by(two_attr, [0])
        assert granular_conditional_entropy(cond, decision_partition(two_attr)) == pytest.approx(0.25)

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            t = random_table(rng)
            attrs = sorted(rng.choice(t.n_attributes, rng.integers(1, t.n_attributes + 1),
                                      replace=False).tolist())
            cond, dec = partition_by(t, attrs), decision_partition(t)
            h, hc, gh = naive_measures(t.codes, t.decision, attrs)
            assert entropy(cond) == pytest.approx(h, abs=1e-12)
            assert conditional_entropy(cond, dec) == pytest.approx(hc, abs=1e-12)
            assert granular_conditional_entropy(cond, dec) == pytest.approx(gh, abs=1e-12)

    def test_fixed_denominator_for_pruned_blocks(self, two_attr):
        dec = decision_partition(two_attr)
        full = partition_by(two_attr, [0])
        live = blocks([[2, 3]], 4)
        live_dec = blocks([[2], [3]], 4)
        assert granular_conditional_entropy(live, live_dec) == \
            granular_conditional_entropy(full, dec) == 0.25


class TestSignificance:
    def test_constant_attribute(self):
        t = DecisionTable(("a", "k"), [[0, 1], [1, 1], [0, 1]], [1, 0, 0])
        assert significance(t, 1, [0], decision_partition(t)) == 0.0

    def test_two_attr(self, two_attr):
        assert significance(two_attr, 1, [0], decision_partition(two_attr)) == pytest.approx(0.25)

    def test_already_consistent(self, two_attr):
        t = two_attr.with_decision([1, 1, 0, 0])
        assert significance(t, 1, [0], decision_partition(t)) == 0.0

    def test_member_rejected(self, two_attr):
        with pytest.raises(ParameterError):
            significance(two_attr, 0, [0], decision_partition(two_attr))

    def test_empty_p(self, two_attr):
        # GH(D|{}) for (3 pos, 1 neg) minus GH(D|{a1}) = 0.25
        h = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
        sig = significance(two_attr, 0, [], decision_partition(two_attr))
        assert sig == pytest.approx(h - 0.25)


class TestGhAttributeGivenReduct:
    def test_duplicate_column(self):
        t = DecisionTable(("a", "b"), [[0, 0], [1, 1], [2, 2], [0, 0]], [1, 0, 1, 0])
        assert gh_attribute_given_reduct(t, 1, [0]) == 0.0

    def test_constant(self):
        t = DecisionTable(("a", "k"), [[0, 4], [1, 4]], [1, 0])
        assert gh_attribute_given_reduct(t, 1, [0]) == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            t = random_table(rng)
            if t.n_attributes < 2:
                continue
            a = int(rng.integers(0, t.n_attributes))
            red = [b for b in range(t.n_attributes) if b != a and rng.random() < 0.5]
            expected = naive_gh(t.codes, t.codes[:, a], red)
            assert gh_attribute_given_reduct(t, a, red) == pytest.approx(expected, abs=1e-12)


@st.composite
def tables_with_chain(draw):
    n = draw(st.integers(1, 12))
    m = draw(st.integers(1, 6))
    codes = draw(st.lists(st.lists(st.integers(0, 3), min_size=m, max_size=m),
                          min_size=n, max_size=n))
    dec = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    order = draw(st.permutations(range(m)))
    cut = draw(st.integers(0, m))
    t = DecisionTable(tuple(f"a{j}" for j in range(m)), codes, dec)
    return t, list(order[:cut]), list(order)


def _gh(t, attrs):
    p = partition_by(t, attrs) if attrs else partition_trivial(t)
    return granular_conditional_entropy(p, decision_partition(t))


@settings(max_examples=200, deadline=None)
@given(tables_with_chain())
def test_monotone_and_bounded(case):
    t, small, large = case
    g_small, g_large = _gh(t, small), _gh(t, large)
    assert g_small >= g_large - 1e-12
    assert 0.0 <= g_large and g_small <= math.log2(t.n_rows) + 1e-12


@settings(max_examples=200, deadline=None)
@given(tables_with_chain())
def test_gh_not_above_conditional_entropy(case):
    t, small, _ = case
    p = partition_by(t, small) if small else partition_trivial(t)
    dec = decision_partition(t)
    assert granular_conditional_entropy(p, dec) <= conditional_entropy(p, dec) + 1e-12


@settings(max_examples=200, deadline=None)
@given(tables_with_chain())
def test_significance_non_negative(case):
    t, small, full = case
    dec = decision_partition(t)
    for a in full:
        if a not in small:
            assert significance(t, a, small, dec) >= -1e-12
