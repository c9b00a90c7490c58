"""Core types: RNG handles, samples, distributions, hypotheses, error metrics.

Oracle notes: exact error rates below are hand-computed from explicit truth
tables before being asserted; multiset oracles use collections.Counter as an
independent path.
"""

import collections

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisylab.core import (
    DiscreteDistribution,
    DomainPoint,
    FunctionHypothesis,
    LabeledExample,
    MixtureHypothesis,
    RngHandle,
    Sample,
    TableHypothesis,
    complement,
    draw_clean_sample,
    empirical_error,
    error_rate,
    labeled_index,
    labeled_pair,
)


class TestRngHandle:
    def test_same_seed_same_stream(self):
        a = RngHandle(7).generator().random(5)
        b = RngHandle(7).generator().random(5)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = RngHandle(7).generator().random(5)
        b = RngHandle(8).generator().random(5)
        assert not np.array_equal(a, b)

    def test_split_is_hierarchical(self):
        a = RngHandle(7).split(1, 2).generator().random(5)
        b = RngHandle(7).split(1).split(2).generator().random(5)
        assert np.array_equal(a, b)

    def test_split_children_independent(self):
        r = RngHandle(7)
        a = r.split(0).generator().random(5)
        b = r.split(1).generator().random(5)
        assert not np.array_equal(a, b)

    def test_split_does_not_consume_parent(self):
        r = RngHandle(7)
        r.split(0).generator().random(100)
        a = r.generator().random(5)
        assert np.array_equal(a, RngHandle(7).generator().random(5))


class TestSample:
    def test_from_pairs_round_trip(self):
        pairs = [(3, 1), (5, -1), (3, -1)]
        S = Sample.from_pairs(pairs)
        assert [tuple(ex) for ex in S] == pairs
        assert len(S) == 3

    def test_immutable(self):
        S = Sample.from_pairs([(0, 1)])
        with pytest.raises((ValueError, AttributeError)):
            S.points[0] = 5

    def test_label_validation(self):
        with pytest.raises(ValueError):
            Sample([0], [2])

    def test_take_and_replace(self):
        S = Sample.from_pairs([(0, 1), (1, -1), (2, 1)])
        assert S.take(np.array([2, 0])).multiset() == {(2, 1): 1, (0, 1): 1}
        S2 = S.replace_at(np.array([1]), np.array([9]), np.array([1], dtype=np.int8))
        assert S2[1] == LabeledExample(9, 1)
        assert S[1] == LabeledExample(1, -1)  # original untouched

    def test_multiset_matches_counter_oracle(self):
        rng = np.random.default_rng(0)
        pts = rng.integers(0, 4, size=50)
        labs = rng.choice((-1, 1), size=50)
        S = Sample(pts, labs)
        oracle = collections.Counter(zip(pts.tolist(), labs.tolist()))
        assert S.multiset() == dict(oracle)

    def test_concat(self):
        a = Sample.from_pairs([(0, 1)])
        b = Sample.from_pairs([(1, -1)])
        assert a.concat(b).multiset() == {(0, 1): 1, (1, -1): 1}

    def test_empty(self):
        assert len(Sample.empty()) == 0


class TestDiscreteDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([0.5, 0.4])  # does not sum to 1
        with pytest.raises(ValueError):
            DiscreteDistribution([-0.5, 1.5])
        with pytest.raises(ValueError):
            DiscreteDistribution([])

    def test_uniform_and_point_mass(self):
        u = DiscreteDistribution.uniform(4)
        assert np.allclose(u.weights, 0.25)
        p = DiscreteDistribution.point_mass(2, 4)
        assert p.weight(2) == 1.0 and p.weight(0) == 0.0

    def test_sampling_deterministic_and_in_range(self):
        D = DiscreteDistribution([0.5, 0.0, 0.5])
        pts = D.sample_points(1000, RngHandle(3))
        assert np.array_equal(pts, D.sample_points(1000, RngHandle(3)))
        assert set(np.unique(pts)) <= {0, 2}  # zero-weight atom never drawn

    def test_point_mass_sampling(self):
        D = DiscreteDistribution.point_mass(1, 3)
        assert np.all(D.sample_points(50, RngHandle(0)) == 1)


@given(st.integers(min_value=0, max_value=10**6), st.sampled_from((-1, 1)))
def test_labeled_index_round_trip(point, label):
    assert labeled_pair(labeled_index(point, label)) == LabeledExample(point, label)


class TestHypotheses:
    def test_table_evaluate(self):
        h = TableHypothesis([1, -1, 1])
        assert h.evaluate(1) == -1
        assert np.array_equal(h.evaluate_many(np.array([0, 2])), [1, 1])

    def test_function_hypothesis(self):
        h = FunctionHypothesis(lambda p: np.where(p % 2 == 0, 1, -1), domain_size=10)
        assert h.evaluate(4) == 1 and h.evaluate(5) == -1

    def test_error_rate_hand_oracle(self):
        # D = (0.5, 0.25, 0.25); h and c disagree only at point 2 -> 0.25.
        D = DiscreteDistribution([0.5, 0.25, 0.25])
        c = TableHypothesis([1, 1, 1])
        h = TableHypothesis([1, 1, -1])
        assert error_rate(h, c, D) == pytest.approx(0.25)

    def test_mixture_error_is_mean_of_components(self):
        D = DiscreteDistribution.uniform(4)
        c = TableHypothesis([1, 1, 1, 1])
        comps = [TableHypothesis([1, 1, 1, 1]), TableHypothesis([-1, -1, -1, -1])]
        mix = MixtureHypothesis(comps)
        assert error_rate(mix, c, D) == pytest.approx(0.5)

    def test_mixture_concept_rejected(self):
        D = DiscreteDistribution.uniform(2)
        mix = MixtureHypothesis([TableHypothesis([1, 1])])
        with pytest.raises(ValueError):
            error_rate(TableHypothesis([1, 1]), mix, D)

    def test_domain_size_check(self):
        D = DiscreteDistribution.uniform(4)
        with pytest.raises(ValueError):
            error_rate(TableHypothesis([1, 1]), TableHypothesis([1] * 4), D)

    def test_complement(self):
        D = DiscreteDistribution.uniform(3)
        c = TableHypothesis([1, -1, 1])
        assert error_rate(complement(c), c, D) == pytest.approx(1.0)

    def test_empirical_error(self):
        S = Sample.from_pairs([(0, 1), (1, 1), (2, -1), (3, -1)])
        h = TableHypothesis([1, -1, -1, -1])
        assert empirical_error(h, S) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            empirical_error(h, Sample.empty())

    def test_mixture_evaluate_many_needs_rng(self):
        mix = MixtureHypothesis([TableHypothesis([1]), TableHypothesis([-1])])
        out = mix.evaluate_many(np.zeros(100, dtype=np.int64), RngHandle(0))
        assert set(np.unique(out)) == {-1, 1}


class TestDrawCleanSample:
    def test_labels_match_concept(self):
        D = DiscreteDistribution.uniform(8)
        c = TableHypothesis(np.where(np.arange(8) < 4, 1, -1))
        S = draw_clean_sample(D, c, 200, RngHandle(5))
        assert np.array_equal(S.labels, c.evaluate_many(S.points))

    def test_zero_length(self):
        D = DiscreteDistribution.uniform(2)
        assert len(draw_clean_sample(D, TableHypothesis([1, 1]), 0, RngHandle(0))) == 0


def test_domain_point_validation():
    DomainPoint(3)
    with pytest.raises(ValueError):
        DomainPoint(-1)
