"""Tests for threshold ERM and the exact binary discrepancy."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftwin.binary import (
    LabeledPoint,
    Orientation,
    ThresholdHypothesis,
    brute_force_discrepancy,
    candidate_cutoffs,
    discrepancy_binary,
    discrepancy_binary_general,
    erm_threshold,
)

# mix continuous coordinates with a coarse lattice so duplicates appear
coords = st.one_of(
    st.floats(0.0, 1.0, allow_nan=False),
    st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]),
)
points = st.builds(LabeledPoint, x=coords, y=st.integers(0, 1))


def window_pairs(max_r=12):
    return st.integers(1, max_r).flatmap(
        lambda r: st.tuples(
            st.lists(points, min_size=r, max_size=r),
            st.lists(points, min_size=r, max_size=r),
        )
    )


class TestLoss:
    @given(points, st.floats(0.0, 1.0), st.sampled_from(list(Orientation)))
    def test_label_flip_identity(self, p, cutoff, orientation):
        h = ThresholdHypothesis(cutoff, orientation)
        assert h.loss(p) + h.loss(LabeledPoint(p.x, 1 - p.y)) == 1

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_flipped_is_complement(self, cutoff, x):
        h = ThresholdHypothesis(cutoff, Orientation.GEQ_IS_ONE)
        assert h.predict(x) + h.flipped().predict(x) == 1


class TestErm:
    def test_all_positive_labels(self):
        risk = erm_threshold([LabeledPoint(0.1, 1), LabeledPoint(0.9, 1)])
        assert risk.mistakes == 0
        assert risk.hypothesis == ThresholdHypothesis(0.0, Orientation.GEQ_IS_ONE)

    def test_separable_upward(self):
        risk = erm_threshold([LabeledPoint(0.2, 0), LabeledPoint(0.8, 1)])
        assert risk.mistakes == 0
        assert risk.hypothesis.orientation is Orientation.GEQ_IS_ONE
        assert 0.2 < risk.hypothesis.cutoff <= 0.8

    def test_separable_downward(self):
        risk = erm_threshold(
            [LabeledPoint(0.2, 1), LabeledPoint(0.5, 1), LabeledPoint(0.8, 0)]
        )
        assert risk.mistakes == 0
        assert risk.hypothesis.orientation is Orientation.LT_IS_ONE
        assert 0.5 < risk.hypothesis.cutoff <= 0.8

    def test_risk_is_exact_rational(self):
        risk = erm_threshold(
            [LabeledPoint(0.5, 0), LabeledPoint(0.5, 1), LabeledPoint(0.5, 1)]
        )
        assert risk.risk == Fraction(1, 3)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            erm_threshold([])

    @given(st.lists(points, min_size=1, max_size=24))
    @settings(max_examples=300)
    def test_optimal_against_exhaustive_candidates(self, sample):
        best = erm_threshold(sample)
        for cut in candidate_cutoffs([p.x for p in sample]):
            for orientation in Orientation:
                h = ThresholdHypothesis(cut, orientation)
                assert best.mistakes <= sum(h.loss(p) for p in sample)


class TestDiscrepancy:
    def test_identical_windows(self):
        w = [LabeledPoint(0.3, 1), LabeledPoint(0.7, 0)]
        assert discrepancy_binary(w, list(w)) == 0

    def test_single_point_flip(self):
        assert discrepancy_binary(
            [LabeledPoint(0.5, 1)], [LabeledPoint(0.5, 0)]
        ) == Fraction(1, 2)

    def test_one_of_two_labels_flipped(self):
        recent = [LabeledPoint(0.25, 1), LabeledPoint(0.75, 1)]
        older = [LabeledPoint(0.25, 1), LabeledPoint(0.75, 0)]
        assert discrepancy_binary(recent, older) == Fraction(1, 4)

    def test_general_route_single_flip(self):
        assert discrepancy_binary_general(
            [LabeledPoint(0.5, 1)], [LabeledPoint(0.5, 0)]
        ) == Fraction(1, 2)

    def test_brute_force_single_flip(self):
        assert brute_force_discrepancy(
            [LabeledPoint(0.5, 1)], [LabeledPoint(0.5, 0)]
        ) == Fraction(1, 2)

    def test_window_size_mismatch(self):
        with pytest.raises(ValueError):
            discrepancy_binary([LabeledPoint(0.5, 1)], [])

    def test_brute_force_cap(self):
        big = [LabeledPoint(0.5, 1)] * 65
        with pytest.raises(ValueError):
            brute_force_discrepancy(big, big)

    @given(window_pairs())
    @settings(max_examples=300)
    def test_three_routes_agree_exactly(self, pair):
        recent, older = pair
        value = discrepancy_binary(recent, older)
        assert value == discrepancy_binary_general(recent, older)
        assert value == brute_force_discrepancy(recent, older)

    @given(window_pairs())
    @settings(max_examples=200)
    def test_range_and_granularity(self, pair):
        recent, older = pair
        r = len(recent)
        value = discrepancy_binary(recent, older)
        assert 0 <= value <= Fraction(1, 2)
        assert (value * 2 * r).denominator == 1  # multiple of 1/(2r)

    @given(window_pairs())
    @settings(max_examples=200)
    def test_argument_symmetry(self, pair):
        recent, older = pair
        assert discrepancy_binary(recent, older) == discrepancy_binary(older, recent)
