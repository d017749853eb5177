"""Exact threshold-classifier ERM and window discrepancy on [0, 1].

The hypothesis class is the set of one-dimensional threshold rules in both
orientations (predict 1 at or above a cutoff, or strictly below it), a
symmetric class of VC dimension 2.  Risks are kept as exact rationals
(integer mistake counts over integer sample sizes) so that discrepancy
values compare against floating-point thresholds without spurious ties.

The discrepancy between the empirical distributions of the latest r and the
latest 2r labeled samples reduces to a single ERM over the 2r points with
the labels of the newer half flipped; :func:`discrepancy_binary_general`
solves the two one-sided problems instead and must agree on this symmetric
class, and :func:`brute_force_discrepancy` evaluates every candidate rule
directly as the test oracle for both.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "EmpiricalRisk",
    "LabeledPoint",
    "Orientation",
    "ThresholdHypothesis",
    "brute_force_discrepancy",
    "candidate_cutoffs",
    "discrepancy_binary",
    "discrepancy_binary_general",
    "erm_threshold",
]

_BRUTE_FORCE_MAX_R = 64


class Orientation(Enum):
    GEQ_IS_ONE = "geq_is_one"  # predicts 1 on [cutoff, 1]
    LT_IS_ONE = "lt_is_one"  # predicts 1 on [0, cutoff)


@dataclass(frozen=True)
class LabeledPoint:
    x: float
    y: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"feature must lie in [0, 1], got {self.x}")
        if self.y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.y}")


@dataclass(frozen=True)
class ThresholdHypothesis:
    cutoff: float
    orientation: Orientation

    def __post_init__(self) -> None:
        if not 0.0 <= self.cutoff <= 1.0:
            raise ValueError(f"cutoff must lie in [0, 1], got {self.cutoff}")

    def predict(self, x: float) -> int:
        above = x >= self.cutoff
        if self.orientation is Orientation.GEQ_IS_ONE:
            return int(above)
        return int(not above)

    def loss(self, point: LabeledPoint) -> int:
        """Zero-one loss; satisfies loss(x, y) + loss(x, 1-y) = 1."""
        return int(point.y != self.predict(point.x))

    def flipped(self) -> "ThresholdHypothesis":
        """The complement rule 1 - h at the same cutoff (stays in the class)."""
        other = (
            Orientation.LT_IS_ONE
            if self.orientation is Orientation.GEQ_IS_ONE
            else Orientation.GEQ_IS_ONE
        )
        return ThresholdHypothesis(self.cutoff, other)


@dataclass(frozen=True)
class EmpiricalRisk:
    hypothesis: ThresholdHypothesis
    mistakes: int
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0 <= self.mistakes <= self.count:
            raise ValueError("mistakes must lie in [0, count]")

    @property
    def risk(self) -> Fraction:
        return Fraction(self.mistakes, self.count)


def candidate_cutoffs(xs: Sequence[float]) -> list[float]:
    """Cutoffs covering every labeling a threshold can induce on ``xs``.

    The empirical risk is piecewise constant in the cutoff with breakpoints
    at the distinct feature values; 0, 1 and the midpoints between
    consecutive distinct values hit every piece.
    """
    distinct = sorted(set(xs))
    cuts = [0.0]
    cuts.extend((a + b) / 2.0 for a, b in zip(distinct, distinct[1:]))
    cuts.append(1.0)
    return cuts


def erm_threshold(points: Sequence[LabeledPoint]) -> EmpiricalRisk:
    """Exact empirical risk minimizer over both threshold orientations.

    Sorts once and sweeps every candidate cutoff.  Ties break toward the
    smallest cutoff, then GEQ_IS_ONE before LT_IS_ONE, so traces built on
    top of this sweep are deterministic.
    """
    if not points:
        raise ValueError("cannot minimize over an empty sample")
    ordered = sorted(points, key=lambda p: p.x)
    xs = [p.x for p in ordered]
    n = len(ordered)
    ones_prefix = [0] * (n + 1)
    for k, p in enumerate(ordered):
        ones_prefix[k + 1] = ones_prefix[k] + p.y
    total_ones = ones_prefix[n]

    best_mistakes = n + 1
    best_cut = 0.0
    best_orientation = Orientation.GEQ_IS_ONE
    for cut in candidate_cutoffs(xs):
        k = bisect_left(xs, cut)  # points with x >= cut form the suffix [k:]
        geq = (n - k) - (total_ones - ones_prefix[k]) + ones_prefix[k]
        for orientation, mistakes in (
            (Orientation.GEQ_IS_ONE, geq),
            (Orientation.LT_IS_ONE, n - geq),
        ):
            if mistakes < best_mistakes:
                best_mistakes = mistakes
                best_cut = cut
                best_orientation = orientation
    return EmpiricalRisk(
        ThresholdHypothesis(best_cut, best_orientation), best_mistakes, n
    )


def _check_windows(
    recent: Sequence[LabeledPoint], older: Sequence[LabeledPoint]
) -> int:
    if not recent or len(recent) != len(older):
        raise ValueError("windows must be non-empty and of equal size")
    return len(recent)


def _flip_labels(points: Sequence[LabeledPoint]) -> list[LabeledPoint]:
    return [LabeledPoint(p.x, 1 - p.y) for p in points]


def discrepancy_binary(
    recent: Sequence[LabeledPoint], older: Sequence[LabeledPoint]
) -> Fraction:
    """Distance between the latest-r and latest-2r empirical distributions.

    ``recent`` holds the newest r samples and ``older`` the r before them.
    One ERM over the 2r points with the recent labels flipped yields the
    supremum over the (symmetric) class; the value is an exact multiple of
    1/(2r) in [0, 1/2].
    """
    r = _check_windows(recent, older)
    mistakes = erm_threshold(_flip_labels(recent) + list(older)).mistakes
    return Fraction(r - mistakes, 2 * r)


def discrepancy_binary_general(
    recent: Sequence[LabeledPoint], older: Sequence[LabeledPoint]
) -> Fraction:
    """Discrepancy without the symmetry shortcut: two one-sided ERM problems.

    Each one-sided supremum equals 1 minus an ERM value (flip the labels of
    one window); the discrepancy is half the larger supremum.  On the
    symmetric threshold class this must coincide with
    :func:`discrepancy_binary`.
    """
    r = _check_windows(recent, older)
    m_first = erm_threshold(_flip_labels(recent) + list(older)).mistakes
    m_second = erm_threshold(list(recent) + _flip_labels(older)).mistakes
    return max(Fraction(r - m_first, 2 * r), Fraction(r - m_second, 2 * r))


def brute_force_discrepancy(
    recent: Sequence[LabeledPoint], older: Sequence[LabeledPoint]
) -> Fraction:
    """Ground truth by direct enumeration of every candidate rule.

    Evaluates |mean loss on recent - mean loss on older| / 2 for both
    orientations at every candidate cutoff of the combined sample.  Capped
    at r = 64; quadratic work is fine at test scale.
    """
    r = _check_windows(recent, older)
    if r > _BRUTE_FORCE_MAX_R:
        raise ValueError(f"brute force is capped at r={_BRUTE_FORCE_MAX_R}")
    xr = np.array([p.x for p in recent])
    yr = np.array([bool(p.y) for p in recent])
    xo = np.array([p.x for p in older])
    yo = np.array([bool(p.y) for p in older])
    cuts = np.array(candidate_cutoffs([p.x for p in recent] + [p.x for p in older]))

    # GEQ_IS_ONE predictions per (cutoff, point); LT_IS_ONE is the complement.
    pred_r = xr[None, :] >= cuts[:, None]
    pred_o = xo[None, :] >= cuts[:, None]
    geq_r = (pred_r != yr[None, :]).sum(axis=1)
    geq_o = (pred_o != yo[None, :]).sum(axis=1)
    lt_r = r - geq_r
    lt_o = r - geq_o
    worst = max(
        int(np.abs(geq_r - geq_o).max()),
        int(np.abs(lt_r - lt_o).max()),
    )
    return Fraction(worst, 2 * r)
