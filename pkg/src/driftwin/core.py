"""Adaptive training-window selection over a doubling schedule.

The selector walks candidate windows r = 1, 2, 4, ... counting back from the
newest sample of a stream of length T.  At each step it asks a discrepancy
oracle for the distance between the empirical distributions of the latest r
and the latest 2r samples and compares it against a statistical threshold
that shrinks like 1/sqrt(r).  The first failed comparison stops the doubling
(drift was detected); exhausting the stream selects the largest window.

The discrepancy computation is delegated to an oracle callable, so the same
selector drives both the binary-classification and the linear-regression
instantiations (see :mod:`driftwin.binary` and :mod:`driftwin.linear`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

__all__ = [
    "AlgoConfig",
    "DiscrepancyOracle",
    "SelectionTrace",
    "StopReason",
    "TraceStep",
    "WindowIndex",
    "delta_schedule",
    "proof_inequality_check",
    "select_window",
    "select_window_approx",
    "stat_bound",
    "stopping_threshold",
]

#: Empirical discrepancy oracle.  Given a window size r with 2r <= T, returns
#: the (exact or under-approximated) discrepancy between the empirical
#: distributions of the latest r and the latest 2r samples.  The oracle closes
#: over the stream; it must be deterministic for reproducible traces.
DiscrepancyOracle = Callable[[int], float]


class StopReason(Enum):
    """Why the doubling loop stopped."""

    DRIFT_DETECTED = "drift_detected"
    STREAM_EXHAUSTED = "stream_exhausted"


@dataclass(frozen=True)
class AlgoConfig:
    """Constants that govern the selection thresholds.

    ``c1`` and ``c2`` are the uniform-convergence constants of the learned
    class (``c1`` scales like the square root of the VC dimension for binary
    classes and is O(1) for norm-bounded linear regression; ``c2`` is O(1)).
    ``delta`` is the overall failure probability.  ``alpha`` >= 1 declares the
    quality guarantee of an approximate discrepancy oracle (1 means exact) and
    only documents the oracle contract; it does not change the thresholds.
    """

    c1: float
    c2: float = 1.0
    delta: float = 0.1
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError("c1 and c2 must be non-negative")
        if self.alpha < 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    @property
    def c_delta(self) -> float:
        """Confidence-adjusted constant; always recomputed, never cached."""
        return self.c1 + self.c2 * math.sqrt(
            2.0 * math.log(math.pi**2 / (6.0 * self.delta))
        )

    @classmethod
    def for_binary(cls, vc_dim: float, delta: float = 0.1) -> "AlgoConfig":
        """Default constants for a binary class of the given VC dimension."""
        return cls(c1=math.sqrt(vc_dim), c2=1.0, delta=delta)

    @classmethod
    def for_regression(cls, delta: float = 0.1) -> "AlgoConfig":
        """Default constants for unit-ball linear regression with squared loss."""
        return cls(c1=1.0, c2=1.0, delta=delta)


@dataclass(frozen=True)
class WindowIndex:
    """Iteration counter ``i`` and its window size ``r = 2**i``."""

    i: int
    r: int

    def __post_init__(self) -> None:
        if self.i < 0 or self.r != 2**self.i:
            raise ValueError(f"window size must equal 2**i, got i={self.i}, r={self.r}")

    @classmethod
    def from_iteration(cls, i: int) -> "WindowIndex":
        return cls(i=i, r=2**i)


@dataclass(frozen=True)
class TraceStep:
    """One oracle query of the doubling loop and its verdict."""

    window: WindowIndex
    discrepancy: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class SelectionTrace:
    """Auditable record of a window selection run.

    Window sizes double step by step starting at 1; every step before the
    last passed its check, and the run stopped either because the final check
    failed (drift detected, the failed window is kept) or because the next
    doubling would not fit in the stream.
    """

    steps: tuple[TraceStep, ...]
    stop_reason: StopReason
    selected_r: int

    def __post_init__(self) -> None:
        for k, step in enumerate(self.steps):
            if step.window.r != 2**k:
                raise ValueError("trace windows must double starting from r=1")
            if k < len(self.steps) - 1 and not step.passed:
                raise ValueError("only the final trace step may fail its check")
        drift = bool(self.steps) and not self.steps[-1].passed
        if drift != (self.stop_reason is StopReason.DRIFT_DETECTED):
            raise ValueError("stop_reason inconsistent with the recorded steps")
        if drift:
            expected = self.steps[-1].window.r
        elif self.steps:
            expected = 2 * self.steps[-1].window.r
        else:
            expected = 1
        if self.selected_r != expected:
            raise ValueError(
                f"selected_r={self.selected_r} inconsistent with steps "
                f"(expected {expected})"
            )


def stat_bound(r: int, config: AlgoConfig) -> float:
    """High-confidence bound on the window-``r`` estimation error.

    Strictly decreasing in ``r`` whenever ``c1 + c2 > 0``.
    """
    if r < 1:
        raise ValueError(f"window size must be >= 1, got {r}")
    log_term = math.log(math.log2(r) + 10.0)
    return config.c_delta / math.sqrt(r) + config.c2 * math.sqrt(2.0 * log_term / r)


def stopping_threshold(r: int, config: AlgoConfig) -> float:
    """Threshold the empirical discrepancy is compared against at window ``r``."""
    return 4.0 * stat_bound(r, config)


def delta_schedule(i: int, delta: float) -> float:
    """Per-iteration failure budget; sums to at most ``delta`` over all i >= 0."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if i < 0:
        raise ValueError(f"iteration index must be >= 0, got {i}")
    return 6.0 * delta / (math.pi**2 * (i + 10) ** 2)


def _run_selection(
    stream_length: int, oracle: DiscrepancyOracle, config: AlgoConfig
) -> SelectionTrace:
    if stream_length < 1:
        raise ValueError(f"stream length must be >= 1, got {stream_length}")
    steps: list[TraceStep] = []
    i, r = 0, 1
    while 2 * r <= stream_length:
        discrepancy = float(oracle(r))
        threshold = stopping_threshold(r, config)
        passed = discrepancy <= threshold
        steps.append(TraceStep(WindowIndex(i, r), discrepancy, threshold, passed))
        if not passed:
            return SelectionTrace(tuple(steps), StopReason.DRIFT_DETECTED, r)
        i += 1
        r *= 2
    return SelectionTrace(tuple(steps), StopReason.STREAM_EXHAUSTED, r)


def select_window(
    stream_length: int, oracle: DiscrepancyOracle, config: AlgoConfig
) -> SelectionTrace:
    """Select a training window competitive with the best fixed window.

    Doubles the candidate window while the empirical discrepancy between the
    latest ``r`` and latest ``2r`` samples stays within
    :func:`stopping_threshold`; on the first failed check the current ``r``
    is returned (drift detected), otherwise the largest window that fits.
    The returned trace records every oracle query.
    """
    return _run_selection(stream_length, oracle, config)


def select_window_approx(
    stream_length: int, approx_oracle: DiscrepancyOracle, config: AlgoConfig
) -> SelectionTrace:
    """Window selection driven by an under-approximating discrepancy oracle.

    The caller guarantees ``1 <= exact/approx <= config.alpha`` on every
    query.  Control flow and thresholds are identical to
    :func:`select_window`; with ``alpha=1`` and an exact oracle the output is
    bit-identical.
    """
    return _run_selection(stream_length, approx_oracle, config)


def proof_inequality_check(i_max: int, config: AlgoConfig) -> bool:
    """Numeric regression check behind the stopping rule's constants.

    Verifies ``22*stat_bound(2**(i+1)) - 16*stat_bound(2**i) <= 0`` for every
    ``i`` in ``[0, i_max]``; the relation is what makes a passed check
    certify that doubling the window does not worsen the error bound.
    """
    if config.c1 + config.c2 <= 0.0:
        raise ValueError("requires c1 + c2 > 0")
    return all(
        22.0 * stat_bound(2 ** (i + 1), config) - 16.0 * stat_bound(2**i, config)
        <= 0.0
        for i in range(i_max + 1)
    )
