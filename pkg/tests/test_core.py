"""Unit and property tests for the window-selection engine."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftwin.core import (
    AlgoConfig,
    SelectionTrace,
    StopReason,
    TraceStep,
    WindowIndex,
    delta_schedule,
    proof_inequality_check,
    select_window,
    select_window_approx,
    stat_bound,
    stopping_threshold,
)

C1_ONLY = AlgoConfig(c1=1.0, c2=0.0, delta=0.1)

# constants are either exactly zero or of sane magnitude (subnormal constants
# would break strict monotonicity through rounding alone)
const = st.one_of(st.just(0.0), st.floats(1e-6, 10.0))
configs = st.builds(
    AlgoConfig,
    c1=const,
    c2=const,
    delta=st.floats(0.01, 0.99),
)


class TestStatBound:
    def test_hand_values(self):
        # c2 = 0 kills both log terms, leaving c1/sqrt(r)
        assert stat_bound(1, C1_ONLY) == 1.0
        assert stat_bound(4, C1_ONLY) == 0.5

    def test_zero_constants(self):
        cfg = AlgoConfig(c1=0.0, c2=0.0, delta=0.5)
        assert all(stat_bound(r, cfg) == 0.0 for r in (1, 2, 7, 4096))

    def test_rejects_nonpositive_window(self):
        with pytest.raises(ValueError):
            stat_bound(0, C1_ONLY)

    @given(configs, st.integers(0, 40))
    def test_strictly_decreasing_when_constants_positive(self, cfg, i):
        if cfg.c1 + cfg.c2 == 0.0:
            return
        assert stat_bound(2 ** (i + 1), cfg) < stat_bound(2**i, cfg)


class TestStoppingThreshold:
    def test_hand_values(self):
        assert stopping_threshold(1, C1_ONLY) == 4.0
        assert stopping_threshold(4, C1_ONLY) == 2.0

    def test_total_on_positive_integers(self):
        # only powers of two reach this through the selector, but the
        # function itself is total
        assert math.isfinite(stopping_threshold(9, C1_ONLY))

    @given(configs, st.integers(1, 2**40))
    def test_monotone(self, cfg, r):
        if cfg.c1 + cfg.c2 == 0.0:
            return
        assert stopping_threshold(2 * r, cfg) < stopping_threshold(r, cfg)


class TestDeltaSchedule:
    def test_hand_value(self):
        expected = 6.0 * 0.1 / (math.pi**2 * 100.0)
        assert delta_schedule(0, 0.1) == expected
        assert math.isclose(delta_schedule(0, 0.1), 6.079271018540267e-04)

    @given(st.floats(0.01, 0.99), st.integers(1, 3000))
    @settings(max_examples=40)
    def test_partial_sums_within_budget(self, delta, n):
        assert math.fsum(delta_schedule(i, delta) for i in range(n)) <= delta

    @given(st.floats(0.01, 0.99), st.integers(0, 10**6))
    def test_monotone_decreasing(self, delta, i):
        assert delta_schedule(i + 1, delta) < delta_schedule(i, delta)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            delta_schedule(0, 0.0)
        with pytest.raises(ValueError):
            delta_schedule(0, 1.0)
        with pytest.raises(ValueError):
            delta_schedule(-1, 0.1)


class TestAlgoConfig:
    def test_c_delta_is_derived(self):
        cfg = AlgoConfig(c1=2.0, c2=3.0, delta=0.2)
        expected = 2.0 + 3.0 * math.sqrt(2.0 * math.log(math.pi**2 / (6.0 * 0.2)))
        assert cfg.c_delta == expected

    def test_validation(self):
        for bad in (dict(delta=0.0), dict(delta=1.0), dict(c1=-1.0), dict(alpha=0.5)):
            kwargs = dict(c1=1.0, c2=1.0, delta=0.1, alpha=1.0)
            kwargs.update(bad)
            with pytest.raises(ValueError):
                AlgoConfig(**kwargs)

    def test_binary_default_uses_vc_dimension(self):
        cfg = AlgoConfig.for_binary(2)
        assert cfg.c1 == math.sqrt(2.0) and cfg.c2 == 1.0


class TestSelectWindow:
    def test_zero_oracle_exhausts_stream(self):
        trace = select_window(16, lambda r: 0.0, C1_ONLY)
        assert trace.selected_r == 16
        assert trace.stop_reason is StopReason.STREAM_EXHAUSTED
        assert [s.window.r for s in trace.steps] == [1, 2, 4, 8]
        assert all(s.passed for s in trace.steps)

    def test_single_sample_stream(self):
        trace = select_window(1, lambda r: 0.0, C1_ONLY)
        assert trace.selected_r == 1
        assert trace.steps == ()
        assert trace.stop_reason is StopReason.STREAM_EXHAUSTED

    def test_first_check_failure_keeps_r_one(self):
        trace = select_window(16, lambda r: 10.0 * stat_bound(r, C1_ONLY), C1_ONLY)
        assert trace.selected_r == 1
        assert len(trace.steps) == 1 and not trace.steps[0].passed
        assert trace.stop_reason is StopReason.DRIFT_DETECTED

    def test_rejects_empty_stream(self):
        with pytest.raises(ValueError):
            select_window(0, lambda r: 0.0, C1_ONLY)

    def test_oracle_only_sees_windows_that_fit(self):
        seen = []

        def oracle(r):
            seen.append(r)
            return 0.0

        select_window(100, oracle, C1_ONLY)
        assert seen == [1, 2, 4, 8, 16, 32]
        assert all(2 * r <= 100 for r in seen)

    @given(
        st.integers(1, 4096),
        st.lists(st.floats(0.0, 30.0), min_size=13, max_size=13),
        configs,
    )
    @settings(max_examples=200)
    def test_trace_invariants_on_random_tapes(self, T, tape, cfg):
        trace = select_window(T, lambda r: tape[r.bit_length() - 1], cfg)
        # doubling, guard equivalence, prefix of passes, bounded selection
        for k, step in enumerate(trace.steps):
            assert step.window.r == 2**k
            assert step.passed == (step.discrepancy <= step.threshold)
        assert all(s.passed for s in trace.steps[:-1])
        assert trace.selected_r <= T
        drift = bool(trace.steps) and not trace.steps[-1].passed
        assert drift == (trace.stop_reason is StopReason.DRIFT_DETECTED)
        # determinism
        again = select_window(T, lambda r: tape[r.bit_length() - 1], cfg)
        assert again == trace


class TestSelectWindowApprox:
    @given(
        st.integers(1, 2048),
        st.lists(st.floats(0.0, 20.0), min_size=12, max_size=12),
        configs,
    )
    @settings(max_examples=150)
    def test_alpha_one_is_bit_identical(self, T, tape, cfg):
        oracle = lambda r: tape[r.bit_length() - 1]
        assert select_window_approx(T, oracle, cfg) == select_window(T, oracle, cfg)

    def test_under_approximation_within_factor_two_passes(self):
        # exact discrepancy 6*S would fail every check; a half-size estimate
        # (factor-2 under-approximation) stays below the 4*S threshold
        cfg = AlgoConfig(c1=1.0, c2=0.0, delta=0.1, alpha=2.0)
        trace = select_window_approx(16, lambda r: 3.0 * stat_bound(r, cfg), cfg)
        assert trace.selected_r == 16
        assert trace.stop_reason is StopReason.STREAM_EXHAUSTED

    def test_weak_under_approximation_still_detects(self):
        cfg = AlgoConfig(c1=1.0, c2=0.0, delta=0.1, alpha=2.0)
        trace = select_window_approx(16, lambda r: 5.0 * stat_bound(r, cfg), cfg)
        assert trace.selected_r == 1
        assert trace.stop_reason is StopReason.DRIFT_DETECTED


class TestProofInequality:
    def test_default_constants_hold(self):
        assert proof_inequality_check(60, AlgoConfig(c1=1.0, c2=1.0, delta=0.1))

    def test_first_iteration_margin(self):
        # 22/sqrt(2) - 16 is about -0.44
        assert proof_inequality_check(0, AlgoConfig(c1=1.0, c2=0.0, delta=0.5))
        cfg = AlgoConfig(c1=1.0, c2=0.0, delta=0.5)
        assert 22.0 * stat_bound(2, cfg) - 16.0 * stat_bound(1, cfg) < 0.0

    def test_forked_constant_23_breaks(self):
        # bumping the leading multiplier to 23 flips the sign at i = 0
        cfg = AlgoConfig(c1=1.0, c2=0.0, delta=0.5)
        assert 23.0 * stat_bound(2, cfg) - 16.0 * stat_bound(1, cfg) > 0.0

    def test_requires_positive_constants(self):
        with pytest.raises(ValueError):
            proof_inequality_check(5, AlgoConfig(c1=0.0, c2=0.0, delta=0.1))


class TestTraceTypes:
    def test_window_index_invariant(self):
        WindowIndex(3, 8)
        with pytest.raises(ValueError):
            WindowIndex(3, 7)
        with pytest.raises(ValueError):
            WindowIndex(-1, 1)

    def test_trace_rejects_mid_run_failure(self):
        steps = (
            TraceStep(WindowIndex(0, 1), 9.0, 1.0, False),
            TraceStep(WindowIndex(1, 2), 0.0, 1.0, True),
        )
        with pytest.raises(ValueError):
            SelectionTrace(steps, StopReason.STREAM_EXHAUSTED, 4)

    def test_trace_rejects_wrong_selected_r(self):
        steps = (TraceStep(WindowIndex(0, 1), 0.0, 1.0, True),)
        with pytest.raises(ValueError):
            SelectionTrace(steps, StopReason.STREAM_EXHAUSTED, 4)

    def test_trace_rejects_inconsistent_stop_reason(self):
        steps = (TraceStep(WindowIndex(0, 1), 9.0, 1.0, False),)
        with pytest.raises(ValueError):
            SelectionTrace(steps, StopReason.STREAM_EXHAUSTED, 1)
