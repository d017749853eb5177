"""Adaptive training-window selection under unknown distribution drift."""

from .binary import (
    EmpiricalRisk,
    LabeledPoint,
    Orientation,
    ThresholdHypothesis,
    brute_force_discrepancy,
    discrepancy_binary,
    discrepancy_binary_general,
    erm_threshold,
)
from .core import (
    AlgoConfig,
    DiscrepancyOracle,
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
from .experiment import (
    ExperimentConfig,
    TrialRow,
    build_experiment_config,
    derive_seed,
    parse_config_text,
    run_experiment,
    run_trial,
    trace_command,
)
from .linear import (
    EigenDecomposition,
    RegressionPoint,
    TrustRegionSolution,
    WindowMoments,
    discrepancy_linear,
    fit_linear,
    symmetric_eig,
    trust_region_min,
    window_moments,
)
from .scenarios import (
    AssouadParams,
    BoundProfile,
    ScenarioKind,
    ScenarioSpec,
    bound_profile,
    compute_r_tilde,
    gen_alternating_intervals,
    gen_assouad,
    gen_iid,
    gen_moving_boundary,
    gen_regression_rotation,
    make_scenario,
)

__version__ = "0.1.0"
