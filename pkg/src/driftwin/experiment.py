"""Batch experiment runner: scenarios + selector -> deterministic CSV reports.

A trial samples a fresh stream (per-trial seed mixed from the master seed and
the trial id), runs the window selector with the scenario's empirical
discrepancy oracle, fits on the selected window, and scores the true excess
risk of the fit against the scenario's analytic risk oracle, alongside fixed
baseline windows and the bound-profile diagnostics.  The CSV output is a pure
function of the config: same config, byte-identical file.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import AlgoConfig, SelectionTrace, select_window
from .scenarios import (
    BoundProfile,
    Scenario,
    bound_profile,
    make_scenario,
    parse_scenario_fields,
)

__all__ = [
    "ExperimentConfig",
    "TrialRow",
    "build_experiment_config",
    "derive_seed",
    "format_profile",
    "format_trace",
    "parse_config_text",
    "run_experiment",
    "run_trial",
    "trace_command",
    "write_report",
]

SCHEMA_VERSION = 1

_M64 = (1 << 64) - 1
_RUNNER_KEYS = {
    "c1",
    "c2",
    "delta",
    "alpha",
    "trials",
    "baselines",
    "output",
    "emit_trace",
}


def derive_seed(master: int, trial_id: int) -> int:
    """64-bit mix of (master seed, trial id); trials get independent streams."""
    z = (master + 0x9E3779B97F4A7C15 * (trial_id + 1)) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    algo: AlgoConfig
    trials: int
    baselines: tuple[int, ...]
    output_path: str
    emit_trace: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for w in self.baselines:
            if not 1 <= w <= self.scenario.T:
                raise ValueError(f"baseline window {w} must lie in [1, T]")


@dataclass(frozen=True)
class TrialRow:
    trial_id: int
    selected_r: int
    stop_reason: str
    excess_risk_adaptive: float
    excess_risk_baselines: tuple[float, ...]
    oracle_r_star: int
    u_at_selected: float
    b_star: float
    ratio: float

    def __post_init__(self) -> None:
        if self.stop_reason == "error":
            return
        if self.excess_risk_adaptive < -1e-12 or any(
            e < -1e-12 for e in self.excess_risk_baselines
        ):
            raise ValueError("excess risks must be non-negative up to rounding")
        if self.ratio < 0.0:
            raise ValueError("bound ratio must be non-negative")


def _run_trial(
    config: ExperimentConfig, trial_id: int, profile: BoundProfile
) -> tuple[TrialRow, SelectionTrace]:
    scenario = config.scenario
    stream = scenario.sample(derive_seed(scenario.seed, trial_id))
    trace = select_window(
        scenario.T, lambda r: scenario.empirical_discrepancy(stream, r), config.algo
    )
    best = scenario.best_risk()

    def excess(window: int) -> float:
        hypothesis = scenario.fit(stream[-window:])
        return scenario.true_risk(hypothesis) - best

    row_sel = profile.row_for(trace.selected_r)
    u_value = row_sel.inflated
    ratio = u_value / profile.b_star if profile.b_star > 0.0 else math.inf
    row = TrialRow(
        trial_id=trial_id,
        selected_r=trace.selected_r,
        stop_reason=trace.stop_reason.value,
        excess_risk_adaptive=excess(trace.selected_r),
        excess_risk_baselines=tuple(excess(w) for w in config.baselines),
        oracle_r_star=profile.r_star,
        u_at_selected=u_value,
        b_star=profile.b_star,
        ratio=ratio,
    )
    return row, trace


def run_trial(
    config: ExperimentConfig, trial_id: int, profile: BoundProfile | None = None
) -> TrialRow:
    """Run one trial; identical (config, trial_id) produce identical rows."""
    if profile is None:
        profile = bound_profile(config.scenario, config.algo)
    return _run_trial(config, trial_id, profile)[0]


def _failure_row(
    trial_id: int, profile: BoundProfile, n_baselines: int
) -> TrialRow:
    nan = math.nan
    return TrialRow(
        trial_id=trial_id,
        selected_r=0,
        stop_reason="error",
        excess_risk_adaptive=nan,
        excess_risk_baselines=(nan,) * n_baselines,
        oracle_r_star=profile.r_star,
        u_at_selected=nan,
        b_star=profile.b_star,
        ratio=nan,
    )


def run_experiment(config: ExperimentConfig, quiet: bool = False) -> list[TrialRow]:
    """Run all trials and write the CSV report; returns the rows in id order."""
    profile = bound_profile(config.scenario, config.algo)
    rows: list[TrialRow] = []
    for trial_id in range(config.trials):
        try:
            row, trace = _run_trial(config, trial_id, profile)
            if config.emit_trace and not quiet:
                print(f"trial {trial_id}")
                print(format_trace(trace))
        except Exception:
            row = _failure_row(trial_id, profile, len(config.baselines))
        rows.append(row)
    write_report(rows, config.baselines, config.output_path)
    return rows


# ---------------------------------------------------------------------------
# CSV report

def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _columns(baselines: Sequence[int]) -> list[str]:
    cols = ["trial_id", "selected_r", "stop_reason", "excess_risk_adaptive"]
    cols.extend(f"excess_risk_b{w}" for w in baselines)
    cols.extend(["oracle_r_star", "u_at_selected", "b_star", "ratio"])
    return cols


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def write_report(
    rows: Sequence[TrialRow], baselines: Sequence[int], path: str
) -> None:
    """Write the versioned CSV: header comment, one row per trial, summary row.

    UTF-8, LF line endings, reals at 12 significant digits.  On an I/O error
    any partial file is removed before the error propagates.
    """
    lines = [f"# v{SCHEMA_VERSION} {','.join(_columns(baselines))}"]
    for row in rows:
        cells = [str(row.trial_id), str(row.selected_r), row.stop_reason]
        cells.append(_fmt(row.excess_risk_adaptive))
        cells.extend(_fmt(e) for e in row.excess_risk_baselines)
        cells.extend(
            [
                str(row.oracle_r_star),
                _fmt(row.u_at_selected),
                _fmt(row.b_star),
                _fmt(row.ratio),
            ]
        )
        lines.append(",".join(cells))

    ok = [row for row in rows if row.stop_reason != "error"]
    histogram: dict[int, int] = {}
    for row in ok:
        histogram[row.selected_r] = histogram.get(row.selected_r, 0) + 1
    hist_field = '"' + ";".join(f"{r}:{n}" for r, n in sorted(histogram.items())) + '"'
    summary = ["summary", _fmt(_mean([r.selected_r for r in ok])), hist_field]
    summary.append(_fmt(_mean([r.excess_risk_adaptive for r in ok])))
    for j in range(len(baselines)):
        summary.append(_fmt(_mean([r.excess_risk_baselines[j] for r in ok])))
    summary.append(str(rows[0].oracle_r_star) if rows else "")
    summary.append(_fmt(_mean([r.u_at_selected for r in ok])))
    summary.append(_fmt(rows[0].b_star) if rows else "nan")
    summary.append(_fmt(_mean([r.ratio for r in ok])))
    lines.append(",".join(summary))

    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError:
        if os.path.exists(path):
            os.remove(path)
        raise


# ---------------------------------------------------------------------------
# human-readable trace

def format_trace(trace: SelectionTrace) -> str:
    lines = [f"{'step':>5} {'r':>7} {'discrepancy':>15} {'threshold':>15}  result"]
    for step in trace.steps:
        lines.append(
            f"{step.window.i:>5} {step.window.r:>7} "
            f"{_fmt(step.discrepancy):>15} {_fmt(step.threshold):>15}  "
            f"{'pass' if step.passed else 'fail'}"
        )
    lines.append(f"stop: {trace.stop_reason.value}  selected_r={trace.selected_r}")
    return "\n".join(lines)


def format_profile(profile: BoundProfile) -> str:
    header = "bound profile"
    if profile.approximate:
        header += (
            f" (approximate oracle: {profile.mc_samples} Monte-Carlo samples,"
            f" tolerance {_fmt(profile.mc_tolerance)})"
        )
    lines = [header]
    lines.append(
        f"{'r':>7} {'S(r)':>15} {'max_drift':>15} {'drift_error':>15} {'U(r)':>15}"
    )
    for row in profile.rows:
        lines.append(
            f"{row.r:>7} {_fmt(row.stat):>15} {_fmt(row.max_drift):>15} "
            f"{_fmt(row.drift_error):>15} {_fmt(row.inflated):>15}"
        )
    lines.append(f"B* = {_fmt(profile.b_star)}  r* = {profile.r_star}")
    return "\n".join(lines)


def trace_command(config: ExperimentConfig, trial_id: int) -> str:
    """Selection trace plus the scenario's bound table, as printable text."""
    profile = bound_profile(config.scenario, config.algo)
    row, trace = _run_trial(config, trial_id, profile)
    scenario = config.scenario
    lines = [
        f"trial {trial_id}  scenario={scenario.kind.value} "
        f"T={scenario.T} seed={scenario.seed}"
    ]
    lines.append(format_trace(trace))
    lines.append("")
    lines.append(format_profile(profile))
    lines.append(f"U(selected)/B* = {_fmt(row.ratio)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# flat key-value config files

def parse_config_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and '#' comments are skipped."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        if key in fields:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        fields[key] = value
    return fields


def _parse_bool(value: str, key: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ValueError(f"config key {key!r} must be 'true' or 'false', got {value!r}")


def build_experiment_config(
    fields: Mapping[str, str],
    seed_override: int | None = None,
    output_override: str | None = None,
) -> ExperimentConfig:
    """Interpret parsed config fields; unknown keys are hard errors.

    Scenario fields carry the `scenario.` prefix.  The statistical constant
    c1 defaults to the scenario's class default (sqrt of the VC dimension for
    the binary classes, 1 for regression) when not given.
    """
    scenario_part: dict[str, str] = {}
    runner: dict[str, str] = {}
    for key, value in fields.items():
        if key.startswith("scenario."):
            scenario_part[key[len("scenario.") :]] = value
        elif key in _RUNNER_KEYS:
            runner[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if seed_override is not None:
        scenario_part["seed"] = str(seed_override)
    scenario = make_scenario(parse_scenario_fields(scenario_part))

    delta = float(runner.get("delta", "0.1"))
    default_algo = scenario.default_algo_config(delta)
    algo = AlgoConfig(
        c1=float(runner["c1"]) if "c1" in runner else default_algo.c1,
        c2=float(runner.get("c2", "1.0")),
        delta=delta,
        alpha=float(runner.get("alpha", "1.0")),
    )
    baselines: tuple[int, ...] = ()
    if runner.get("baselines"):
        baselines = tuple(int(v.strip()) for v in runner["baselines"].split(","))
    return ExperimentConfig(
        scenario=scenario,
        algo=algo,
        trials=int(runner.get("trials", "1")),
        baselines=baselines,
        output_path=output_override or runner.get("output", "report.csv"),
        emit_trace=_parse_bool(runner.get("emit_trace", "false"), "emit_trace"),
    )
