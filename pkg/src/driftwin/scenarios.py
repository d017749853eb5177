"""Drifting-distribution generators with analytic drift and risk oracles.

Every scenario bundles three things: a reproducible sampler for the stream
Z_1..Z_T (counter-based RNG keyed by (seed, t), so points can be regenerated
independently and in parallel), exact closed-form oracles for the true drift
``||P_T - P_{T-t}||`` and the true risk of any hypothesis of the scenario's
class, and the empirical discrepancy routine the window selector plugs in as
its oracle.  The regression scenario is the one exception: its drift oracle
rests on one Monte-Carlo scalar and is flagged approximate, with the sample
count and resulting tolerance recorded.

Binary scenarios share a step-function representation of the conditional
label probability P(y=1 | x) under a uniform marginal on [0, 1]; drift and
window discrepancies reduce to exact cumulative sums over the merged
breakpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .binary import LabeledPoint, Orientation, ThresholdHypothesis, discrepancy_binary, erm_threshold
from .core import AlgoConfig, stat_bound
from .linear import RegressionPoint, discrepancy_linear, fit_linear

__all__ = [
    "AssouadParams",
    "AssouadScenario",
    "AlternatingScenario",
    "BoundProfile",
    "BoundRow",
    "IIDScenario",
    "MovingBoundaryScenario",
    "RegressionRotationScenario",
    "Scenario",
    "ScenarioKind",
    "ScenarioSpec",
    "bound_profile",
    "compute_r_tilde",
    "gen_alternating_intervals",
    "gen_assouad",
    "gen_iid",
    "gen_moving_boundary",
    "gen_regression_rotation",
    "make_scenario",
    "parse_scenario_fields",
    "scenario_fields",
]

_M64 = (1 << 64) - 1
_MC_STREAM = 0  # per-point streams use t = 1..T, so 0 is free for the oracle
_ASSOUAD_SCALE = 1.0 / (16.0 * math.sqrt(6.0))
_INFLATION = 21.0  # multiplier on the statistical term inside U(r)


def _uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """n uniforms in [0, 1) from a counter-based generator keyed by (seed, stream)."""
    key = np.array([seed & _M64, stream & _M64], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(n)
    return (raw >> np.uint64(11)) * (2.0**-53)


class ScenarioKind(Enum):
    IID = "iid"
    MOVING_BOUNDARY = "moving_boundary"
    ALTERNATING_INTERVALS = "alternating_intervals"
    ASSOUAD_FAMILY = "assouad_family"
    REGRESSION_ROTATION = "regression_rotation"


@dataclass(frozen=True)
class ScenarioSpec:
    """Serialized form of a scenario: kind, horizon, seed, per-kind params."""

    kind: ScenarioKind
    T: int
    seed: int
    params: tuple[tuple[str, str], ...]

    def param(self, name: str) -> str:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)


# ---------------------------------------------------------------------------
# step-function helpers (conditional label probabilities on [0, 1])

def _step_eval(edges: np.ndarray, vals: np.ndarray, x: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(vals) - 1)
    return vals[idx]

def _step_discrepancy(
    fa: tuple[np.ndarray, np.ndarray], fb: tuple[np.ndarray, np.ndarray]
) -> float:
    """Threshold-loss-class distance between two conditionals.

    For uniform-marginal label distributions the supremum over both
    threshold orientations of the loss-mean gap equals
    max_c |2 F(c) - F(1)| with F(c) the integral of the conditional gap up
    to c; F is piecewise linear, so the extremes sit on the merged edges.
    """
    edges = np.unique(np.concatenate([fa[0], fb[0]]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    gap = _step_eval(*fa, mids) - _step_eval(*fb, mids)
    cum = np.concatenate([[0.0], np.cumsum(gap * np.diff(edges))])
    return float(np.abs(2.0 * cum - cum[-1]).max())

def _threshold_risk(
    edges: np.ndarray, vals: np.ndarray, hypothesis: ThresholdHypothesis
) -> float:
    """Exact risk of a threshold rule under the step conditional."""
    widths = np.diff(edges)
    total_p = float(np.sum(vals * widths))
    margin = 1.0 - 2.0 * vals  # integrand picked up wherever the rule says 1
    cum = np.concatenate([[0.0], np.cumsum(margin * widths)])
    c = hypothesis.cutoff
    j = int(np.clip(np.searchsorted(edges, c, side="right") - 1, 0, len(vals) - 1))
    head = float(cum[j] + margin[j] * (c - edges[j]))
    if hypothesis.orientation is Orientation.GEQ_IS_ONE:
        return total_p + (float(cum[-1]) - head)
    return total_p + head

def _best_threshold_risk(edges: np.ndarray, vals: np.ndarray) -> float:
    """Minimum over cutoffs and orientations (risk is piecewise linear in c)."""
    return min(
        _threshold_risk(edges, vals, ThresholdHypothesis(float(c), orientation))
        for c in edges
        for orientation in (Orientation.GEQ_IS_ONE, Orientation.LT_IS_ONE)
    )


# ---------------------------------------------------------------------------
# scenario hierarchy

class Scenario:
    """Shared surface of all scenarios; concrete kinds are dataclasses."""

    kind: ScenarioKind
    oracle_approximate = False

    # populated by the dataclasses
    T: int
    seed: int

    def sample(self, seed: int | None = None) -> list:
        """Materialize the stream Z_1..Z_T; bit-identical for identical seeds."""
        s = self.seed if seed is None else seed
        return [self._draw(s, t) for t in range(1, self.T + 1)]

    def _draw(self, seed: int, t: int):
        raise NotImplementedError

    def drift(self, t: int) -> float:
        """Exact ||P_T - P_{T-t}|| for 0 <= t < T (zero at t = 0)."""
        raise NotImplementedError

    def max_drift(self, r: int) -> float:
        """max_{t < r} drift(t)."""
        if not 1 <= r <= self.T:
            raise ValueError(f"window must lie in [1, T], got {r}")
        return max(self.drift(t) for t in range(r))

    def window_discrepancy(self, r1: int, r2: int) -> float:
        """Exact distance between the averaged window-r1 and window-r2 laws."""
        raise NotImplementedError

    def true_risk(self, hypothesis) -> float:
        raise NotImplementedError

    def best_risk(self) -> float:
        raise NotImplementedError

    def fit(self, window: Sequence):
        raise NotImplementedError

    def empirical_discrepancy(self, stream: Sequence, r: int) -> float:
        raise NotImplementedError

    def default_algo_config(self, delta: float = 0.1) -> AlgoConfig:
        raise NotImplementedError


class _ThresholdScenario(Scenario):
    """Binary scenarios over [0, 1] with the threshold hypothesis class."""

    def conditional(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Step-function P(y=1 | x) at absolute time t in 1..T."""
        raise NotImplementedError

    def window_conditional(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        """Step-function conditional of the averaged last-r distributions."""
        raise NotImplementedError

    def prob_one(self, t: int, x: float) -> float:
        raise NotImplementedError

    def _draw(self, seed: int, t: int) -> LabeledPoint:
        u = _uniforms(seed, t, 2)
        x = float(u[0])
        return LabeledPoint(x, int(u[1] < self.prob_one(t, x)))

    def pair_discrepancy(self, t1: int, t2: int) -> float:
        """Exact ||P_{t1} - P_{t2}|| for absolute times in 1..T."""
        return _step_discrepancy(self.conditional(t1), self.conditional(t2))

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        if t == 0:
            return 0.0
        return self.pair_discrepancy(self.T, self.T - t)

    def window_discrepancy(self, r1: int, r2: int) -> float:
        return _step_discrepancy(
            self.window_conditional(r1), self.window_conditional(r2)
        )

    def true_risk(self, hypothesis: ThresholdHypothesis) -> float:
        return _threshold_risk(*self.conditional(self.T), hypothesis)

    def best_risk(self) -> float:
        return _best_threshold_risk(*self.conditional(self.T))

    def fit(self, window: Sequence[LabeledPoint]) -> ThresholdHypothesis:
        return erm_threshold(list(window)).hypothesis

    def empirical_discrepancy(self, stream: Sequence[LabeledPoint], r: int) -> float:
        return float(discrepancy_binary(stream[-r:], stream[-2 * r : -r]))

    def default_algo_config(self, delta: float = 0.1) -> AlgoConfig:
        return AlgoConfig.for_binary(2, delta=delta)  # thresholds have VC dim 2


def _validated_time(T: int, seed: int) -> None:
    if T < 1:
        raise ValueError(f"stream length must be >= 1, got {T}")
    if seed < 0:
        raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass(frozen=True)
class IIDScenario(_ThresholdScenario):
    """Stationary stream: uniform x, label 1{x >= c} flipped w.p. eta."""

    c: float
    eta: float
    T: int
    seed: int

    kind = ScenarioKind.IID

    def __post_init__(self) -> None:
        _validated_time(self.T, self.seed)
        if not 0.0 <= self.c <= 1.0:
            raise ValueError("boundary must lie in [0, 1]")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError("label noise must lie in [0, 0.5)")

    def prob_one(self, t: int, x: float) -> float:
        return 1.0 - self.eta if x >= self.c else self.eta

    def conditional(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        edges = np.unique(np.array([0.0, self.c, 1.0]))
        if len(edges) == 2:
            vals = np.array([1.0 - self.eta if self.c == 0.0 else self.eta])
        else:
            vals = np.array([self.eta, 1.0 - self.eta])
        return edges, vals

    def window_conditional(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        return self.conditional(self.T)

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        return 0.0


def _fold(z: float) -> float:
    """Reflect a non-negative coordinate into [0, 1] (triangle wave)."""
    m = math.fmod(z, 2.0)
    return m if m <= 1.0 else 2.0 - m


@dataclass(frozen=True)
class MovingBoundaryScenario(_ThresholdScenario):
    """Boundary walks by ``step`` per time step, reflecting off 0 and 1.

    Counting back from the final boundary c0 at time T, the boundary at time
    T - t sits at fold(c0 + t*step); the drift against time T is exactly
    (1 - 2*eta) times the distance between the two boundaries.
    """

    c0: float
    step: float
    eta: float
    T: int
    seed: int

    kind = ScenarioKind.MOVING_BOUNDARY

    def __post_init__(self) -> None:
        _validated_time(self.T, self.seed)
        if not 0.0 <= self.c0 <= 1.0:
            raise ValueError("boundary must lie in [0, 1]")
        if self.step < 0.0:
            raise ValueError("step must be non-negative")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError("label noise must lie in [0, 0.5)")

    def boundary_at(self, t: int) -> float:
        return _fold(self.c0 + self.step * (self.T - t))

    def prob_one(self, t: int, x: float) -> float:
        return 1.0 - self.eta if x >= self.boundary_at(t) else self.eta

    def conditional(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        c = self.boundary_at(t)
        edges = np.unique(np.array([0.0, c, 1.0]))
        if len(edges) == 2:
            vals = np.array([1.0 - self.eta if c == 0.0 else self.eta])
        else:
            vals = np.array([self.eta, 1.0 - self.eta])
        return edges, vals

    def window_conditional(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        cs = np.array([self.boundary_at(self.T - k) for k in range(r)])
        edges = np.unique(np.concatenate([[0.0, 1.0], cs]))
        mids = 0.5 * (edges[:-1] + edges[1:])
        above = (mids[None, :] >= cs[:, None]).mean(axis=0)
        vals = self.eta + (1.0 - 2.0 * self.eta) * above
        return edges, vals

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        gap = abs(self.boundary_at(self.T - t) - self.c0)
        return (1.0 - 2.0 * self.eta) * gap


@dataclass(frozen=True)
class AlternatingScenario(_ThresholdScenario):
    """Deterministic labels that flip on two disjoint intervals by parity.

    I0 = [p0, p0 + delta/2) carries label 0 at time T and I1 = [p1, p1 +
    delta/2) label 1 (background 0).  Going back t steps flips I0 when t is
    odd and I1 when t is even, so consecutive distributions are a full
    ``delta`` apart while the drift against time T never exceeds delta/2.
    """

    delta: float
    p0: float
    p1: float
    T: int
    seed: int

    kind = ScenarioKind.ALTERNATING_INTERVALS

    def __post_init__(self) -> None:
        _validated_time(self.T, self.seed)
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        half = self.delta / 2.0
        for lo in (self.p0, self.p1):
            if lo < 0.0 or lo + half > 1.0:
                raise ValueError("flip intervals must lie inside [0, 1]")
        lo, hi = sorted([self.p0, self.p1])
        if lo + half > hi:
            raise ValueError("flip intervals must be disjoint")

    def _region(self, x: float) -> int:
        """0 background, 1 inside I0, 2 inside I1."""
        half = self.delta / 2.0
        if self.p0 <= x < self.p0 + half:
            return 1
        if self.p1 <= x < self.p1 + half:
            return 2
        return 0

    def prob_one(self, t: int, x: float) -> float:
        region = self._region(x)
        base = 1.0 if region == 2 else 0.0
        back = self.T - t
        if back == 0:
            return base
        if back % 2 == 1:
            return 1.0 - base if region == 1 else base
        return 1.0 - base if region == 2 else base

    @cached_property
    def _edges(self) -> np.ndarray:
        half = self.delta / 2.0
        return np.unique(
            np.array([0.0, self.p0, self.p0 + half, self.p1, self.p1 + half, 1.0])
        )

    def conditional(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        edges = self._edges
        mids = 0.5 * (edges[:-1] + edges[1:])
        vals = np.array([self.prob_one(t, float(x)) for x in mids])
        return edges, vals

    def window_conditional(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        edges = self._edges
        mids = 0.5 * (edges[:-1] + edges[1:])
        # lag k in 0..r-1 flips I0 when k is odd and I1 when k is even >= 2
        ones_i0 = (r // 2) / r
        flips_i1 = (r + 1) // 2 - 1
        ones_i1 = (r - flips_i1) / r
        vals = np.empty(len(mids))
        for j, x in enumerate(mids):
            region = self._region(float(x))
            vals[j] = ones_i0 if region == 1 else ones_i1 if region == 2 else 0.0
        return edges, vals

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        # exactly one interval of measure delta/2 differs at every lag t >= 1
        return 0.0 if t == 0 else self.delta / 2.0


def compute_r_tilde(delta_seq: Sequence[float], nu: int) -> int:
    """Largest r with Delta_r < sqrt(nu / r); exists whenever Delta_1 < sqrt(nu)."""
    seq = [float(d) for d in delta_seq]
    if not seq:
        raise ValueError("drift sequence must be non-empty")
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    if any(b < a for a, b in zip(seq, seq[1:])):
        raise ValueError("drift sequence must be non-decreasing")
    best = 0
    for r, d in enumerate(seq, start=1):
        if d < math.sqrt(nu / r):
            best = r
    if best == 0:
        raise ValueError("no window satisfies Delta_r < sqrt(nu/r)")
    return best


@dataclass(frozen=True)
class AssouadParams:
    """Sign pattern and drift budget of the shatter-point label family."""

    nu: int
    delta_seq: tuple[float, ...]
    tau: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta_seq", tuple(float(d) for d in self.delta_seq))
        object.__setattr__(self, "tau", tuple(int(s) for s in self.tau))
        if self.nu < 1:
            raise ValueError("nu must be a positive integer")
        if len(self.tau) != self.nu or any(s not in (-1, 1) for s in self.tau):
            raise ValueError("tau must be a +-1 vector of length nu")
        if self.delta_seq and self.delta_seq[0] != 0.0:
            raise ValueError("the drift sequence must start at 0")
        compute_r_tilde(self.delta_seq, self.nu)  # validates the sequence shape

    @cached_property
    def r_tilde(self) -> int:
        return compute_r_tilde(self.delta_seq, self.nu)

    def phi(self, r: int) -> float:
        return math.sqrt(self.nu / r) + self.delta_seq[r - 1]

    @cached_property
    def phi_star(self) -> float:
        return min(self.phi(r) for r in range(1, len(self.delta_seq) + 1))

    @cached_property
    def shatter_points(self) -> tuple[float, ...]:
        return tuple((2 * i + 1) / (2 * self.nu) for i in range(self.nu))


@dataclass(frozen=True)
class AssouadScenario(Scenario):
    """Uniform marginal over nu shatter points with sign-pattern label biases.

    The hypothesis class is every labeling of the shatter points (which is
    what shattering buys), so the class-level distance between two times is
    exactly the gap between their per-point biases, and both the empirical
    discrepancy and the ERM decompose per point.
    """

    params: AssouadParams
    T: int
    seed: int

    kind = ScenarioKind.ASSOUAD_FAMILY

    def __post_init__(self) -> None:
        _validated_time(self.T, self.seed)
        if len(self.params.delta_seq) != self.T:
            raise ValueError("drift sequence length must equal the stream length")
        if not self.params.phi_star < 1.0 / 3.0:
            raise ValueError("requires phi_star < 1/3")
        worst = max(abs(self.bias(t)) for t in range(1, self.T + 1))
        if worst > 0.25:
            raise ValueError("label probabilities would leave [1/4, 3/4]")

    def bias(self, t: int) -> float:
        """Signed magnitude added to 1/2 at time t (before the tau_i sign)."""
        p = self.params
        r_tilde = p.r_tilde
        if t <= self.T - r_tilde:
            return 0.0
        return _ASSOUAD_SCALE * (
            math.sqrt(p.nu / r_tilde)
            + p.delta_seq[r_tilde - 1]
            - p.delta_seq[self.T - t]
        )

    def prob_one(self, t: int, atom: int) -> float:
        return 0.5 + self.params.tau[atom] * self.bias(t)

    def _atom_index(self, x: float) -> int:
        return int(round((x * 2.0 * self.params.nu - 1.0) / 2.0))

    def _draw(self, seed: int, t: int) -> LabeledPoint:
        u = _uniforms(seed, t, 2)
        atom = min(int(u[0] * self.params.nu), self.params.nu - 1)
        y = int(u[1] < self.prob_one(t, atom))
        return LabeledPoint(self.params.shatter_points[atom], y)

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        return abs(self.bias(self.T) - self.bias(self.T - t))

    def _window_bias(self, r: int) -> float:
        return math.fsum(self.bias(self.T - k) for k in range(r)) / r

    def window_discrepancy(self, r1: int, r2: int) -> float:
        return abs(self._window_bias(r1) - self._window_bias(r2))

    def true_risk(self, labels: Sequence[int]) -> float:
        probs = [self.prob_one(self.T, i) for i in range(self.params.nu)]
        return math.fsum(
            p if label == 0 else 1.0 - p for p, label in zip(probs, labels)
        ) / self.params.nu

    def best_risk(self) -> float:
        probs = [self.prob_one(self.T, i) for i in range(self.params.nu)]
        return math.fsum(min(p, 1.0 - p) for p in probs) / self.params.nu

    def fit(self, window: Sequence[LabeledPoint]) -> tuple[int, ...]:
        nu = self.params.nu
        ones = [0] * nu
        counts = [0] * nu
        for p in window:
            i = self._atom_index(p.x)
            counts[i] += 1
            ones[i] += p.y
        return tuple(int(2 * ones[i] > counts[i]) for i in range(nu))

    def empirical_discrepancy(self, stream: Sequence[LabeledPoint], r: int) -> float:
        # per-point ERM on the flipped-recent + older sample
        nu = self.params.nu
        ones = [0] * nu
        counts = [0] * nu
        for p in stream[-r:]:
            i = self._atom_index(p.x)
            counts[i] += 1
            ones[i] += 1 - p.y
        for p in stream[-2 * r : -r]:
            i = self._atom_index(p.x)
            counts[i] += 1
            ones[i] += p.y
        mistakes = sum(min(o, c - o) for o, c in zip(ones, counts))
        return (r - mistakes) / (2.0 * r)

    def default_algo_config(self, delta: float = 0.1) -> AlgoConfig:
        return AlgoConfig.for_binary(self.params.nu, delta=delta)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class RegressionRotationScenario(Scenario):
    """Unit-circle features with a target direction rotating per step.

    y = <x, w_t> plus centered noise truncated so that y stays in [-1, 1];
    w_t is w0 rotated by theta*(T - t), landing at w0 at time T.  Because the
    feature law is rotation invariant, every class-level distance reduces to
    the single scalar mu = E[y <x, w_T>], which is estimated once by Monte
    Carlo (sample count and tolerance are recorded and the oracle is flagged
    approximate).
    """

    w0: np.ndarray
    theta: float
    sigma: float
    T: int
    seed: int
    mc_samples: int = 1_000_000

    kind = ScenarioKind.REGRESSION_ROTATION
    oracle_approximate = True

    def __post_init__(self) -> None:
        _validated_time(self.T, self.seed)
        w0 = np.asarray(self.w0, dtype=float)
        if w0.shape != (2,):
            raise ValueError("w0 must be a 2-vector")
        nrm = float(np.linalg.norm(w0))
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError("w0 must have unit norm")
        object.__setattr__(self, "w0", w0 / nrm)
        if self.theta < 0.0:
            raise ValueError("rotation angle must be non-negative")
        if self.sigma < 0.0:
            raise ValueError("noise scale must be non-negative")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")

    def weight_at(self, t: int) -> np.ndarray:
        return _rotation(self.theta * (self.T - t)) @ self.w0

    def _noise(self, mean: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.sigma == 0.0:
            return np.zeros_like(mean)
        from scipy.stats import truncnorm

        lo = (-1.0 - mean) / self.sigma
        hi = (1.0 - mean) / self.sigma
        return truncnorm.ppf(u, lo, hi, scale=self.sigma)

    def _draw(self, seed: int, t: int) -> RegressionPoint:
        u = _uniforms(seed, t, 2)
        angle = 2.0 * math.pi * u[0]
        x = np.array([math.cos(angle), math.sin(angle)])
        mean = float(x @ self.weight_at(t))
        eps = float(self._noise(np.array([mean]), np.array([u[1]]))[0])
        y = min(1.0, max(-1.0, mean + eps))
        return RegressionPoint(x, y)

    @cached_property
    def _mc(self) -> tuple[float, float, float]:
        """(mu, E[y^2], three-sigma tolerance of mu) by fixed-seed Monte Carlo."""
        n = self.mc_samples
        u = _uniforms(self.seed, _MC_STREAM, 2 * n).reshape(n, 2)
        m = np.cos(2.0 * math.pi * u[:, 0])  # <x, w_T> for uniform circle x
        y = np.clip(m + self._noise(m, u[:, 1]), -1.0, 1.0)
        prod = y * m
        mu = float(prod.mean())
        ey2 = float((y * y).mean())
        tol = 3.0 * float(prod.std()) / math.sqrt(n)
        return mu, ey2, tol

    @property
    def mc_tolerance(self) -> float:
        return self._mc[2]

    def drift(self, t: int) -> float:
        if not 0 <= t < self.T:
            raise ValueError(f"drift lag must lie in [0, T), got {t}")
        mu = self._mc[0]
        return 4.0 * abs(mu) * abs(math.sin(self.theta * t / 2.0))

    def _window_direction(self, r: int) -> np.ndarray:
        total = np.zeros(2)
        for k in range(r):
            total += _rotation(self.theta * k) @ self.w0
        return total / r

    def window_discrepancy(self, r1: int, r2: int) -> float:
        mu = self._mc[0]
        gap = self._window_direction(r1) - self._window_direction(r2)
        return 2.0 * abs(mu) * float(np.linalg.norm(gap))

    def pair_discrepancy(self, t1: int, t2: int) -> float:
        mu = self._mc[0]
        gap = self.weight_at(t1) - self.weight_at(t2)
        return 2.0 * abs(mu) * float(np.linalg.norm(gap))

    def true_risk(self, w: np.ndarray) -> float:
        mu, ey2, _ = self._mc
        w = np.asarray(w, dtype=float)
        return ey2 - 2.0 * mu * float(w @ self.w0) + 0.5 * float(w @ w)

    def best_risk(self) -> float:
        mu, ey2, _ = self._mc
        if 2.0 * abs(mu) <= 1.0:
            return ey2 - 2.0 * mu * mu
        return ey2 - 2.0 * abs(mu) + 0.5

    def fit(self, window: Sequence[RegressionPoint]) -> np.ndarray:
        return fit_linear(list(window))[0]

    def empirical_discrepancy(self, stream: Sequence[RegressionPoint], r: int) -> float:
        return discrepancy_linear(stream[-r:], stream[-2 * r : -r])

    def default_algo_config(self, delta: float = 0.1) -> AlgoConfig:
        return AlgoConfig.for_regression(delta=delta)


# ---------------------------------------------------------------------------
# generators (the public construction surface)

def gen_iid(c: float, eta: float, T: int, seed: int) -> IIDScenario:
    """Stationary baseline: every P_t identical, drift oracle reports zero."""
    return IIDScenario(c=c, eta=eta, T=T, seed=seed)


def gen_moving_boundary(
    c0: float, step: float, T: int, eta: float, seed: int
) -> MovingBoundaryScenario:
    """Boundary drifting by ``step`` per time step toward its final position c0."""
    return MovingBoundaryScenario(c0=c0, step=step, eta=eta, T=T, seed=seed)


def gen_alternating_intervals(
    delta: float, p0: float, p1: float, T: int, seed: int
) -> AlternatingScenario:
    """Two disjoint flip intervals alternating by parity of the lag."""
    return AlternatingScenario(delta=delta, p0=p0, p1=p1, T=T, seed=seed)


def gen_assouad(params: AssouadParams, T: int, seed: int) -> AssouadScenario:
    return AssouadScenario(params=params, T=T, seed=seed)


def gen_regression_rotation(
    w0: Sequence[float],
    theta: float,
    sigma: float,
    T: int,
    seed: int,
    mc_samples: int = 1_000_000,
) -> RegressionRotationScenario:
    return RegressionRotationScenario(
        w0=np.asarray(w0, dtype=float),
        theta=theta,
        sigma=sigma,
        T=T,
        seed=seed,
        mc_samples=mc_samples,
    )


# ---------------------------------------------------------------------------
# bound profile

@dataclass(frozen=True)
class BoundRow:
    """Per-window values of the error-bound ingredients."""

    r: int
    stat: float  # S(r, delta)
    max_drift: float  # max_{t < r} ||P_T - P_{T-t}||
    drift_error: float  # ||P_T - P_T^r||
    inflated: float  # U(r) = 21*S(r, delta) + drift_error


@dataclass(frozen=True)
class BoundProfile:
    """Bound table over the doubling lattice plus T, with its minimizer.

    ``b_star`` minimizes 21*S(r) + max_drift(r) over the tabulated windows
    (the doubling lattice plus T, a sqrt(2)-dense restriction of all r).
    """

    rows: tuple[BoundRow, ...]
    b_star: float
    r_star: int
    approximate: bool
    mc_samples: int | None = None
    mc_tolerance: float | None = None

    def row_for(self, r: int) -> BoundRow:
        for row in self.rows:
            if row.r == r:
                return row
        raise KeyError(f"window {r} is not on the profile lattice")


def bound_profile(
    scenario: Scenario, config: AlgoConfig, inflation: float = _INFLATION
) -> BoundProfile:
    """Tabulate S(r), max drift, drift error and U(r) over the window lattice."""
    T = scenario.T
    lattice = []
    r = 1
    while r <= T:
        lattice.append(r)
        r *= 2
    if lattice[-1] != T:
        lattice.append(T)

    drifts = [scenario.drift(t) for t in range(T)]
    prefix_max: list[float] = []
    worst = 0.0
    for d in drifts:
        worst = max(worst, d)
        prefix_max.append(worst)

    rows = []
    b_star = math.inf
    r_star = lattice[0]
    for r in lattice:
        stat = stat_bound(r, config)
        max_drift = prefix_max[r - 1]
        drift_error = scenario.window_discrepancy(1, r) if r > 1 else 0.0
        rows.append(
            BoundRow(
                r=r,
                stat=stat,
                max_drift=max_drift,
                drift_error=drift_error,
                inflated=inflation * stat + drift_error,
            )
        )
        objective = inflation * stat + max_drift
        if objective < b_star:
            b_star = objective
            r_star = r
    return BoundProfile(
        rows=tuple(rows),
        b_star=b_star,
        r_star=r_star,
        approximate=scenario.oracle_approximate,
        mc_samples=getattr(scenario, "mc_samples", None),
        mc_tolerance=getattr(scenario, "mc_tolerance", None),
    )


# ---------------------------------------------------------------------------
# flat-text serialization (embedded in experiment configs)

def scenario_fields(scenario: Scenario) -> dict[str, str]:
    """Flat key-value form: kind, T, seed plus the kind-specific params."""
    fields = {
        "kind": scenario.kind.value,
        "T": str(scenario.T),
        "seed": str(scenario.seed),
    }
    if isinstance(scenario, IIDScenario):
        fields.update(c=repr(scenario.c), eta=repr(scenario.eta))
    elif isinstance(scenario, MovingBoundaryScenario):
        fields.update(
            c0=repr(scenario.c0), step=repr(scenario.step), eta=repr(scenario.eta)
        )
    elif isinstance(scenario, AlternatingScenario):
        fields.update(
            delta=repr(scenario.delta), p0=repr(scenario.p0), p1=repr(scenario.p1)
        )
    elif isinstance(scenario, AssouadScenario):
        fields.update(
            nu=str(scenario.params.nu),
            delta_seq=",".join(repr(d) for d in scenario.params.delta_seq),
            tau=",".join(str(s) for s in scenario.params.tau),
        )
    elif isinstance(scenario, RegressionRotationScenario):
        fields.update(
            w0=",".join(repr(v) for v in scenario.w0),
            theta=repr(scenario.theta),
            sigma=repr(scenario.sigma),
            mc_samples=str(scenario.mc_samples),
        )
    else:
        raise TypeError(f"unknown scenario type {type(scenario)!r}")
    return fields


def parse_scenario_fields(fields: Mapping[str, str]) -> ScenarioSpec:
    """Validate and freeze a flat key-value block into a ScenarioSpec."""
    required = {"kind", "T", "seed"}
    missing = required - set(fields)
    if missing:
        raise ValueError(f"missing scenario fields: {sorted(missing)}")
    try:
        kind = ScenarioKind(fields["kind"])
    except ValueError:
        raise ValueError(f"unknown scenario kind {fields['kind']!r}") from None
    allowed = {
        ScenarioKind.IID: {"c", "eta"},
        ScenarioKind.MOVING_BOUNDARY: {"c0", "step", "eta"},
        ScenarioKind.ALTERNATING_INTERVALS: {"delta", "p0", "p1"},
        ScenarioKind.ASSOUAD_FAMILY: {"nu", "delta_seq", "tau"},
        ScenarioKind.REGRESSION_ROTATION: {"w0", "theta", "sigma", "mc_samples"},
    }[kind]
    params = []
    for key, value in fields.items():
        if key in required:
            continue
        if key not in allowed:
            raise ValueError(f"unknown scenario field {key!r} for kind {kind.value}")
        params.append((key, value))
    return ScenarioSpec(
        kind=kind,
        T=int(fields["T"]),
        seed=int(fields["seed"]),
        params=tuple(sorted(params)),
    )


def make_scenario(spec: ScenarioSpec) -> Scenario:
    """Build the concrete scenario a spec describes."""
    get = dict(spec.params).get
    if spec.kind is ScenarioKind.IID:
        return gen_iid(float(get("c", "0.5")), float(get("eta", "0.0")), spec.T, spec.seed)
    if spec.kind is ScenarioKind.MOVING_BOUNDARY:
        return gen_moving_boundary(
            float(get("c0", "0.5")),
            float(get("step", "0.0")),
            spec.T,
            float(get("eta", "0.0")),
            spec.seed,
        )
    if spec.kind is ScenarioKind.ALTERNATING_INTERVALS:
        return gen_alternating_intervals(
            float(get("delta", "0.2")),
            float(get("p0", "0.1")),
            float(get("p1", "0.6")),
            spec.T,
            spec.seed,
        )
    if spec.kind is ScenarioKind.ASSOUAD_FAMILY:
        nu = int(get("nu", "1"))
        delta_seq = tuple(float(v) for v in get("delta_seq", "").split(",")) if get(
            "delta_seq"
        ) else tuple([0.0] * spec.T)
        tau = tuple(int(v) for v in get("tau", "").split(",")) if get("tau") else tuple(
            [1] * nu
        )
        return gen_assouad(AssouadParams(nu=nu, delta_seq=delta_seq, tau=tau), spec.T, spec.seed)
    if spec.kind is ScenarioKind.REGRESSION_ROTATION:
        w0 = tuple(float(v) for v in get("w0", "1,0").split(","))
        return gen_regression_rotation(
            w0,
            float(get("theta", "0.0")),
            float(get("sigma", "0.0")),
            spec.T,
            spec.seed,
            mc_samples=int(get("mc_samples", "1000000")),
        )
    raise ValueError(f"unknown scenario kind {spec.kind!r}")
