"""Window discrepancy and constrained fitting for unit-ball linear regression.

Predictors are x -> <x, w> with ||w|| <= 1 over features in the unit ball and
squared loss.  The discrepancy between the latest-r and latest-2r empirical
distributions is the supremum over the ball of |g(w)| / (2r), where

    g(w) = a + w'Aw + 2 b'w

collects the difference of the two windows' squared-loss sums through three
sufficient statistics (a scalar ``a``, a vector ``b`` and a symmetric matrix
``A``).  Both one-sided suprema are ball-constrained quadratic minimizations
(the trust-region subproblem), solved here through a dense symmetric
eigendecomposition and a safeguarded Newton iteration on the secular
equation, with explicit hard-case handling.  Dimensions are capped at 64;
the cyclic Jacobi eigensolver is O(d^3) per sweep and entirely adequate at
that scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "EigenDecomposition",
    "RegressionPoint",
    "TrustRegionSolution",
    "WindowMoments",
    "discrepancy_linear",
    "fit_linear",
    "symmetric_eig",
    "trust_region_min",
    "window_moments",
]

MAX_DIM = 64

_JACOBI_TARGET = 1e-14  # off-diagonal Frobenius mass relative to ||A||_F
_JACOBI_MAX_SWEEPS = 100
_HARD_CASE_TOL = 1e-12  # |q'b| <= tol*||b|| counts as orthogonal
_CRITICAL_TOL = 1e-12  # eigenvalue cluster width relative to spectrum scale
_SECULAR_TOL = 1e-12  # | ||w(lambda)|| - 1 | target


@dataclass(frozen=True, eq=False)
class RegressionPoint:
    """Feature vector in the unit ball with a response in [-1, 1]."""

    x: np.ndarray
    y: float

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))
        if x.ndim != 1 or x.size < 1:
            raise ValueError("feature must be a non-empty 1-d vector")
        if float(np.linalg.norm(x)) > 1.0 + 1e-12:
            raise ValueError("feature norm exceeds the unit ball")
        if not -1.0 <= self.y <= 1.0:
            raise ValueError(f"response must lie in [-1, 1], got {self.y}")


@dataclass(frozen=True, eq=False)
class WindowMoments:
    """Sufficient statistics of the recent-minus-older loss gap.

    ``A`` is exactly symmetric: the lower triangle is mirrored from the upper
    one at construction.
    """

    a: float
    b: np.ndarray
    A: np.ndarray
    r: int

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=float)
        A = np.triu(A) + np.triu(A, 1).T
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if not (
            np.isfinite(self.a) and np.isfinite(self.b).all() and np.isfinite(A).all()
        ):
            raise ValueError("window moments must be finite")


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Orthogonal ``q`` (columns are eigenvectors) and ascending ``lambdas``."""

    q: np.ndarray
    lambdas: np.ndarray


@dataclass(frozen=True, eq=False)
class TrustRegionSolution:
    """Global minimizer of w'Aw - 2 b'w over the unit ball.

    ``multiplier`` is the KKT multiplier of the norm constraint: zero for an
    interior solution, non-negative with ||w|| = 1 when ``boundary`` is set.
    """

    w: np.ndarray
    value: float
    multiplier: float
    boundary: bool


def window_moments(
    recent: Sequence[RegressionPoint], older: Sequence[RegressionPoint]
) -> WindowMoments:
    """Unnormalized moment differences between the two windows.

    a = sum_recent y^2 - sum_older y^2, b = sum_older y*x - sum_recent y*x,
    A = sum_recent x x' - sum_older x x'.
    """
    if not recent or len(recent) != len(older):
        raise ValueError("windows must be non-empty and of equal size")
    d = recent[0].x.size
    if any(p.x.size != d for p in recent) or any(p.x.size != d for p in older):
        raise ValueError("inconsistent feature dimensions")
    if d > MAX_DIM:
        raise ValueError(f"dimension capped at {MAX_DIM}, got {d}")
    # per-window sums first, one subtraction at the end: identical windows
    # cancel exactly and swapping the windows negates (a, b, A) bit-for-bit
    def sums(points: Sequence[RegressionPoint]) -> tuple[float, np.ndarray, np.ndarray]:
        sq = math.fsum(p.y**2 for p in points)
        lin = np.zeros(d)
        quad = np.zeros((d, d))
        for p in points:
            lin += p.y * p.x
            quad += np.outer(p.x, p.x)
        return sq, lin, quad

    sq_r, lin_r, quad_r = sums(recent)
    sq_o, lin_o, quad_o = sums(older)
    return WindowMoments(
        a=sq_r - sq_o, b=lin_o - lin_r, A=quad_r - quad_o, r=len(recent)
    )


def _require_symmetric(matrix: np.ndarray) -> np.ndarray:
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("matrix must be square and non-empty")
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension capped at {MAX_DIM}, got {A.shape[0]}")
    scale = float(np.abs(A).max()) if A.size else 0.0
    if float(np.abs(A - A.T).max()) > 1e-12 * (1.0 + scale):
        raise ValueError("matrix is not symmetric")
    return np.triu(A) + np.triu(A, 1).T


def symmetric_eig(matrix: np.ndarray) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Sweeps Givens rotations until the off-diagonal Frobenius mass falls below
    1e-14 times the Frobenius norm of the input.  Eigenvalues are returned
    ascending with matching eigenvector columns.
    """
    A = _require_symmetric(matrix)
    d = A.shape[0]
    a = A.copy()
    q = np.eye(d)
    target = _JACOBI_TARGET * float(np.linalg.norm(A))

    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2)))
        if off <= target:
            break
        for p in range(d - 1):
            for s in range(p + 1, d):
                apq = a[p, s]
                if apq == 0.0:
                    continue
                theta = (a[s, s] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.hypot(theta, 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                # a <- J' a J and q <- q J with the Givens plane (p, s)
                col_p, col_s = a[:, p].copy(), a[:, s].copy()
                a[:, p] = c * col_p - sn * col_s
                a[:, s] = sn * col_p + c * col_s
                row_p, row_s = a[p, :].copy(), a[s, :].copy()
                a[p, :] = c * row_p - sn * row_s
                a[s, :] = sn * row_p + c * row_s
                a[p, s] = a[s, p] = 0.0  # zero analytically by construction
                qp, qs = q[:, p].copy(), q[:, s].copy()
                q[:, p] = c * qp - sn * qs
                q[:, s] = sn * qp + c * qs
    else:
        raise ArithmeticError("Jacobi iteration failed to converge")

    lambdas = np.diag(a).copy()
    order = np.argsort(lambdas, kind="stable")
    return EigenDecomposition(q=q[:, order], lambdas=lambdas[order])


def _orient_lexmax(v: np.ndarray) -> np.ndarray:
    """Pick the lexicographically larger of v and -v (deterministic sign)."""
    peak = float(np.abs(v).max())
    for entry in v:
        if abs(entry) > 1e-12 * peak:
            return -v if entry < 0.0 else v
    return v


def _quadratic_value(A: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return float(w @ A @ w - 2.0 * b @ w)


def _solve_secular(
    lambdas: np.ndarray,
    beta: np.ndarray,
    lam_lo: float,
    q: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
) -> TrustRegionSolution:
    """Find lambda > lam_lo with ||w(lambda)|| = 1, w(lambda) = (A+lambda I)^+ b.

    Newton iteration on 1/||w(lambda)|| - 1 (nearly linear in lambda),
    safeguarded by the bracket [lam_lo, hi].  The caller guarantees
    ||w(lam_lo+)|| > 1.  If the bracket collapses before the tolerance is met
    (nearly hard case), the shortfall is padded along the bottom eigenvector.
    """

    def norm_at(lam: float) -> float:
        return float(np.sqrt(np.sum((beta / (lambdas + lam)) ** 2)))

    bnorm = float(np.linalg.norm(beta))
    lo = lam_lo
    hi = max(lam_lo, -float(lambdas[0]) + bnorm) + 1.0  # norm_at(hi) < 1 always
    lam = 0.5 * (lo + hi)
    for _ in range(200):
        nrm = norm_at(lam)
        if abs(nrm - 1.0) <= _SECULAR_TOL:
            break
        if nrm > 1.0:
            lo = lam
        else:
            hi = lam
        if hi - lo <= 1e-16 * max(1.0, abs(lam)):
            break
        denom = lambdas + lam
        dphi = -2.0 * float(np.sum(beta**2 / denom**3))
        phi = nrm * nrm
        dfdl = -0.5 * phi**-1.5 * dphi
        step = -(1.0 / nrm - 1.0) / dfdl if dfdl > 0.0 else 0.0
        nxt = lam + step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        lam = nxt
    u = beta / (lambdas + lam)
    if abs(norm_at(lam) - 1.0) > _SECULAR_TOL:
        # Nearly hard: the root hugs the pole closer than the float
        # resolution of lambda allows.  Take the feasible bracket side and
        # absorb the norm shortfall in the bottom eigen-coordinate; the
        # stationarity residual this leaves is at bracket-collapse scale.
        lam = hi
        u = beta / (lambdas + lam)
        rest = float(np.sum(u[1:] ** 2))
        if rest < 1.0:
            u[0] = math.copysign(
                math.sqrt(1.0 - rest), u[0] if u[0] != 0.0 else 1.0
            )
        else:
            u /= math.sqrt(rest + u[0] ** 2)
    w = q @ u
    return TrustRegionSolution(
        w=w, value=_quadratic_value(A, b, w), multiplier=lam, boundary=True
    )


def trust_region_min(matrix: np.ndarray, linear: np.ndarray) -> TrustRegionSolution:
    """Global minimum of w'Aw - 2 b'w over the unit ball.

    Diagonalizes A, then either returns the unconstrained stationary point
    (positive semidefinite A with the pseudo-solution inside the ball) or
    solves the secular equation for the boundary multiplier.  When b is
    orthogonal to the bottom eigenspace and the pseudo-solution is interior
    (the hard case), the minimizer adds a bottom-eigenvector component
    scaled to reach the unit sphere.
    """
    eig = symmetric_eig(matrix)
    lambdas, q = eig.lambdas, eig.q
    A = _require_symmetric(matrix)
    b = np.asarray(linear, dtype=float)
    if b.shape != (A.shape[0],):
        raise ValueError("linear term has the wrong dimension")
    beta = q.T @ b
    bnorm = float(np.linalg.norm(b))
    scale = max(1.0, float(np.abs(lambdas).max()))
    crit_cut = _CRITICAL_TOL * scale
    lam_min = float(lambdas[0])

    if lam_min > crit_cut:
        u = beta / lambdas
        if float(np.linalg.norm(u)) <= 1.0:
            w = q @ u
            return TrustRegionSolution(
                w=w, value=_quadratic_value(A, b, w), multiplier=0.0, boundary=False
            )
        return _solve_secular(lambdas, beta, 0.0, q, A, b)

    # Singular or indefinite: the multiplier lives at or above -lam_min.
    lam_lo = max(0.0, -lam_min)
    critical = (lambdas + lam_lo) <= crit_cut
    if bool(np.any(np.abs(beta[critical]) > _HARD_CASE_TOL * bnorm)):
        return _solve_secular(lambdas, beta, lam_lo, q, A, b)

    # b is (numerically) orthogonal to the critical eigenspace.
    beta_eff = np.where(critical, 0.0, beta)
    denom = np.where(critical, 1.0, lambdas + lam_lo)
    u_bar = beta_eff / denom
    norm2 = float(np.sum(u_bar**2))
    if norm2 > 1.0:
        return _solve_secular(lambdas, beta_eff, lam_lo, q, A, b)
    if lam_min < -crit_cut:
        # Hard case: pad along the bottom eigenvector to reach the sphere.
        w = q @ u_bar + math.sqrt(max(0.0, 1.0 - norm2)) * _orient_lexmax(q[:, 0])
        return TrustRegionSolution(
            w=w, value=_quadratic_value(A, b, w), multiplier=lam_lo, boundary=True
        )
    # Positive semidefinite with a null space: least-norm interior point.
    w = q @ u_bar
    return TrustRegionSolution(
        w=w, value=_quadratic_value(A, b, w), multiplier=0.0, boundary=False
    )


def discrepancy_linear(
    recent: Sequence[RegressionPoint], older: Sequence[RegressionPoint]
) -> float:
    """Empirical distance between the latest-r and latest-2r distributions.

    Equals sup over the unit ball of |g(w)| / (2r) with
    g(w) = a + w'Aw + 2 b'w; each one-sided supremum is a trust-region
    minimization of the negated quadratic.
    """
    m = window_moments(recent, older)
    sup_pos = m.a - trust_region_min(-m.A, m.b).value
    sup_neg = -m.a - trust_region_min(m.A, -m.b).value
    return max(0.0, sup_pos, sup_neg) / (2.0 * m.r)


def fit_linear(window: Sequence[RegressionPoint]) -> tuple[np.ndarray, float]:
    """Least-squares fit over the unit ball on the given window.

    Returns the weight vector and its empirical risk
    sum (y - <x, w>)^2 >= 0.
    """
    if not window:
        raise ValueError("cannot fit an empty window")
    d = window[0].x.size
    if any(p.x.size != d for p in window):
        raise ValueError("inconsistent feature dimensions")
    A = np.zeros((d, d))
    b = np.zeros(d)
    const = math.fsum(p.y**2 for p in window)
    for p in window:
        A += np.outer(p.x, p.x)
        b += p.y * p.x
    sol = trust_region_min(A, b)
    return sol.w, max(0.0, sol.value + const)
