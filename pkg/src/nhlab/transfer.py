"""Position-space Lyapunov exponents from products of 2x2 transfer matrices,
with phase complexification and integer-slope (acceleration) extraction.

Products are evaluated along the irrational rotation alpha = (sqrt(5)-1)/2
(the asymptotic object; finite rings use the rational approximant only for
diagonalization). Running products are renormalized by their Frobenius norm
while the log-magnitudes are accumulated, so overflow cannot occur at any
complexification strength.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .errors import FitFailure, SingularPhase
from .model import ALPHA, EPS_TAN, Kind, ModelSpec, _reduced_theta

_CHUNK = 1 << 17


class LyapunovMethod(str, Enum):
    TRANSFER_PRODUCT = "transfer_product"
    MOMENTUM_PRODUCT = "momentum_product"
    THOULESS = "thouless"
    CLOSED_FORM = "closed_form"


@dataclass
class LyapunovEstimate:
    """A Lyapunov exponent (nats per site) plus provenance and convergence
    metadata: the method that produced it, the product length or sample count
    n_steps, the imaginary phase shift vartheta (0 when not complexified) and
    a fluctuation estimate across phase samples."""

    gamma: float
    method: LyapunovMethod
    n_steps: int
    vartheta: float = 0.0
    stderr: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.vartheta < 0:
            raise ValueError("vartheta must be >= 0")


def _onsite_complexified(kind: Kind, V: float, n, theta: float, vartheta: float):
    """Model potential at complexified phase theta - i*vartheta, site(s) n,
    using the irrational alpha."""
    if kind is Kind.EXP:
        # V exp(i(-2 pi alpha n + theta - i vartheta))
        return V * math.exp(vartheta) * np.exp(1j * (-2.0 * math.pi * ALPHA * n + theta))
    if kind is Kind.TAN:
        return 1j * V * np.tan(2.0 * math.pi * ALPHA * n + theta - 1j * vartheta)
    raise ValueError("transfer matrices exist for the exp and tan models only")


def _pole_distance(n, theta: float) -> np.ndarray:
    x = 2.0 * math.pi * ALPHA * np.asarray(n, dtype=float) + theta
    y = np.mod(x - 0.5 * math.pi, math.pi)
    return np.minimum(y, math.pi - y)


def transfer_matrix(spec: ModelSpec, E: complex, n: int, vartheta: float = 0.0) -> np.ndarray:
    """2x2 transfer matrix [[E - V_n(theta - i*vartheta), -1], [1, 0]]."""
    if spec.kind not in (Kind.EXP, Kind.TAN):
        raise ValueError("transfer matrices exist for the exp and tan models only")
    theta = _reduced_theta(spec.theta)
    if spec.kind is Kind.TAN and vartheta == 0.0:
        d = float(_pole_distance([n], theta)[0])
        if d < EPS_TAN:
            raise SingularPhase([n], d)
    v = complex(_onsite_complexified(spec.kind, spec.V, np.asarray([n]), theta, vartheta)[0])
    return np.array([[complex(E) - v, -1.0], [1.0, 0.0]], dtype=complex)


def _guarded_theta(kind: Kind, theta: float, n_steps: int) -> float:
    """Shift a tangent-model phase sample until its orbit stays clear of the
    pole exclusion window (gamma does not depend on theta)."""
    if kind is not Kind.TAN:
        return theta
    for _ in range(64):
        worst = math.inf
        for lo in range(1, n_steps + 1, _CHUNK):
            n = np.arange(lo, min(lo + _CHUNK, n_steps + 1))
            worst = min(worst, float(_pole_distance(n, theta).min()))
            if worst < EPS_TAN:
                break
        if worst >= EPS_TAN:
            return theta
        theta += 10.0 * EPS_TAN
    raise SingularPhase([], worst)


def _product_log(kind: Kind, V: float, E: complex, n_steps: int, theta: float,
                 vartheta: float) -> float:
    """ln ||T_N ... T_1||_F accumulated through renormalized pairwise products."""
    E = complex(E)
    P = np.eye(2, dtype=complex) / math.sqrt(2.0)
    total = 0.0
    for lo in range(1, n_steps + 1, _CHUNK):
        n = np.arange(lo, min(lo + _CHUNK, n_steps + 1))
        a = E - _onsite_complexified(kind, V, n, theta, vartheta)
        T = np.zeros((len(n), 2, 2), dtype=complex)
        T[:, 0, 0] = a
        T[:, 0, 1] = -1.0
        T[:, 1, 0] = 1.0
        while len(T) > 1:
            m = len(T) // 2
            B = np.einsum("nij,njk->nik", T[1:2 * m:2], T[0:2 * m:2])
            if len(T) % 2:
                B = np.concatenate([B, T[-1:]])
            s = np.sqrt((np.abs(B) ** 2).sum(axis=(1, 2)))
            B /= s[:, None, None]
            total += float(np.log(s).sum())
            T = B
        P = T[0] @ P
        s0 = math.sqrt(float((np.abs(P) ** 2).sum()))
        total += math.log(s0)
        P /= s0
    return total


def lyapunov_position(spec: ModelSpec, E: complex, n_steps: int,
                      vartheta: float = 0.0, n_theta: int = 8) -> LyapunovEstimate:
    """Lyapunov exponent (1/N) ln ||T_N(theta - i*vartheta) ... T_1|| averaged
    over n_theta phase samples; stderr is the sample deviation / sqrt(n_theta)."""
    if n_steps < 1000:
        raise ValueError("n_steps must be >= 1000")
    if spec.kind not in (Kind.EXP, Kind.TAN):
        raise ValueError("transfer matrices exist for the exp and tan models only")
    theta0 = _reduced_theta(spec.theta)
    gs = np.empty(n_theta)
    for s in range(n_theta):
        theta = _guarded_theta(spec.kind, theta0 + 2.0 * math.pi * s / n_theta, n_steps)
        gs[s] = _product_log(spec.kind, spec.V, E, n_steps, theta, vartheta) / n_steps
    stderr = float(gs.std(ddof=1) / math.sqrt(n_theta)) if n_theta > 1 else 0.0
    return LyapunovEstimate(float(gs.mean()), LyapunovMethod.TRANSFER_PRODUCT,
                            n_steps, vartheta, stderr)


@dataclass
class AvilaScan:
    """gamma(vartheta) samples with the fitted piecewise-linear structure:
    integer slopes per segment, the breakpoints between them, and a
    non-convexity flag (tolerance 0.02)."""

    varthetas: np.ndarray
    gammas: np.ndarray
    stderrs: np.ndarray
    slopes: List[int]
    intercepts: List[float]
    breakpoints: List[float]
    non_convex: bool
    fit_residual: float

    def model(self, vartheta: float) -> float:
        """Fitted value: max over segment lines (exact for convex fits)."""
        return max(s * vartheta + b for s, b in zip(self.slopes, self.intercepts))


_SLOPE_MERGE = 0.1
_CONVEX_TOL = 0.02
_FIT_TOL = 0.05
_WINDOW = 4


def avila_scan(spec: ModelSpec, E: complex, varthetas: Sequence[float],
               n_steps: int = 10 ** 5, n_theta: int = 4) -> AvilaScan:
    """Sample gamma(vartheta) on an ascending grid and extract integer slopes.

    Sliding 4-point least-squares windows are merged while their slopes agree
    within 0.1, merged slopes are rounded to integers, and breakpoints are the
    intersections of consecutive fitted lines. FitFailure when the
    piecewise-linear residual exceeds 0.05.
    """
    vt = np.asarray(varthetas, dtype=float)
    if vt.size < _WINDOW:
        raise ValueError("grid needs at least 4 points")
    if np.any(np.diff(vt) <= 0) or vt[0] < 0:
        raise ValueError("grid must be ascending and non-negative")
    est = [lyapunov_position(spec, E, n_steps, v, n_theta) for v in vt]
    g = np.array([e.gamma for e in est])
    se = np.array([e.stderr for e in est])

    # sliding-window slopes
    win_slopes = np.empty(vt.size - _WINDOW + 1)
    for i in range(win_slopes.size):
        x = vt[i:i + _WINDOW]
        y = g[i:i + _WINDOW]
        xm = x - x.mean()
        win_slopes[i] = float((xm * (y - y.mean())).sum() / (xm * xm).sum())

    # merge consecutive windows with compatible slopes
    groups = [[0]]
    for i in range(1, win_slopes.size):
        ref = win_slopes[groups[-1]].mean()
        if abs(win_slopes[i] - ref) < _SLOPE_MERGE:
            groups[-1].append(i)
        else:
            groups.append([i])
    segments = []  # (slope_int, first_point, last_point)
    for grp in groups:
        s_int = int(round(float(win_slopes[grp].mean())))
        lo, hi = grp[0], grp[-1] + _WINDOW - 1
        if segments and segments[-1][0] == s_int:
            segments[-1] = (s_int, segments[-1][1], hi)
        else:
            segments.append((s_int, lo, hi))

    slopes = [s for s, _, _ in segments]
    intercepts = []
    for s, lo, hi in segments:
        intercepts.append(float((g[lo:hi + 1] - s * vt[lo:hi + 1]).mean()))
    breakpoints = []
    for j in range(len(segments) - 1):
        s1, b1 = slopes[j], intercepts[j]
        s2, b2 = slopes[j + 1], intercepts[j + 1]
        breakpoints.append((b1 - b2) / (s2 - s1))

    fitted = np.array([max(s * v + b for s, b in zip(slopes, intercepts)) for v in vt])
    fit_residual = float(np.abs(g - fitted).max())
    if fit_residual > _FIT_TOL:
        raise FitFailure(f"piecewise-linear residual {fit_residual:.3f} > {_FIT_TOL}")

    non_convex = any(s2 < s1 for s1, s2 in zip(slopes, slopes[1:]))
    if vt.size >= 3:
        d2 = np.diff(g) / np.diff(vt)
        non_convex = non_convex or bool(np.any(np.diff(d2) < -_CONVEX_TOL))
    return AvilaScan(vt, g, se, slopes, intercepts, breakpoints, non_convex,
                     fit_residual)
