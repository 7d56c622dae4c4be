"""Closed-form spectra and Lyapunov exponents, the Dini integral, and the
Thouless log-distance average over numerical spectra."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateDistance

_DEGENERATE_RADIUS = 1e-12


class CurveKind(str, Enum):
    REAL_BAND = "real_band"
    LOOP = "loop"
    TAN_CONJECTURE = "tan_conjecture"


@dataclass
class AnalyticCurve:
    """Parametric samples of a closed-form spectral set."""

    kind: CurveKind
    V: float
    k: np.ndarray
    samples: np.ndarray
    conjecture: bool = False


def real_band_point(k: float) -> complex:
    return complex(2.0 * math.cos(k))


def loop_point(V: float, k: float) -> complex:
    return V * cmath.exp(1j * k) + cmath.exp(-1j * k) / V


def analytic_spectrum_exp(V: float, n_samples: int) -> AnalyticCurve:
    """Exact spectral set of the exponential-phase model: the real band
    E = 2 cos(k) for V <= 1, the closed loop E = V e^{ik} + e^{-ik}/V for
    V > 1. Uniform k grid on [0, 2*pi)."""
    if V <= 0:
        raise ValueError("V must be positive")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    k = np.linspace(0.0, 2.0 * math.pi, n_samples, endpoint=False)
    if V <= 1.0:
        return AnalyticCurve(CurveKind.REAL_BAND, V, k,
                             (2.0 * np.cos(k)).astype(complex))
    return AnalyticCurve(CurveKind.LOOP, V, k,
                         V * np.exp(1j * k) + np.exp(-1j * k) / V)


def dini_integral(E: complex) -> float:
    """(1/2pi) int_0^{2pi} ln|E - 2cos(k)| dk in closed form.

    With w the root of w^2 - E w + 1 = 0 of modulus >= 1 the value is ln|w|;
    it vanishes exactly on the band [-2, 2] (branch rule, returned as 0.0).
    """
    E = complex(E)
    if E.imag == 0.0 and -2.0 <= E.real <= 2.0:
        return 0.0
    disc = cmath.sqrt(E * E - 4.0)
    w = max(abs(E + disc), abs(E - disc)) / 2.0
    return max(0.0, math.log(w)) if w > 0.0 else 0.0


def gamma_position_closed(V: float) -> float:
    """Position-space Lyapunov exponent on the spectrum: max{0, ln V}."""
    if V <= 0:
        raise ValueError("V must be positive")
    return max(0.0, math.log(V))


def gamma_momentum_closed(V: float) -> float:
    """Momentum-space Lyapunov exponent on the spectrum: max{0, ln(1/V)}."""
    if V <= 0:
        raise ValueError("V must be positive")
    return max(0.0, -math.log(V))


def duality_relation_residual(gamma_pos: float, gamma_mom: float, V: float) -> float:
    """Signed residual gamma_pos - gamma_mom - ln V of the position/momentum
    exponent relation."""
    return gamma_pos - gamma_mom - math.log(V)


def thouless_gamma(spectrum, E: complex, self_exclude: bool = False) -> float:
    """Empirical Thouless average (1/L) sum_{E' != E} ln|E - E'|.

    Terms closer than 1e-12 raise DegenerateDistance unless self_exclude is
    set, in which case they are dropped (the normalization stays 1/L)."""
    values = np.asarray(getattr(spectrum, "values", spectrum), dtype=complex)
    if values.size < 2:
        raise ValueError("need at least 2 spectrum points")
    dist = np.abs(complex(E) - values)
    close = dist < _DEGENERATE_RADIUS
    if close.any():
        if not self_exclude:
            raise DegenerateDistance(values[close].tolist())
        dist = dist[~close]
    return float(np.log(dist).sum() / values.size)


def gamma_tan_closed(E: complex, V: float) -> float:
    """Lyapunov exponent of the tangent-potential model,
    max of the two arcosh terms; arguments below 1 clamp to 0 (off-spectrum
    convention)."""
    if V <= 0:
        raise ValueError("V must be positive")
    E = complex(E)
    a1 = (abs(E + V + 2.0) + abs(E + V - 2.0)) / 4.0
    a2 = (abs(E - V + 2.0) + abs(E - V - 2.0)) / 4.0
    return max(math.acosh(max(a1, 1.0)), math.acosh(max(a2, 1.0)))


def analytic_spectrum_tan(V: float, n_samples: int, y_max: float = None) -> AnalyticCurve:
    """CONJECTURED spectral set of the tangent-potential model: the real
    segment [V-2, 2-V] (empty for V > 2) plus a sampled stretch of the
    imaginary axis. Flagged conjecture; y_max only bounds the plotted axis
    samples (default V + 2)."""
    if V <= 0:
        raise ValueError("V must be positive")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if y_max is None:
        y_max = V + 2.0
    pts = []
    if V <= 2.0:
        n_seg = n_samples // 2
        seg = np.linspace(V - 2.0, 2.0 - V, max(n_seg, 2)).astype(complex)
        pts.append(seg)
    n_ax = n_samples - sum(len(a) for a in pts)
    if n_ax > 0:
        y = np.linspace(-y_max, y_max, max(n_ax, 2))
        if V <= 2.0:
            y = y[y != 0.0]  # axis branch excludes the origin for V <= 2
        pts.append(1j * y)
    samples = np.concatenate(pts)
    k = np.arange(len(samples), dtype=float) / len(samples)
    return AnalyticCurve(CurveKind.TAN_CONJECTURE, V, k, samples, conjecture=True)
