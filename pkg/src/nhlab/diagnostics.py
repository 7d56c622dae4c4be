"""Eigenstate and spectrum diagnostics: participation ratios, exponential
decay fits, spectral set distances, real fractions, eigenbasis time evolution
and the disordered-ring (Hatano-Nelson) regime scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import eigensolver
from .errors import (EmptySet, IllConditionedBasis, InsufficientSupport,
                     NHLabError, ZeroState)
from .model import Hamiltonian, Kind, ModelSpec, build_hatano_nelson, densify

_COND_LIMIT = 1e12
_SUPPORT_FLOOR = 1e-12


def ipr(state: np.ndarray) -> float:
    """Inverse participation ratio sum|psi|^4 / (sum|psi|^2)^2; 1/L for a
    uniform state, 1 for a delta state."""
    a2 = np.abs(np.asarray(state, dtype=complex)) ** 2
    s = float(a2.sum())
    if s == 0.0:
        raise ZeroState("zero-norm state")
    return float((a2 * a2).sum() / (s * s))


def _ring_distance(L: int, n0: int) -> np.ndarray:
    d = np.abs(np.arange(L) - n0)
    return np.minimum(d, L - d)


def decay_rate_fit(state: np.ndarray) -> Tuple[float, float]:
    """Least-squares fit of ln|psi| against ring distance from the peak site.

    Uses sites with |psi| > 1e-12 * max; returns (slope magnitude, r^2), with
    r^2 = nan when the data has no spread (e.g. a uniform state)."""
    a = np.abs(np.asarray(state, dtype=complex))
    if a.size < 20:
        raise ValueError("state must have at least 20 sites")
    if a.max() == 0.0:
        raise ZeroState("zero-norm state")
    n0 = int(np.argmax(a))
    use = a > _SUPPORT_FLOOR * a.max()
    if int(use.sum()) < 10:
        raise InsufficientSupport(f"only {int(use.sum())} usable sites")
    x = _ring_distance(a.size, n0)[use].astype(float)
    y = np.log(a[use])
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float((xm * xm).sum())
    if sxx == 0.0:
        raise InsufficientSupport("all usable sites at one distance")
    slope = float((xm * ym).sum() / sxx)
    ss_res = float(((ym - slope * xm) ** 2).sum())
    ss_tot = float((ym * ym).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-30 else float("nan")
    return abs(slope), r2


def _points(obj) -> np.ndarray:
    vals = getattr(obj, "values", None)
    if vals is None:
        vals = getattr(obj, "samples", None)
    if vals is None:
        vals = obj
    pts = np.asarray(vals, dtype=complex).ravel()
    if pts.size == 0:
        raise EmptySet("empty point set")
    return pts


def directed_distance(A, B) -> float:
    """max over points of A of the distance to the nearest point of B."""
    a = _points(A)
    b = _points(B)
    worst = 0.0
    for lo in range(0, a.size, 512):
        d = np.abs(a[lo:lo + 512, None] - b[None, :]).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def spectral_distance(A, B, symmetric: bool = True) -> float:
    """Hausdorff distance between two spectral point sets in the complex
    plane (curves enter through their samples). symmetric=False gives the
    one-sided A -> B distance."""
    d_ab = directed_distance(A, B)
    if not symmetric:
        return d_ab
    return max(d_ab, directed_distance(B, A))


def real_fraction(spectrum, tol: float) -> float:
    """Fraction of eigenvalues with |Im E| <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    vals = _points(spectrum)
    return float((np.abs(vals.imag) <= tol).mean())


@dataclass
class EvolutionResult:
    """Norm trace of psi(t) = sum_j c_j e^{-i E_j t} v_j plus the fitted
    exponential growth rate over the last half of the time grid."""

    t: np.ndarray
    norms: np.ndarray
    growth_exponent: float
    max_imag: float
    basis_condition: float


def evolve_norm(H, psi0: np.ndarray, t_grid: Sequence[float],
                pairs: Optional[eigensolver.Spectrum] = None) -> EvolutionResult:
    """Eigenbasis time evolution of psi0 under H (exact for the matrix at
    hand); raises IllConditionedBasis when the eigenvector matrix condition
    exceeds 1e12, which is how non-normality shows up here."""
    M = densify(H) if isinstance(H, Hamiltonian) else np.asarray(H, dtype=complex)
    t = np.asarray(t_grid, dtype=float)
    if t.size < 4 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValueError("t_grid must be ascending, non-negative, >= 4 points")
    if pairs is None:
        pairs = eigensolver.eigenpairs(M)
    if pairs.vectors is None or pairs.vectors.shape[1] != M.shape[0]:
        raise ValueError("need a full set of eigenvectors")
    if pairs.residuals is not None and float(np.nanmax(pairs.residuals)) > 1e-8:
        raise NHLabError("eigenpair residuals exceed 1e-8; dynamics would be unreliable")
    X = pairs.vectors
    cond = float(np.linalg.cond(X))
    if cond > _COND_LIMIT:
        raise IllConditionedBasis(cond)
    psi0 = np.asarray(psi0, dtype=complex)
    c = np.linalg.solve(X, psi0)
    w = pairs.values
    norms = np.empty(t.size)
    for i, ti in enumerate(t):
        norms[i] = float(np.sqrt((np.abs(X @ (c * np.exp(-1j * w * ti))) ** 2).sum()))
    half = t >= t[-1] / 2.0
    x = t[half] - t[half].mean()
    y = np.log(norms[half])
    slope = float((x * (y - y.mean())).sum() / (x * x).sum())
    return EvolutionResult(t, norms, slope, float(w.imag.max()), cond)


@dataclass
class RegimeReport:
    """Real-fraction landscape of the disordered asymmetric-hopping ring.

    fractions[i, s] is the real fraction at h_grid[i] for seed index s.
    h1_est: largest grid h where every seed is fully real; h2_est: smallest
    grid h where no seed has any real eigenvalue (None if never reached).
    Raw grid data, no smoothing."""

    h_grid: np.ndarray
    fractions: np.ndarray
    seeds: List[int]
    h1_est: Optional[float]
    h2_est: Optional[float]
    n_seeds: int
    errors: List[Tuple[float, int, str]] = field(default_factory=list)


def hatano_regime_scan(base_spec: ModelSpec, h_grid: Sequence[float],
                       n_seeds: int, tol_scale: float = 1e-8) -> RegimeReport:
    """Diagonalize each (h, seed) disordered ring under periodic boundary and
    measure the fraction of real eigenvalues, tol = tol_scale * ||H||_F.

    The disorder realization is fixed per seed across the h grid (seeds are
    base_spec.seed + 0..n_seeds-1), so per-seed fractions are comparable in h.
    Solver failures are recorded per instance, not fatal."""
    h = np.asarray(h_grid, dtype=float)
    if h.size < 1 or h[0] != 0.0 or np.any(np.diff(h) <= 0):
        raise ValueError("h_grid must be ascending and start at 0")
    if n_seeds < 4:
        raise ValueError("n_seeds must be >= 4")
    if base_spec.kind is not Kind.HATANO:
        raise ValueError("regime scan applies to the disordered ring")
    seeds = [base_spec.seed + i for i in range(n_seeds)]
    fractions = np.full((h.size, n_seeds), np.nan)
    errors: List[Tuple[float, int, str]] = []
    for si, seed in enumerate(seeds):
        for hi, hval in enumerate(h):
            spec = base_spec.with_(h=float(hval), seed=seed)
            M = densify(build_hatano_nelson(spec))
            tol = tol_scale * math.sqrt(float((np.abs(M) ** 2).sum()))
            try:
                spect = eigensolver.eigenvalues(M)
            except NHLabError as exc:
                errors.append((float(hval), seed, str(exc)))
                continue
            fractions[hi, si] = real_fraction(spect, tol)
    ok = ~np.isnan(fractions)
    full = [i for i in range(h.size) if ok[i].all() and np.min(fractions[i][ok[i]]) >= 1.0]
    none = [i for i in range(h.size) if ok[i].all() and np.max(fractions[i][ok[i]]) <= 0.0]
    h1 = float(h[max(full)]) if full else None
    h2 = float(h[min(none)]) if none else None
    return RegimeReport(h, fractions, seeds, h1, h2, n_seeds, errors)
