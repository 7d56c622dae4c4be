"""Dense complex non-symmetric eigendecomposition, self-contained.

Pipeline: diagonal balancing (powers of 2) -> Householder reduction to upper
Hessenberg -> single-shift complex QR with Wilkinson shift and bottom-up
deflation -> eigenvectors by inverse iteration on the Hessenberg form,
back-transformed through the accumulated reflectors and the balancing.

numpy is used as the array substrate only; no numpy.linalg calls here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NoConvergence

_EPS = float(np.finfo(np.float64).eps)

# solver knobs (see module docs): sweep budget factor, exceptional-shift cadence,
# inverse-iteration shift and iteration cap
_SWEEPS_PER_EIG = 30
_EXCEPTIONAL_EVERY = 10
_INVIT_SHIFT = 1e-10
_INVIT_MAX = 5
_RESIDUAL_TOL = 1e-8


@dataclass
class Spectrum:
    """Eigenvalues, optionally with unit-norm eigenvectors and residuals.

    vectors[:, j] belongs to values[vector_indices[j]]; vector_indices is the
    full range when every eigenpair was requested. residuals are
    ||M v - lambda v||_2 / ||M||_F. defective flags vectors whose inverse
    iteration stagnated above the residual tolerance.
    """

    values: np.ndarray
    vectors: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    defective: Optional[np.ndarray] = None
    vector_indices: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.values)


def _frob(M: np.ndarray) -> float:
    return math.sqrt(float((np.abs(M) ** 2).sum()))


def balance(M: np.ndarray):
    """Parlett-Reinsch diagonal similarity scaling with radix-2 factors.

    Returns (A, d) with A = D^{-1} M D and D = diag(d); eigenvalues unchanged,
    eigenvectors of M are d * (eigenvectors of A).
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    d = np.ones(n)
    while True:
        changed = False
        absA = np.abs(A)
        for i in range(n):
            # both sums from the same abs array so the diagonal cancels exactly
            c = float(absA[:, i].sum() - absA[i, i])
            r = float(absA[i, :].sum() - absA[i, i])
            if c <= 0.0 or r <= 0.0 or not (math.isfinite(c) and math.isfinite(r)):
                continue
            f = 1.0
            s = c + r
            while c < r / 2.0:
                c *= 2.0
                r /= 2.0
                f *= 2.0
            while c >= r * 2.0:
                c /= 2.0
                r *= 2.0
                f /= 2.0
            if (c + r) < 0.95 * s and f != 1.0:
                d[i] *= f
                A[i, :] /= f
                A[:, i] *= f
                # f is a power of 2: the cached magnitudes rescale exactly
                absA[i, :] /= f
                absA[:, i] *= f
                changed = True
        if not changed:
            return A, d


def hessenberg(A: np.ndarray, want_q: bool = False):
    """Householder reduction to upper Hessenberg form.

    Returns (H, Q) with A = Q H Q^H; Q is None unless requested.
    """
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    reflectors = []
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = math.sqrt(float((np.abs(x) ** 2).sum()))
        if alpha == 0.0:
            reflectors.append(None)
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
        v = x.copy()
        v[0] += phase * alpha
        vn = math.sqrt(float((np.abs(v) ** 2).sum()))
        if vn == 0.0:
            reflectors.append(None)
            continue
        v /= vn
        H[k + 1:, k:] -= np.multiply.outer(2.0 * v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= np.multiply.outer(2.0 * (H[:, k + 1:] @ v), v.conj())
        H[k + 1, k] = -phase * alpha
        H[k + 2:, k] = 0.0
        reflectors.append(v)
    Q = None
    if want_q:
        Q = np.eye(n, dtype=complex)
        for k in range(n - 3, -1, -1):
            v = reflectors[k]
            if v is None:
                continue
            Q[k + 1:, k + 1:] -= np.multiply.outer(
                2.0 * v, v.conj() @ Q[k + 1:, k + 1:])
    return H, Q


def _eig2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]], larger-root-first for stability."""
    t = 0.5 * (a + d)
    det = a * d - b * c
    disc = np.sqrt(complex(t * t - det))
    l1 = t + disc if abs(t + disc) >= abs(t - disc) else t - disc
    l2 = det / l1 if l1 != 0.0 else 0.0 + 0.0j
    return l1, l2


def _wilkinson(a, b, c, d):
    l1, l2 = _eig2(a, b, c, d)
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def qr_eigvals_hessenberg(Hin: np.ndarray, max_sweeps: Optional[int] = None) -> np.ndarray:
    """All eigenvalues of an upper Hessenberg matrix by explicit single-shift
    QR (Givens) with Wilkinson shifts; 2x2 trailing blocks solved directly.

    Deflation when |H[l, l-1]| <= eps * (|H[l-1, l-1]| + |H[l, l]|).
    Raises NoConvergence when the sweep budget (30 per eigenvalue by default)
    is exhausted.
    """
    H = np.array(Hin, dtype=complex)
    n = H.shape[0]
    if n == 0:
        return np.empty(0, dtype=complex)
    if max_sweeps is None:
        max_sweeps = _SWEEPS_PER_EIG * n
    w = np.empty(n, dtype=complex)
    normH = _frob(H)
    cs = np.empty(n)
    sn = np.empty(n, dtype=complex)
    hi = n
    sweeps = 0
    stall = 0
    while hi > 0:
        if hi == 1:
            w[0] = H[0, 0]
            break
        lo = hi - 1
        while lo > 0:
            s = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if s == 0.0:
                s = normH
            if abs(H[lo, lo - 1]) <= _EPS * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi - 1:
            w[hi - 1] = H[hi - 1, hi - 1]
            hi -= 1
            stall = 0
            continue
        if lo == hi - 2:
            w[hi - 2], w[hi - 1] = _eig2(
                H[hi - 2, hi - 2], H[hi - 2, hi - 1],
                H[hi - 1, hi - 2], H[hi - 1, hi - 1])
            hi -= 2
            stall = 0
            continue
        if sweeps >= max_sweeps:
            raise NoConvergence(hi - 1)
        stall += 1
        if stall % _EXCEPTIONAL_EVERY == 0:
            mu = H[hi - 1, hi - 1] + 0.75 * abs(H[hi - 1, hi - 2])
        else:
            mu = _wilkinson(H[hi - 2, hi - 2], H[hi - 2, hi - 1],
                            H[hi - 1, hi - 2], H[hi - 1, hi - 1])
        # explicit shifted step on the active window: H - mu = QR, H <- RQ + mu
        dia = np.arange(lo, hi)
        H[dia, dia] -= mu
        for k in range(lo, hi - 1):
            a = H[k, k]
            b = H[k + 1, k]
            aa = abs(a)
            ab = abs(b)
            if ab == 0.0:
                c, s = 1.0, 0.0 + 0.0j
            elif aa == 0.0:
                c, s = 0.0, b.conjugate() / ab
            else:
                r = math.hypot(aa, ab)
                c = aa / r
                s = (a / aa) * (b.conjugate() / r)
            cs[k - lo] = c
            sn[k - lo] = s
            G = np.array([[c, s], [-s.conjugate(), c]], dtype=complex)
            H[k:k + 2, k:hi] = G @ H[k:k + 2, k:hi]
        for k in range(lo, hi - 1):
            c = cs[k - lo]
            s = sn[k - lo]
            Gh = np.array([[c, -s], [s.conjugate(), c]], dtype=complex)
            r = min(k + 2, hi)
            H[lo:r, k:k + 2] = H[lo:r, k:k + 2] @ Gh
        H[dia, dia] += mu
        sweeps += 1
    return w


def _check_square(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def eigenvalues(M: np.ndarray, max_sweeps: Optional[int] = None) -> Spectrum:
    """All eigenvalues of a dense complex matrix (values only)."""
    M = _check_square(M)
    A, _ = balance(M)
    H, _ = hessenberg(A)
    return Spectrum(values=qr_eigvals_hessenberg(H, max_sweeps))


def _hess_lu(H: np.ndarray, lam: complex):
    """LU of (H - lam I) for upper Hessenberg H with adjacent-row partial
    pivoting. Returns (U, swaps, mults) for reuse by _hess_lu_solve."""
    A = H.copy()
    n = A.shape[0]
    dia = np.arange(n)
    A[dia, dia] -= lam
    tiny = _EPS * (abs(lam) + 1.0) + 1e-300
    swaps = np.zeros(n - 1, dtype=bool)
    mults = np.zeros(n - 1, dtype=complex)
    for k in range(n - 1):
        if abs(A[k + 1, k]) > abs(A[k, k]):
            A[[k, k + 1], k:] = A[[k + 1, k], k:]
            swaps[k] = True
        piv = A[k, k]
        if piv == 0.0:
            A[k, k] = piv = tiny
        m = A[k + 1, k] / piv
        if m != 0.0:
            A[k + 1, k + 1:] -= m * A[k, k + 1:]
        A[k + 1, k] = 0.0
        mults[k] = m
    if A[n - 1, n - 1] == 0.0:
        A[n - 1, n - 1] = tiny
    return A, swaps, mults


def _hess_lu_solve(U, swaps, mults, b):
    n = U.shape[0]
    y = np.array(b, dtype=complex)
    for k in range(n - 1):
        if swaps[k]:
            y[k], y[k + 1] = y[k + 1], y[k]
        y[k + 1] -= mults[k] * y[k]
    x = np.empty(n, dtype=complex)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def eigenpairs(M: np.ndarray, select: Optional[Sequence[int]] = None,
               residual_tol: float = _RESIDUAL_TOL,
               max_sweeps: Optional[int] = None) -> Spectrum:
    """Eigenvalues plus inverse-iteration eigenvectors and residuals.

    select restricts the vector pass to the given value indices (all by
    default). Vectors are unit-norm with the largest-modulus component made
    real positive. Vectors whose residual stays above residual_tol after the
    iteration cap are flagged defective rather than raised.
    """
    M = _check_square(M)
    n = M.shape[0]
    A, d = balance(M)
    H, Q = hessenberg(A, want_q=True)
    w = qr_eigvals_hessenberg(H.copy(), max_sweeps)
    normM = _frob(M)
    indices = np.arange(n) if select is None else np.asarray(list(select), dtype=int)
    vecs = np.empty((n, len(indices)), dtype=complex)
    res = np.empty(len(indices))
    defective = np.zeros(len(indices), dtype=bool)
    b0 = np.ones(n) / math.sqrt(n)
    for col, j in enumerate(indices):
        lam = w[j] + _INVIT_SHIFT * normM
        U, swaps, mults = _hess_lu(H, lam)
        y = _hess_lu_solve(U, swaps, mults, b0)
        y /= math.sqrt(float((np.abs(y) ** 2).sum()))
        best_v = None
        best_r = math.inf
        for _ in range(_INVIT_MAX):
            y = _hess_lu_solve(U, swaps, mults, y)
            y /= math.sqrt(float((np.abs(y) ** 2).sum()))
            v = d * (Q @ y)
            v /= math.sqrt(float((np.abs(v) ** 2).sum()))
            r = math.sqrt(float((np.abs(M @ v - w[j] * v) ** 2).sum())) / normM
            if r < best_r:
                best_r = r
                best_v = v
            if r <= 0.1 * residual_tol:
                break
        v = best_v
        k = int(np.argmax(np.abs(v)))
        phase = v[k] / abs(v[k])
        v = v * phase.conjugate()
        vecs[:, col] = v
        res[col] = best_r
        if best_r > residual_tol:
            defective[col] = True
    return Spectrum(values=w, vectors=vecs, residuals=res, defective=defective,
                    vector_indices=indices)
