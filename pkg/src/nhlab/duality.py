"""Position <-> momentum duality: the reindexed discrete Fourier transform,
dual Hamiltonians, and momentum-space Lyapunov exponents from the dual
amplitude recursions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionNearZero, IncommensurateSize, Resonance, SingularQuadrature
from .model import ALPHA, Boundary, Hamiltonian, Kind, ModelSpec, _reduced_theta
from .transfer import LyapunovEstimate, LyapunovMethod

_RESONANCE_RADIUS = 1e-12
_QUAD_SINGULARITY = 1e-10


@dataclass
class DualState:
    """Momentum-space amplitudes phi_k and their Euclidean norm."""

    amplitudes: np.ndarray
    norm: float


def _dft_matrix(p: int, q: int, sign: int) -> np.ndarray:
    # exponents reduced mod q in integer arithmetic: exactly unitary reindexing
    nk = np.arange(1, q + 1, dtype=np.int64)
    expo = (p * np.outer(nk, nk)) % q
    return np.exp(sign * 2j * math.pi * expo / q) / math.sqrt(q)


def _check_commensurate(L: int, p: int, q: int):
    if L != q:
        raise IncommensurateSize(f"state length {L} != q = {q}")
    if not (0 < p < q) or math.gcd(p, q) != 1:
        raise ValueError("p/q must be irreducible with 0 < p < q")


def fourier_transform(psi: np.ndarray, p: int, q: int) -> DualState:
    """phi_k = (1/sqrt(L)) sum_n psi_n exp(2*pi*i*(p/q)*n*k); unitary because
    gcd(p, q) = 1 makes n -> p*n mod q a permutation."""
    psi = np.asarray(psi, dtype=complex)
    _check_commensurate(len(psi), p, q)
    phi = _dft_matrix(p, q, +1) @ psi
    return DualState(phi, float(np.sqrt((np.abs(phi) ** 2).sum())))


def inverse_fourier_transform(phi: np.ndarray, p: int, q: int) -> DualState:
    phi = np.asarray(phi, dtype=complex)
    _check_commensurate(len(phi), p, q)
    psi = _dft_matrix(p, q, -1) @ phi
    return DualState(psi, float(np.sqrt((np.abs(psi) ** 2).sum())))


def build_dual_exp(spec: ModelSpec) -> Hamiltonian:
    """Momentum-space image of the exponential model after the gauge
    transform phi_k -> e^{ik theta} phi_k: onsite (2/V) cos(2*pi*(p/q)*k),
    unit one-sided hop on phi_{k-1}, and the accumulated phase e^{iL theta}
    on the periodic corner. Eigenvalues satisfy E = V * lambda."""
    if spec.kind is not Kind.EXP:
        raise ValueError("dual construction applies to the exp model")
    if spec.boundary is not Boundary.PERIODIC:
        raise ValueError("dual construction requires the periodic ring")
    _check_commensurate(spec.L, spec.p, spec.q)
    k = np.arange(1, spec.L + 1, dtype=np.int64)
    onsite = (2.0 / spec.V) * np.cos(2.0 * math.pi * ((spec.p * k) % spec.q) / spec.q)
    corner = np.exp(1j * spec.L * _reduced_theta(spec.theta))
    return Hamiltonian(spec.L, onsite.astype(complex), hop_right=1.0 + 0j,
                       hop_left=0.0 + 0j, boundary=Boundary.PERIODIC,
                       corner_right=corner)


def _momentum_cos(p: int, q: int, k: np.ndarray, n_total: int) -> np.ndarray:
    """cos phases of the dual recursion: rational p/q on the finite ring
    (n_total <= q), irrational alpha beyond it (Weyl equidistribution)."""
    if n_total <= q:
        return np.cos(2.0 * math.pi * ((p * k.astype(np.int64)) % q) / q)
    return np.cos(2.0 * math.pi * ALPHA * k)


def lyapunov_momentum_product(spec: ModelSpec, E: complex, K: int) -> LyapunovEstimate:
    """Finite-K momentum-space exponent (1/K) sum ln |(E - 2cos(2*pi*alpha*k)) / V|
    (the decay exponent of the dual amplitude recursion, sign-flipped)."""
    if spec.kind is not Kind.EXP:
        raise ValueError("momentum product applies to the exp model")
    if K < 1000:
        raise ValueError("K must be >= 1000")
    E = complex(E)
    k = np.arange(1, K + 1, dtype=np.float64)
    terms = np.abs(E - 2.0 * _momentum_cos(spec.p, spec.q, k, K))
    kmin = int(np.argmin(terms))
    if terms[kmin] < _RESONANCE_RADIUS:
        raise Resonance(kmin + 1, float(terms[kmin]))
    logs = np.log(terms / spec.V)
    blocks = np.array_split(logs, 8)
    means = np.array([b.mean() for b in blocks])
    stderr = float(means.std(ddof=1) / math.sqrt(len(means)))
    return LyapunovEstimate(float(logs.mean()), LyapunovMethod.MOMENTUM_PRODUCT,
                            K, 0.0, stderr)


@dataclass
class DualTanRecursion:
    """Coefficient evaluators of the tangent-model dual two-step recursion
    phi_{k+1} = (a_k / b_k) phi_{k-1} with
    a_k = -2 cos(phase(k-1)) + V + E and b_k = 2 cos(phase(k+1)) + V - E.

    Scalar evaluation uses the spec's rational p/q (finite ring); the product
    driver switches to the irrational alpha once K exceeds q."""

    V: float
    p: int
    q: int

    def _cos(self, j: np.ndarray, n_total: int) -> np.ndarray:
        return _momentum_cos(self.p, self.q, j, n_total)

    def a(self, k: int, E: complex) -> complex:
        return complex(-2.0 * self._cos(np.asarray([k - 1], float), k)[0] + self.V + E)

    def b(self, k: int, E: complex) -> complex:
        return complex(2.0 * self._cos(np.asarray([k + 1], float), k + 1)[0] + self.V - E)

    def ratio(self, k: int, E: complex) -> complex:
        bk = self.b(k, E)
        if abs(bk) < _RESONANCE_RADIUS:
            raise DivisionNearZero(f"|b_{k}| = {abs(bk):.3e}")
        return self.a(k, E) / bk

    def lyapunov_product(self, E: complex, K: int) -> LyapunovEstimate:
        """(1/2K) sum_k (ln|a_k| - ln|b_k|): the per-site momentum exponent
        of the two-step recursion (each ratio advances two sites)."""
        if K < 1000:
            raise ValueError("K must be >= 1000")
        E = complex(E)
        k = np.arange(1, K + 1, dtype=np.float64)
        av = np.abs(-2.0 * self._cos(k - 1, K + 1) + self.V + E)
        bv = np.abs(2.0 * self._cos(k + 1, K + 1) + self.V - E)
        bad = int(np.argmin(bv))
        if bv[bad] < _RESONANCE_RADIUS:
            raise DivisionNearZero(f"|b_{bad + 1}| = {bv[bad]:.3e}")
        bad = int(np.argmin(av))
        if av[bad] < _RESONANCE_RADIUS:
            raise DivisionNearZero(f"|a_{bad + 1}| = {av[bad]:.3e}")
        gamma = float((np.log(av) - np.log(bv)).sum() / (2.0 * K))
        return LyapunovEstimate(gamma, LyapunovMethod.MOMENTUM_PRODUCT, K, 0.0, 0.0)


def build_dual_tan(spec: ModelSpec) -> DualTanRecursion:
    if spec.kind is not Kind.TAN:
        raise ValueError("dual recursion applies to the tan model")
    return DualTanRecursion(spec.V, spec.p, spec.q)


def lyapunov_momentum_tan(E: complex, V: float, quadrature_points: int = 10 ** 4,
                          offset: float = 0.0) -> LyapunovEstimate:
    """Momentum-space exponent of the tangent model by composite midpoint
    quadrature over one period:

        gamma = (1/2) * (1/2pi) int_0^{2pi} [ln g1(u) - ln g2(u)] du,
        g1 = |V + E - 2 cos u|,  g2 = |V - E + 2 cos u|.

    The 1/2 is the per-site normalization of the two-step dual recursion; with
    it the quadrature matches the finite-K ratio product for every E. Raises
    SingularQuadrature when an abscissa lands on a log singularity (shift
    `offset` to move the midpoint grid)."""
    if quadrature_points < 1000:
        raise ValueError("quadrature_points must be >= 1000")
    if V <= 0:
        raise ValueError("V must be positive")
    E = complex(E)
    u = (np.arange(quadrature_points) + 0.5 + offset) * (2.0 * math.pi / quadrature_points)
    c = 2.0 * np.cos(u)
    g1 = np.abs(V + E - c)
    g2 = np.abs(V - E + c)
    worst = min(float(g1.min()), float(g2.min()))
    if worst < _QUAD_SINGULARITY:
        raise SingularQuadrature(
            f"abscissa within {worst:.2e} of a log singularity; shift offset")
    gamma = 0.5 * float((np.log(g1) - np.log(g2)).mean())
    return LyapunovEstimate(gamma, LyapunovMethod.MOMENTUM_PRODUCT,
                            quadrature_points, 0.0, 0.0)
