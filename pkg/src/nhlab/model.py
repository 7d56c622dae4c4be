"""Lattice Hamiltonians: quasiperiodic exponential / tangent potentials and the
disordered asymmetric-hopping (Hatano-Nelson) ring.

Site convention: the physical site index n runs 1..L; array slot i holds site
n = i + 1. A Hamiltonian acts on a state through the three-term relation

    (H psi)_n = hop_left * psi_{n+1} + hop_right * psi_{n-1} + onsite_n * psi_n

so in the dense matrix M[n][n+1] = hop_left and M[n+1][n] = hop_right (0-based
rows). For the quasiperiodic models both hops are 1 and the relation reduces to
psi_{n+1} + psi_{n-1} + V_n psi_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import SingularPhase

ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * math.pi

# exclusion window around tangent poles, radians
EPS_TAN = 1e-6


class Kind(str, Enum):
    EXP = "exp"
    TAN = "tan"
    HATANO = "hatano"


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


def fibonacci_approximant(m: int) -> Tuple[int, int]:
    """Return (F_{m-1}, F_m) with F_1 = F_2 = 1, the m-th rational approximant
    p/q of alpha = (sqrt(5)-1)/2."""
    if m < 2:
        raise ValueError("m must be >= 2")
    a, b = 1, 1
    for _ in range(m - 2):
        a, b = b, a + b
    return a, b


def uniform_pm1(seed: int, n: int) -> np.ndarray:
    """n deterministic draws from the uniform distribution on [-1, 1).

    Counter-based splitmix64: site i (1-based) draws
    mix64(seed + i * 0x9E3779B97F4A7C15) and keeps the top 53 bits as the
    mantissa of a [0, 1) double. Identical across platforms given the seed.
    """
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) / 9007199254740992.0
    return 2.0 * u - 1.0


_KV_KEYS = ("kind", "V", "p", "q", "theta", "h", "L", "boundary", "seed")


@dataclass(frozen=True)
class ModelSpec:
    """Full description of one lattice Hamiltonian instance."""

    kind: Kind
    V: float = 1.0
    p: int = 1
    q: int = 2
    theta: float = 0.5
    h: float = 0.0
    L: int = 3
    boundary: Boundary = Boundary.PERIODIC
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.V <= 0:
            raise ValueError("V must be positive")
        if self.L < 3:
            raise ValueError("L must be >= 3")
        if not (0 < self.p < self.q):
            raise ValueError("require 0 < p < q")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError("p/q must be irreducible")
        if self.kind in (Kind.EXP, Kind.TAN):
            if self.boundary is Boundary.PERIODIC and self.L != self.q:
                raise ValueError("periodic quasiperiodic ring requires L = q")
            if self.boundary is Boundary.OPEN and self.L > self.q:
                raise ValueError("open chain requires L <= q")

    @classmethod
    def from_fib(cls, kind, V, m, *, theta=0.5, boundary=Boundary.PERIODIC,
                 L=None, h=0.0, seed=0) -> "ModelSpec":
        """Build a spec with p/q the m-th Fibonacci approximant and L = q."""
        p, q = fibonacci_approximant(m)
        return cls(kind=Kind(kind), V=V, p=p, q=q, theta=theta, h=h,
                   L=q if L is None else L, boundary=Boundary(boundary), seed=seed)

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def to_kv(self) -> str:
        """Flat key=value text form (one key per line)."""
        vals = {
            "kind": self.kind.value, "V": repr(self.V), "p": self.p, "q": self.q,
            "theta": repr(self.theta), "h": repr(self.h), "L": self.L,
            "boundary": self.boundary.value, "seed": self.seed,
        }
        return "\n".join(f"{k}={vals[k]}" for k in _KV_KEYS) + "\n"

    @classmethod
    def from_kv(cls, text: str) -> "ModelSpec":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        unknown = set(kv) - set(_KV_KEYS)
        if unknown:
            raise ValueError(f"unknown ModelSpec keys: {sorted(unknown)}")
        return cls(
            kind=Kind(kv["kind"]),
            V=float(kv.get("V", 1.0)),
            p=int(kv.get("p", 1)),
            q=int(kv.get("q", 2)),
            theta=float(kv.get("theta", 0.5)),
            h=float(kv.get("h", 0.0)),
            L=int(kv.get("L", 3)),
            boundary=Boundary(kv.get("boundary", "periodic")),
            seed=int(kv.get("seed", 0)),
        )


@dataclass
class Hamiltonian:
    """Banded-with-corners complex lattice operator.

    corner_right / corner_left multiply the periodic wrap entries
    M[0][L-1] = hop_right * corner_right and M[L-1][0] = hop_left * corner_left
    (used by the momentum-space dual, where the gauge leaves a residual phase
    on one corner).
    """

    L: int
    onsite: np.ndarray
    hop_right: complex
    hop_left: complex
    boundary: Boundary
    corner_right: complex = 1.0 + 0.0j
    corner_left: complex = 1.0 + 0.0j

    def __post_init__(self):
        self.onsite = np.asarray(self.onsite, dtype=complex)
        if self.onsite.shape != (self.L,):
            raise ValueError("onsite length must equal L")
        if not np.all(np.isfinite(self.onsite)):
            raise ValueError("onsite entries must be finite")


def _reduced_theta(theta: float) -> float:
    # fmod is exact, so theta and theta + 2*pi*k give bitwise-identical phases
    return math.fmod(theta, TWO_PI)


def _lattice_phases(p: int, q: int, theta: float, L: int, sign: int) -> np.ndarray:
    """Phases sign*2*pi*(p/q)*n + theta for n = 1..L, with the rational part
    reduced in integer arithmetic so the result is exactly q-periodic."""
    n = np.arange(1, L + 1, dtype=np.int64)
    frac = (p * n) % q
    return sign * TWO_PI * (frac / float(q)) + _reduced_theta(theta)


def build_exp_model(spec: ModelSpec) -> Hamiltonian:
    """Onsite V * exp(i(-2*pi*(p/q)*n + theta)), unit hops."""
    if spec.kind is not Kind.EXP:
        raise ValueError("spec.kind must be 'exp'")
    phases = _lattice_phases(spec.p, spec.q, spec.theta, spec.L, sign=-1)
    onsite = spec.V * np.exp(1j * phases)
    return Hamiltonian(spec.L, onsite, 1.0 + 0j, 1.0 + 0j, spec.boundary)


def tan_pole_distance(p: int, q: int, theta: float, L: int) -> np.ndarray:
    """Distance of each site phase 2*pi*(p/q)*n + theta to the nearest
    odd multiple of pi/2 (the tangent poles)."""
    x = _lattice_phases(p, q, theta, L, sign=+1)
    y = np.mod(x - 0.5 * math.pi, math.pi)
    return np.minimum(y, math.pi - y)


def build_tan_model(spec: ModelSpec) -> Hamiltonian:
    """Onsite i * V * tan(2*pi*(p/q)*n + theta), unit hops.

    Raises SingularPhase when any site phase falls within EPS_TAN of a tangent
    pole; the caller must shift theta.
    """
    if spec.kind is not Kind.TAN:
        raise ValueError("spec.kind must be 'tan'")
    dist = tan_pole_distance(spec.p, spec.q, spec.theta, spec.L)
    bad = np.nonzero(dist < EPS_TAN)[0]
    if bad.size:
        raise SingularPhase(list((bad + 1)[:8]), float(dist[bad].min()))
    phases = _lattice_phases(spec.p, spec.q, spec.theta, spec.L, sign=+1)
    onsite = 1j * spec.V * np.tan(phases)
    return Hamiltonian(spec.L, onsite, 1.0 + 0j, 1.0 + 0j, spec.boundary)


def build_hatano_nelson(spec: ModelSpec) -> Hamiltonian:
    """Uniform [-1,1) disorder from the seeded generator, hops e^{+-h}."""
    if spec.kind is not Kind.HATANO:
        raise ValueError("spec.kind must be 'hatano'")
    onsite = uniform_pm1(spec.seed, spec.L).astype(complex)
    return Hamiltonian(spec.L, onsite, math.exp(spec.h), math.exp(-spec.h),
                       spec.boundary)


_BUILDERS = {
    Kind.EXP: build_exp_model,
    Kind.TAN: build_tan_model,
    Kind.HATANO: build_hatano_nelson,
}


def build_model(spec: ModelSpec) -> Hamiltonian:
    return _BUILDERS[spec.kind](spec)


def densify(H: Hamiltonian) -> np.ndarray:
    """Dense L x L matrix: M[i][i] = onsite[i], M[i][i+1] = hop_left,
    M[i+1][i] = hop_right (0-based rows = site order), corners present only
    under periodic boundary."""
    L = H.L
    M = np.zeros((L, L), dtype=complex)
    np.fill_diagonal(M, H.onsite)
    i = np.arange(L - 1)
    M[i, i + 1] = H.hop_left
    M[i + 1, i] = H.hop_right
    if H.boundary is Boundary.PERIODIC:
        M[0, L - 1] = H.hop_right * H.corner_right
        M[L - 1, 0] = H.hop_left * H.corner_left
    return M
