import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhlab import (ALPHA, Boundary, Hamiltonian, Kind, ModelSpec,
                   build_exp_model, build_hatano_nelson, build_model,
                   build_tan_model, densify, fibonacci_approximant,
                   uniform_pm1)
from nhlab.errors import SingularPhase


def test_fibonacci_values():
    assert fibonacci_approximant(6) == (5, 8)
    assert fibonacci_approximant(7) == (8, 13)
    p, q = fibonacci_approximant(16)
    assert (p, q) == (610, 987)
    assert abs(p / q - ALPHA) < 1e-6


def test_fibonacci_rejects_small_index():
    with pytest.raises(ValueError):
        fibonacci_approximant(1)


@given(st.integers(min_value=2, max_value=60))
def test_fibonacci_approximant_properties(m):
    p, q = fibonacci_approximant(m)
    assert math.gcd(p, q) == 1
    assert 0 < p <= q
    if m >= 3:
        assert p < q
    if m >= 10:
        assert abs(p / q - ALPHA) < 1.0 / q


def test_exp_zero_potential_limit():
    # V must stay positive, but a tiny V gives an essentially free ring
    spec = ModelSpec(kind=Kind.EXP, V=1e-300, p=2, q=3, L=3)
    H = build_exp_model(spec)
    assert np.abs(H.onsite).max() <= 2e-300
    assert H.hop_left == 1.0 and H.hop_right == 1.0


def test_exp_onsite_first_site():
    spec = ModelSpec(kind=Kind.EXP, V=1.0, p=2, q=3, theta=0.0, L=3)
    H = build_exp_model(spec)
    expected = cmath.exp(-4j * math.pi / 3)  # = -0.5 + 0.866i
    assert H.onsite[0] == pytest.approx(expected, abs=1e-15)
    assert H.onsite[0].real == pytest.approx(-0.5, abs=1e-15)
    assert H.onsite[0].imag == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


def test_exp_onsite_modulus():
    spec = ModelSpec.from_fib(Kind.EXP, 2.0, 10)
    H = build_exp_model(spec)
    assert np.abs(np.abs(H.onsite) - 2.0).max() < 1e-14


def test_exp_theta_shift_invariance():
    # theta and theta + 2*pi give the same potential; bitwise for 0.5
    base = ModelSpec.from_fib(Kind.EXP, 1.3, 9, theta=0.5)
    shifted = base.with_(theta=0.5 + 2.0 * math.pi)
    assert np.array_equal(build_exp_model(base).onsite,
                          build_exp_model(shifted).onsite)


def test_tan_known_site_value():
    # p/q = 1/4, theta = pi/4: site phases are odd multiples of pi/4, so no
    # pole is hit and site n = 4 sits at phase pi/4 exactly -> tan = 1
    spec = ModelSpec(kind=Kind.TAN, V=1.0, p=1, q=4, theta=math.pi / 4, L=4)
    H = build_tan_model(spec)
    assert H.onsite[3] == pytest.approx(1j, abs=1e-14)


def test_tan_derived_value_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    spec = ModelSpec(kind=Kind.TAN, V=0.5, p=8, q=13, theta=0.3, L=13)
    H = build_tan_model(spec)
    exact = 0.5 * mp.tan(2 * mp.pi * mp.mpf(8) / 13 + mp.mpf("0.3"))
    assert H.onsite[0].imag == pytest.approx(float(exact), rel=1e-12)


def test_tan_onsite_purely_imaginary():
    spec = ModelSpec.from_fib(Kind.TAN, 0.7, 10, theta=0.3)
    H = build_tan_model(spec)
    assert np.all(H.onsite.real == 0.0)


def test_tan_singular_phase_rejected():
    # p/q = 1/4, theta = 0: site 1 phase is exactly pi/2
    spec = ModelSpec(kind=Kind.TAN, V=1.0, p=1, q=4, theta=0.0, L=4)
    with pytest.raises(SingularPhase):
        build_tan_model(spec)


def test_hatano_h0_exactly_hermitian():
    spec = ModelSpec(kind=Kind.HATANO, L=12, h=0.0, seed=42)
    M = densify(build_hatano_nelson(spec))
    assert np.array_equal(M, M.conj().T)


def test_hatano_seed_determinism():
    spec = ModelSpec(kind=Kind.HATANO, L=64, h=0.3, seed=777)
    a = build_hatano_nelson(spec).onsite
    b = build_hatano_nelson(spec).onsite
    assert np.array_equal(a, b)
    c = build_hatano_nelson(spec.with_(seed=778)).onsite
    assert not np.array_equal(a, c)


def test_hatano_hop_product_unity():
    spec = ModelSpec(kind=Kind.HATANO, L=8, h=0.5)
    H = build_hatano_nelson(spec)
    assert H.hop_right * H.hop_left == pytest.approx(1.0, abs=1e-15)


def test_uniform_pm1_range_and_mean():
    x = uniform_pm1(123, 20000)
    assert x.min() >= -1.0 and x.max() < 1.0
    assert abs(x.mean()) < 0.02


def test_densify_open_tridiagonal():
    H = Hamiltonian(3, np.zeros(3), 1.0, 1.0, Boundary.OPEN)
    M = densify(H)
    expect = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    assert np.array_equal(M, expect)


def test_densify_periodic_corners():
    spec = ModelSpec.from_fib(Kind.EXP, 1.0, 7)
    M = densify(build_exp_model(spec))
    assert M[0, -1] != 0.0 and M[-1, 0] != 0.0
    open_M = densify(build_exp_model(spec.with_(boundary=Boundary.OPEN, L=13)))
    assert open_M[0, -1] == 0.0 and open_M[-1, 0] == 0.0


def test_densify_hatano_hop_ratio():
    spec = ModelSpec(kind=Kind.HATANO, L=10, h=1.0, seed=1)
    M = densify(build_hatano_nelson(spec))
    for n in range(9):
        assert M[n + 1, n] / M[n, n + 1] == pytest.approx(math.exp(2.0), rel=1e-14)


@pytest.mark.parametrize("L", range(3, 14))
@pytest.mark.parametrize("boundary", [Boundary.PERIODIC, Boundary.OPEN])
def test_matvec_matches_three_term_recursion(L, boundary):
    # exhaustive small-L check that densify realizes the site recursion
    rng = np.random.default_rng(L)
    spec = ModelSpec(kind=Kind.HATANO, L=L, h=0.37, seed=L, boundary=boundary)
    H = build_hatano_nelson(spec)
    M = densify(H)
    psi = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    out = M @ psi
    for n in range(L):
        up = psi[(n + 1) % L] if (boundary is Boundary.PERIODIC or n + 1 < L) else 0.0
        dn = psi[(n - 1) % L] if (boundary is Boundary.PERIODIC or n - 1 >= 0) else 0.0
        term = H.hop_left * up + H.hop_right * dn + H.onsite[n] * psi[n]
        assert out[n] == pytest.approx(term, rel=1e-12, abs=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(kind=Kind.EXP, V=1.0, p=2, q=4, L=4)  # gcd != 1
    with pytest.raises(ValueError):
        ModelSpec(kind=Kind.EXP, V=1.0, p=3, q=5, L=4)  # periodic needs L = q
    with pytest.raises(ValueError):
        ModelSpec(kind=Kind.EXP, V=-1.0, p=3, q=5, L=5)
    with pytest.raises(ValueError):
        ModelSpec(kind=Kind.EXP, V=1.0, p=3, q=5, L=8,
                  boundary=Boundary.OPEN)  # open needs L <= q
    spec = ModelSpec(kind=Kind.EXP, V=1.0, p=3, q=5, L=4, boundary=Boundary.OPEN)
    assert spec.L == 4


def test_kv_roundtrip():
    spec = ModelSpec(kind=Kind.TAN, V=0.5, p=8, q=13, theta=0.3, h=0.0,
                     L=13, boundary=Boundary.PERIODIC, seed=9)
    text = spec.to_kv()
    assert ModelSpec.from_kv(text) == spec
    with pytest.raises(ValueError):
        ModelSpec.from_kv("kind=exp\nbogus=1\n")


def test_build_model_dispatch():
    for kind in (Kind.EXP, Kind.TAN, Kind.HATANO):
        spec = ModelSpec.from_fib(kind, 0.5, 8, theta=0.3)
        H = build_model(spec)
        assert H.L == spec.L


@settings(max_examples=30)
@given(st.floats(min_value=-9.0, max_value=9.0, allow_nan=False))
def test_exp_theta_shift_close_for_generic_theta(theta):
    spec = ModelSpec(kind=Kind.EXP, V=1.0, p=3, q=5, theta=theta, L=5)
    shifted = spec.with_(theta=theta + 2.0 * math.pi)
    a = build_exp_model(spec).onsite
    b = build_exp_model(shifted).onsite
    assert np.abs(a - b).max() < 1e-12
