import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhlab import Kind, ModelSpec, build_exp_model, densify, eigenpairs, eigenvalues, ipr
from nhlab.errors import NoConvergence
from nhlab.eigensolver import balance, hessenberg, qr_eigvals_hessenberg


def charpoly_roots(M):
    """Independent oracle: characteristic polynomial by the Faddeev-LeVerrier
    trace recursion, roots from the companion matrix (numpy.roots)."""
    n = M.shape[0]
    coeffs = np.empty(n + 1, dtype=complex)
    coeffs[0] = 1.0
    A = np.array(M, dtype=complex)
    Ak = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        Ak = A @ Ak
        c = -np.trace(Ak) / k
        coeffs[k] = c
        Ak += c * np.eye(n)
    return np.roots(coeffs)


def hausdorff(a, b):
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def random_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)


def test_diagonal_matrix():
    w = eigenvalues(np.diag([1 + 2j, 3 + 0j])).values
    assert hausdorff(w, [1 + 2j, 3.0]) < 1e-14


def test_symmetric_swap():
    w = eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)).values
    assert hausdorff(w, [-1.0, 1.0]) < 1e-14


@pytest.mark.parametrize("seed", range(5))
def test_random_8x8_vs_charpoly_oracle(seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, 8)
    w = eigenvalues(M).values
    assert hausdorff(w, charpoly_roots(M)) < 1e-8


@pytest.mark.parametrize("n", [4, 9, 16])
def test_similarity_invariance(n):
    rng = np.random.default_rng(n)
    M = random_complex(rng, n)
    # well-conditioned random similarity: unitary factor times mild diagonal
    Z = random_complex(rng, n)
    Q, _ = np.linalg.qr(Z)
    D = np.diag(1.0 + 0.5 * rng.random(n))
    P = Q @ D
    Ms = np.linalg.solve(P, M @ P)
    w1 = eigenvalues(M).values
    w2 = eigenvalues(Ms).values
    assert hausdorff(w1, w2) < 1e-8


@pytest.mark.parametrize("n", [3, 8, 16])
def test_trace_and_determinant_identities(n):
    rng = np.random.default_rng(100 + n)
    M = random_complex(rng, n)
    w = eigenvalues(M).values
    frob = math.sqrt(float((np.abs(M) ** 2).sum()))
    assert abs(w.sum() - np.trace(M)) <= 1e-8 * n * frob
    det = np.linalg.det(M)  # LU-based library oracle
    assert abs(np.prod(w) - det) <= 1e-6 * abs(det)


def test_jordan_like_pair_has_small_residuals():
    M = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-4]], dtype=complex)
    sp = eigenpairs(M)
    assert hausdorff(sp.values, [1.0, 1.0 + 1e-4]) < 1e-12
    assert sp.residuals.max() <= 1e-8
    assert not sp.defective.any()


def test_diagonal_eigenvectors_standard_basis():
    sp = eigenpairs(np.diag([5.0 + 0j, 7j]))
    for col in range(2):
        v = np.abs(sp.vectors[:, col])
        assert v.max() == pytest.approx(1.0, abs=1e-12)
        # phase fix: the dominant component is real positive
        k = int(np.argmax(v))
        assert sp.vectors[k, col].imag == pytest.approx(0.0, abs=1e-12)
        assert sp.vectors[k, col].real > 0


def test_eigenpair_contract_random():
    rng = np.random.default_rng(11)
    M = random_complex(rng, 30)
    sp = eigenpairs(M)
    norms = np.sqrt((np.abs(sp.vectors) ** 2).sum(axis=0))
    assert np.abs(norms - 1.0).max() < 1e-12
    assert sp.residuals.max() <= 1e-8
    assert len(sp.values) == 30
    assert hausdorff(sp.values, charpoly_roots(M)) < 1e-7


def test_select_subset_of_vectors():
    rng = np.random.default_rng(5)
    M = random_complex(rng, 12)
    full = eigenpairs(M)
    part = eigenpairs(M, select=[3, 7])
    assert part.vectors.shape == (12, 2)
    assert list(part.vector_indices) == [3, 7]
    for col, j in enumerate((3, 7)):
        # same eigenvalue ordering; vectors agree up to the fixed phase
        assert abs(part.values[j] - full.values[j]) == 0.0
        assert np.abs(part.vectors[:, col] - full.vectors[:, j]).max() < 1e-9


def test_localized_state_ipr():
    spec = ModelSpec.from_fib(Kind.EXP, 3.0, 11)
    M = densify(build_exp_model(spec))
    sp = eigenvalues(M)
    j = int(np.argmin(np.abs(sp.values - (3.0 + 1.0 / 3.0))))
    pair = eigenpairs(M, select=[j])
    assert ipr(pair.vectors[:, 0]) >= 0.1


def test_no_convergence_budget():
    rng = np.random.default_rng(0)
    M = random_complex(rng, 8)
    with pytest.raises(NoConvergence):
        eigenvalues(M, max_sweeps=1)


def test_balance_is_similarity():
    rng = np.random.default_rng(3)
    M = random_complex(rng, 7)
    M[0, :] *= 1e6
    M[:, 3] *= 1e-5
    A, d = balance(M)
    back = np.diag(d) @ A @ np.diag(1.0 / d)
    assert np.abs(back - M).max() / np.abs(M).max() < 1e-14


def test_hessenberg_structure_and_similarity():
    rng = np.random.default_rng(4)
    M = random_complex(rng, 10)
    H, Q = hessenberg(M, want_q=True)
    assert np.abs(np.tril(H, -2)).max() == 0.0
    assert np.abs(Q @ H @ Q.conj().T - M).max() < 1e-12
    assert np.abs(Q @ Q.conj().T - np.eye(10)).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=10 ** 6))
def test_triangular_eigenvalues_are_diagonal(n, seed):
    rng = np.random.default_rng(seed)
    M = np.triu(random_complex(rng, n))
    w = eigenvalues(M).values
    assert hausdorff(w, np.diag(M)) < 1e-10


def test_qr_on_hessenberg_direct():
    rng = np.random.default_rng(9)
    M = random_complex(rng, 15)
    H, _ = hessenberg(M)
    w = qr_eigvals_hessenberg(H)
    assert hausdorff(w, charpoly_roots(M)) < 1e-8


def test_deterministic_output():
    rng = np.random.default_rng(21)
    M = random_complex(rng, 14)
    w1 = eigenvalues(M).values
    w2 = eigenvalues(M.copy()).values
    assert np.array_equal(w1, w2)
