import numpy as np
import pytest
from hypothesis import given, strategies as st

from focklab.errors import DomainError, InputError
from focklab.linalg import (as_matrix, drop, fixed_subspace, head, operator_norm, random_contraction,
                            random_unitary, rank_with_tol, svd, tail)


def test_svd_zero_matrix():
    f = svd(np.zeros((2, 2)))
    np.testing.assert_allclose(f.sigma, [0, 0])
    np.testing.assert_allclose(f.reconstruct(), 0)


def test_svd_unitary_has_unit_singular_values(rng):
    f = svd(random_unitary(3, rng))
    np.testing.assert_allclose(f.sigma, 1, atol=1e-12)


def test_svd_diag_sorted_against_characteristic_polynomial():
    A = np.diag([0.5, 1.0])
    f = svd(A)
    # eigenvalues of A*A from the 2x2 characteristic polynomial
    M = A.conj().T @ A
    tr, det = np.trace(M).real, np.linalg.det(M).real
    disc = np.sqrt(tr ** 2 / 4 - det)
    np.testing.assert_allclose(f.sigma, np.sqrt([tr / 2 + disc, tr / 2 - disc]))
    np.testing.assert_allclose(f.reconstruct(), A, atol=1e-14)


def test_svd_rejects_nonfinite():
    with pytest.raises(InputError):
        svd(np.array([[np.nan, 0], [0, 1]]))


def test_operator_norm_examples():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0)
    assert operator_norm(np.diag([0.3, 0.7])) == pytest.approx(0.7)
    N = np.array([[0, 1], [0, 0]])
    assert operator_norm(N) == pytest.approx(np.sqrt(np.linalg.eigvalsh(N.T @ N).max()))


def test_fixed_subspace_examples():
    assert fixed_subspace(np.eye(2)).shape == (2, 2)
    S = fixed_subspace(np.diag([1, 0.5]))
    assert S.shape == (2, 1)
    assert abs(abs(S[0, 0]) - 1) < 1e-12
    assert fixed_subspace(0.9 * np.eye(3)).shape == (3, 0)


def test_fixed_subspace_rejects_expanding_matrix():
    with pytest.raises(DomainError, match="bounded operator"):
        fixed_subspace(np.diag([1.1, 0.2]))


def test_rank_examples(rng):
    assert rank_with_tol(np.zeros((2, 2))) == 0
    assert rank_with_tol(random_unitary(3, rng)) == 3
    assert rank_with_tol(np.diag([1, 1e-14]), 1e-9) == 1


def test_slicing_helpers():
    z = np.array([1, 2, 3, 4])
    np.testing.assert_array_equal(head(z, 2), [1, 2])
    np.testing.assert_array_equal(tail(z, 2), [3, 4])
    np.testing.assert_array_equal(drop(z, 1), [1, 3, 4])


def test_as_matrix_checks_shape():
    with pytest.raises(InputError):
        as_matrix(np.ones((2, 3)))


@st.composite
def matrices(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    scale = draw(st.floats(1e-3, 1e3))
    rng = np.random.default_rng(seed)
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


@given(matrices())
def test_svd_round_trip(A):
    f = svd(A)
    assert np.linalg.norm(f.reconstruct() - A) <= 1e-10 * max(1, np.linalg.norm(A))
    assert np.all(np.diff(f.sigma) <= 1e-12 * max(1, f.sigma[0]))
    n = A.shape[0]
    np.testing.assert_allclose(f.V.conj().T @ f.V, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(f.U @ f.U.conj().T, np.eye(n), atol=1e-10)
    # Hermitian eigensolver as an independent oracle for sigma
    ev = np.sort(np.linalg.eigvalsh(A.conj().T @ A))[::-1]
    np.testing.assert_allclose(f.sigma ** 2, np.clip(ev, 0, None), atol=1e-9 * max(1, ev[0]))


@st.composite
def contractions_with_fixed_part(draw):
    n = draw(st.integers(1, 6))
    j = draw(st.integers(0, n))
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    sig = np.concatenate([np.ones(j), rng.uniform(0, 0.95, n - j)])
    return random_unitary(n, rng) @ np.diag(sig) @ random_unitary(n, rng), j


@given(contractions_with_fixed_part())
def test_fixed_subspace_properties(data):
    A, j = data
    tol = 1e-9
    S = fixed_subspace(A, tol)
    assert S.shape[1] == j == int(np.sum(svd(A).sigma >= 1 - tol))
    for k in range(S.shape[1]):
        z = S[:, k]
        assert abs(np.linalg.norm(A @ z) - np.linalg.norm(z)) <= 10 * tol
    np.testing.assert_allclose(S.conj().T @ S, np.eye(j), atol=1e-10)


def test_random_contraction_norm(rng):
    assert operator_norm(random_contraction(4, rng, 0.7)) <= 0.7 + 1e-12
