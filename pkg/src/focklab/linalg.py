"""Dense complex linear algebra used by the classification code.

Conventions
-----------
The SVD is returned as ``A = V @ diag(sigma) @ U`` with ``U`` itself unitary
(not ``U^*``), so ``U`` maps the input space and ``V`` the output space.
Matrices are plain ``numpy.ndarray`` of dtype ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError

#: singular values within this of 1 count as 1
UNIT_TOL = 1e-9
#: tolerance for equality of projectors and images
PROJ_TOL = 1e-8


def as_matrix(A, n: int | None = None) -> np.ndarray:
    """Coerce ``A`` to a finite square complex matrix."""
    M = np.array(A, dtype=complex)
    if M.ndim == 0 and n == 1:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise InputError(f"expected a {n}x{n} matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return M


def as_vector(b, n: int | None = None) -> np.ndarray:
    """Coerce ``b`` to a finite complex vector."""
    v = np.atleast_1d(np.array(b, dtype=complex))
    if v.ndim != 1:
        raise InputError(f"expected a vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise InputError(f"expected a vector of length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite entries")
    return v


def head(z, s: int) -> np.ndarray:
    """``z_[s]``: the first ``s`` coordinates (empty for ``s == 0``)."""
    return np.asarray(z)[..., :s]


def tail(z, s: int) -> np.ndarray:
    """``z'_[s]``: the coordinates after the first ``s`` (empty for ``s == n``)."""
    return np.asarray(z)[..., s:]


def drop(z, i: int) -> np.ndarray:
    """``z'_i``: all coordinates except the ``i``-th (0-based)."""
    z = np.asarray(z)
    return np.concatenate([z[..., :i], z[..., i + 1:]], axis=-1)


@dataclass(frozen=True)
class SvdFactors:
    V: np.ndarray
    sigma: np.ndarray
    U: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.V * self.sigma) @ self.U


def svd(A) -> SvdFactors:
    """Singular value decomposition ``A = V diag(sigma) U``.

    ``sigma`` is nonincreasing. The unitary factors are not unique; callers
    must not depend on a particular choice.
    """
    A = as_matrix(A)
    V, sigma, U = np.linalg.svd(A)
    return SvdFactors(V=V, sigma=sigma, U=U)


def operator_norm(A) -> float:
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def rank_with_tol(A, tol: float = 1e-9) -> int:
    """Number of singular values strictly above ``tol``."""
    A = as_matrix(A)
    if A.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(A, compute_uv=False) > tol))


def check_contraction(A, tol: float = UNIT_TOL) -> float:
    """Return ``||A||``, raising :class:`DomainError` if it exceeds ``1 + tol``."""
    nrm = operator_norm(A)
    if nrm > 1.0 + tol:
        raise DomainError(
            f"symbol cannot induce a bounded operator: ||A|| = {nrm:.12g} > 1")
    return nrm


def fixed_subspace(A, tol: float = UNIT_TOL) -> np.ndarray:
    """Orthonormal basis of ``{zeta : |A zeta| = |zeta|}`` as columns.

    For ``||A|| <= 1`` this set equals ``ker(I - A^*A)``, spanned by the right
    singular vectors whose singular value is 1. Returns an ``n x j`` array,
    ``j = 0`` when ``||A|| < 1``.
    """
    A = as_matrix(A)
    check_contraction(A, tol)
    f = svd(A)
    keep = f.sigma >= 1.0 - tol
    # rows of U are the right singular vectors conjugated
    return f.U[keep].conj().T


def range_projector(vectors: np.ndarray, tol: float = PROJ_TOL) -> np.ndarray:
    """Orthogonal projector onto the column span of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    n = vectors.shape[0]
    if vectors.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    Q, s, _ = np.linalg.svd(vectors, full_matrices=False)
    Q = Q[:, s > tol * max(1.0, s[0])]
    return Q @ Q.conj().T


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_contraction(n: int, rng: np.random.Generator, max_norm: float = 0.9) -> np.ndarray:
    """Random matrix with operator norm at most ``max_norm``."""
    sig = np.sort(rng.uniform(0, max_norm, n))[::-1]
    return (random_unitary(n, rng) * sig) @ random_unitary(n, rng)
