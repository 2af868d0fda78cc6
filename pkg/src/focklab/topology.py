"""Path components of spaces of (weighted) composition operators.

For ``p <= q`` the components of the composition operators are indexed by the
class ``[A]`` of the relation

    A ~ D  iff  A xi = D xi  for every xi with |A xi| = |xi| or |D xi| = |xi|,

and those of the weighted operators by ``([A], [b])``, where ``b1 ~ b2`` by
``[A]`` iff their projections onto ``A(S_A)`` agree. For ``q < p`` both spaces
are path connected.

Everything here works with fixed subspaces and projectors directly, so no
answer depends on the (non-unique) unitary factors of an SVD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnboundedError
from .linalg import (PROJ_TOL, UNIT_TOL, as_matrix, as_vector, check_contraction,
                     fixed_subspace, operator_norm, range_projector, svd)
from .operators import (AffineMap, Regime, WeightedSymbol, _regime, as_weighted,
                        classify_composition, complex_to_json)


def _as_map(phi) -> AffineMap:
    if isinstance(phi, WeightedSymbol):
        return phi.phi
    return phi if isinstance(phi, AffineMap) else AffineMap(phi)


def matrices_equivalent(A, D, tol: float = UNIT_TOL, eq_tol: float = PROJ_TOL) -> bool:
    """``A ~ D``: ``A`` and ``D`` agree on ``S_A + S_D`` (checked on bases)."""
    A, D = as_matrix(A), as_matrix(D, as_matrix(A).shape[0])
    S = np.hstack([fixed_subspace(A, tol), fixed_subspace(D, tol)])
    if S.shape[1] == 0:
        return True
    return bool(np.max(np.linalg.norm((A - D) @ S, axis=0)) <= eq_tol)


@dataclass(frozen=True, eq=False)
class ComponentKey:
    """Descriptor of ``[A]`` (and ``[b]`` when ``b`` is given).

    ``P`` projects onto ``A(S_A)``; ``action`` is ``A`` restricted to
    ``S_A``, written in the bases ``S_basis`` and ``Q^* A S_basis``.
    """
    j: int
    S_basis: np.ndarray
    P: np.ndarray
    action: np.ndarray
    b_proj: np.ndarray | None = None

    def same_class(self, other: "ComponentKey", tol: float = PROJ_TOL) -> bool:
        """Same ``j`` and same image projector; necessary for ``A ~ D``."""
        return self.j == other.j and bool(np.max(np.abs(self.P - other.P), initial=0) <= tol)

    def to_json(self) -> dict:
        return {"j": self.j, "P": complex_to_json(self.P),
                "b_proj": None if self.b_proj is None else complex_to_json(self.b_proj)}


def component_key(A, b=None, tol: float = UNIT_TOL) -> ComponentKey:
    A = as_matrix(A)
    S = fixed_subspace(A, tol)
    AS = A @ S
    P = range_projector(AS)
    action = AS.conj().T @ AS if S.shape[1] else np.zeros((0, 0), dtype=complex)
    # AS has orthonormal columns (A is isometric on S), so Q = AS and Q^* A S = AS^* AS
    b_proj = None if b is None else P @ as_vector(b, A.shape[0])
    return ComponentKey(S.shape[1], S, P, action, b_proj)


def b_equivalent(A, b1, b2, tol: float = PROJ_TOL, unit_tol: float = UNIT_TOL) -> bool:
    """``b1 ~ b2`` by the class ``[A]``: ``|P (b1 - b2)| <= tol (1 + |b1| + |b2|)``."""
    A = as_matrix(A)
    b1, b2 = as_vector(b1, A.shape[0]), as_vector(b2, A.shape[0])
    P = component_key(A, tol=unit_tol).P
    gap = np.linalg.norm(P @ (b1 - b2))
    return bool(gap <= tol * (1 + np.linalg.norm(b1) + np.linalg.norm(b2)))


def _require_bounded(phi, p, q, tol):
    v = classify_composition(phi, p, q, tol)
    if not v.bounded:
        raise UnboundedError(f"C_phi is unbounded from F^{p} to F^{q}: {v.reason}")
    return v


def same_component_composition(phi1, phi2, p, q, tol: float = UNIT_TOL) -> bool:
    """Whether ``C_phi1`` and ``C_phi2`` lie in one path component."""
    phi1, phi2 = _as_map(phi1), _as_map(phi2)
    _require_bounded(phi1, p, q, tol)
    _require_bounded(phi2, p, q, tol)
    if _regime(p, q) is Regime.Q_LT_P:
        return True
    return matrices_equivalent(phi1.A, phi2.A, tol)


def same_component_weighted(w1, w2, p, q, assume_bounded: bool = False,
                            tol: float = UNIT_TOL) -> bool:
    """Whether ``W_{psi1, phi1}`` and ``W_{psi2, phi2}`` lie in one path component.

    Boundedness of weighted operators is not decided here; the caller must
    assert it with ``assume_bounded=True``.
    """
    if not assume_bounded:
        raise DomainError("boundedness of weighted operators must be asserted (assume_bounded=True)")
    w1, w2 = as_weighted(w1), as_weighted(w2)
    for w in (w1, w2):
        nrm = check_contraction(w.phi.A, tol)
        if _regime(p, q) is Regime.Q_LT_P and nrm >= 1.0 - tol:
            raise UnboundedError("a weighted operator with ||A|| = 1 is unbounded for q < p")
    if _regime(p, q) is Regime.Q_LT_P:
        return True
    if not matrices_equivalent(w1.phi.A, w2.phi.A, tol):
        return False
    return b_equivalent(w1.phi.A, w1.phi.b, w2.phi.b, unit_tol=tol)


def is_isolated(phi, p, q, tol: float = UNIT_TOL) -> bool:
    """Whether ``C_phi`` is an isolated point (``A`` unitary, ``p <= q``)."""
    phi = _as_map(phi)
    _require_bounded(phi, p, q, tol)
    if _regime(p, q) is Regime.Q_LT_P:
        return False
    return bool(np.min(np.linalg.svd(phi.A, compute_uv=False)) >= 1.0 - tol)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """``A = V (I_j + G) U`` with ``||G|| < 1`` (direct sum of blocks)."""
    V: np.ndarray
    U: np.ndarray
    j: int
    G: np.ndarray

    def block(self) -> np.ndarray:
        n = self.V.shape[0]
        B = np.zeros((n, n), dtype=complex)
        B[:self.j, :self.j] = np.eye(self.j)
        B[self.j:, self.j:] = self.G
        return B

    def matrix(self) -> np.ndarray:
        return self.V @ self.block() @ self.U


def canonical_form(A, tol: float = UNIT_TOL) -> CanonicalForm:
    A = as_matrix(A)
    check_contraction(A, tol)
    f = svd(A)
    j = int(np.sum(f.sigma >= 1.0 - tol))
    return CanonicalForm(f.V, f.U, j, np.diag(f.sigma[j:]).astype(complex))


def block_in_frame(D, V, U, j: int, tol: float = PROJ_TOL, unit_tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``H`` with ``D = V (I_j + H) U``, or raise if ``D`` is not of that form."""
    D = as_matrix(D)
    B = V.conj().T @ D @ U.conj().T
    err = max(np.max(np.abs(B[:j, :j] - np.eye(j)), initial=0),
              np.max(np.abs(B[:j, j:]), initial=0), np.max(np.abs(B[j:, :j]), initial=0))
    H = B[j:, j:]
    if err > tol or (H.size and operator_norm(H) >= 1.0 - unit_tol):
        raise DomainError(f"matrix does not decompose in the frame (V, I_{j} + G, U)")
    return H
