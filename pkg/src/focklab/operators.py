"""Affine symbols, weighted composition operators and their classification.

``W_{psi, phi} f = psi * (f o phi)`` with ``phi(z) = A z + b``. Composition
operators are the case ``psi = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln, logsumexp

from . import quadrature as quad
from .errors import DomainError, InputError, NotBoundedCompatibleError
from .fock import (NormEstimate, NormMethod, SymbolFn, compose_affine, evaluate, fock_norm,
                   kernel, log_abs, multiply, pad_head, partial_derivative, slice_head)
from .linalg import (PROJ_TOL, UNIT_TOL, as_matrix, as_vector, check_contraction,
                     fixed_subspace, operator_norm, range_projector, svd)


def complex_to_json(x):
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        return [float(x.real), float(x.imag)]
    return [complex_to_json(v) for v in x]


def complex_from_json(data) -> np.ndarray:
    """Inverse of :func:`complex_to_json`; leaves of the nested list are ``[re, im]``."""
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1:] != (2,):
        raise InputError("complex numbers must be encoded as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``phi(z) = A z + b``."""
    A: np.ndarray
    b: np.ndarray = None

    def __post_init__(self):
        A = as_matrix(self.A)
        b = np.zeros(A.shape[0], dtype=complex) if self.b is None else as_vector(self.b, A.shape[0])
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z @ self.A.T + self.b

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n))

    @classmethod
    def constant(cls, b) -> "AffineMap":
        b = as_vector(b)
        return cls(np.zeros((len(b), len(b))), b)

    def equals(self, other: "AffineMap", tol: float = 0.0) -> bool:
        return (self.n == other.n and np.max(np.abs(self.A - other.A), initial=0) <= tol
                and np.max(np.abs(self.b - other.b), initial=0) <= tol)

    def to_json(self) -> dict:
        return {"A": complex_to_json(self.A), "b": complex_to_json(self.b)}

    @classmethod
    def from_json(cls, data) -> "AffineMap":
        return cls(complex_from_json(data["A"]), complex_from_json(data["b"]))


@dataclass(frozen=True, eq=False)
class WeightedSymbol:
    """The pair ``(psi, phi)`` defining ``W_{psi, phi}``."""
    psi: SymbolFn
    phi: AffineMap

    def __post_init__(self):
        if not isinstance(self.phi, AffineMap):
            object.__setattr__(self, "phi", AffineMap(*self.phi))
        if self.psi.is_zero:
            raise InputError("weight psi must be a nonzero function")
        if self.psi.n != self.phi.n:
            raise InputError(f"weight lives on C^{self.psi.n} but symbol on C^{self.phi.n}")

    @property
    def n(self) -> int:
        return self.phi.n

    @property
    def is_composition(self) -> bool:
        return self.psi.equals(SymbolFn.constant(self.n), rtol=0, atol=0)

    def equals(self, other: "WeightedSymbol", tol: float = 1e-12) -> bool:
        return self.phi.equals(other.phi, tol) and self.psi.equals(other.psi, rtol=tol, atol=tol)

    def to_json(self) -> dict:
        return {"psi": self.psi.to_json(), **self.phi.to_json()}

    @classmethod
    def from_json(cls, data) -> "WeightedSymbol":
        phi = AffineMap.from_json(data)
        psi = SymbolFn.from_json(phi.n, data["psi"]) if "psi" in data else SymbolFn.constant(phi.n)
        return cls(psi, phi)


def composition(phi) -> WeightedSymbol:
    """``C_phi`` as the weighted symbol ``(1, phi)``."""
    if not isinstance(phi, AffineMap):
        phi = AffineMap(*phi) if isinstance(phi, tuple) else AffineMap(phi)
    return WeightedSymbol(SymbolFn.constant(phi.n), phi)


def as_weighted(x) -> WeightedSymbol:
    return x if isinstance(x, WeightedSymbol) else composition(x)


def apply(w: WeightedSymbol, f: SymbolFn) -> SymbolFn:
    """``W_{psi, phi} f = psi * (f o phi)``, exact in the function class."""
    if f.n != w.n:
        raise InputError(f"function on C^{f.n} but operator on C^{w.n}")
    return multiply(w.psi, compose_affine(f, w.phi.A, w.phi.b))


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True, eq=False)
class Normalization:
    """SVD normal form: ``A = V diag(a) U``, ``b~ = V^* b``, ``psi~(z) = psi(U^* z)``."""
    U: np.ndarray
    V: np.ndarray
    a: np.ndarray
    b_tilde: np.ndarray
    psi_tilde: SymbolFn
    s: int
    j: int
    tol: float

    @property
    def A_tilde(self) -> np.ndarray:
        return np.diag(self.a).astype(complex)

    @property
    def symbol(self) -> WeightedSymbol:
        """``(psi~, phi~)`` with ``phi~(z) = A~ z + b~``."""
        return WeightedSymbol(self.psi_tilde, AffineMap(self.A_tilde, self.b_tilde))

    def to_json(self) -> dict:
        return {"U": complex_to_json(self.U), "V": complex_to_json(self.V),
                "a": [float(x) for x in self.a], "b_tilde": complex_to_json(self.b_tilde),
                "psi_tilde": self.psi_tilde.to_json(), "s": self.s, "j": self.j, "tol": self.tol}


def normalize(w, tol: float = UNIT_TOL) -> Normalization:
    """Normal form of a weighted symbol (or affine map) from the SVD of ``A``."""
    w = as_weighted(w)
    check_contraction(w.phi.A, tol)
    f = svd(w.phi.A)
    a = f.sigma.copy()
    s = int(np.sum(a > tol))
    j = int(np.sum(a >= 1.0 - tol))
    psi_t = compose_affine(w.psi, f.U.conj().T)
    return Normalization(U=f.U, V=f.V, a=a, b_tilde=f.V.conj().T @ w.phi.b,
                         psi_tilde=psi_t, s=s, j=j, tol=tol)


def conjugated_apply(nz: Normalization, f: SymbolFn) -> SymbolFn:
    """``C_U W_{psi~, phi~} C_V f``, which must equal ``W_{psi, phi} f``."""
    g = compose_affine(f, nz.V)
    g = apply(nz.symbol, g)
    return compose_affine(g, nz.U)


# ---------------------------------------------------------------------------
# composition operators


class VerdictKind(str, Enum):
    UNBOUNDED = "Unbounded"
    BOUNDED_NOT_COMPACT = "BoundedNotCompact"
    COMPACT = "Compact"


class Regime(str, Enum):
    P_LE_Q = "p<=q"
    Q_LT_P = "q<p"


@dataclass(frozen=True)
class Verdict:
    """Classification of ``C_phi : F^p -> F^q``.

    ``margin`` is the distance of the deciding quantity from its threshold:
    ``1 - ||A||`` for compact verdicts, ``||A|| - (1 - tol)`` when ``||A|| = 1``
    decides unboundedness, ``||A|| - 1`` when ``||A|| > 1``, and for the
    projection test ``| |P b| - tol_b |`` where ``tol_b = proj_tol (1 + |b|)``.
    """
    kind: VerdictKind
    regime: Regime
    margin: float
    tol: float
    proj_tol: float
    norm_A: float
    proj_b: float | None = None
    reason: str = ""

    @property
    def bounded(self) -> bool:
        return self.kind is not VerdictKind.UNBOUNDED

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "regime": self.regime.value, "margin": self.margin,
                "tol": self.tol, "proj_tol": self.proj_tol, "norm_A": self.norm_A,
                "proj_b": self.proj_b, "reason": self.reason}


def _regime(p, q) -> Regime:
    p, q = float(p), float(q)
    if not (p > 0 and q > 0 and np.isfinite(p) and np.isfinite(q)):
        raise InputError(f"exponents must be positive and finite, got p={p}, q={q}")
    return Regime.P_LE_Q if p <= q else Regime.Q_LT_P


def fixed_image_projector(A, tol: float = UNIT_TOL) -> np.ndarray:
    """Orthogonal projector onto ``A(S_A)``, ``S_A`` the fixed subspace of ``A``."""
    A = as_matrix(A)
    S = fixed_subspace(A, tol)
    return range_projector(A @ S)


def classify_composition(phi, p, q, tol: float = UNIT_TOL, proj_tol: float = PROJ_TOL) -> Verdict:
    """Boundedness and compactness of ``C_phi : F^p(C^n) -> F^q(C^n)``."""
    phi = phi.phi if isinstance(phi, WeightedSymbol) else phi
    regime = _regime(p, q)
    nrm = operator_norm(phi.A)
    if nrm > 1.0 + tol:
        return Verdict(VerdictKind.UNBOUNDED, regime, nrm - 1.0, tol, proj_tol, nrm,
                       reason="||A|| > 1")
    if nrm < 1.0 - tol:
        return Verdict(VerdictKind.COMPACT, regime, 1.0 - nrm, tol, proj_tol, nrm,
                       reason="||A|| < 1")
    if regime is Regime.Q_LT_P:
        return Verdict(VerdictKind.UNBOUNDED, regime, nrm - (1.0 - tol), tol, proj_tol, nrm,
                       reason="||A|| = 1 and q < p")
    P = fixed_image_projector(phi.A, tol)
    pb = float(np.linalg.norm(P @ phi.b))
    thr = proj_tol * (1.0 + float(np.linalg.norm(phi.b)))
    if pb <= thr:
        return Verdict(VerdictKind.BOUNDED_NOT_COMPACT, regime, thr - pb, tol, proj_tol, nrm, pb,
                       reason="||A|| = 1 and b orthogonal to A(S_A)")
    return Verdict(VerdictKind.UNBOUNDED, regime, pb - thr, tol, proj_tol, nrm, pb,
                   reason="||A|| = 1 and <A zeta, b> != 0 for some fixed zeta")


# ---------------------------------------------------------------------------
# the m and l quantities


def log_m_quantity(w: WeightedSymbol, z) -> np.ndarray:
    """``log m_z = log|psi(z)| + (|phi(z)|^2 - |z|^2) / 2`` at points ``z`` (N, n)."""
    Z = np.atleast_2d(np.asarray(z, dtype=complex))
    Phi = w.phi(Z)
    return log_abs(w.psi, Z) + (np.sum(np.abs(Phi) ** 2, axis=1) - np.sum(np.abs(Z) ** 2, axis=1)) / 2


def m_quantity(w: WeightedSymbol, z) -> float:
    """``m_z(psi, phi) = |psi(z)| exp((|phi(z)|^2 - |z|^2) / 2)``."""
    with np.errstate(over="ignore"):
        return float(np.exp(log_m_quantity(w, as_vector(z, w.n))[0]))


@dataclass(frozen=True)
class SupEstimate:
    """Heuristic supremum: ``value`` is the best found, ``diverging`` flags growth at the search boundary."""
    value: float
    log_value: float
    diverging: bool
    argmax: list
    by_radius: dict = field(default_factory=dict)
    heuristic: bool = True

    def to_json(self) -> dict:
        return {"value": self.value, "log_value": self.log_value, "diverging": self.diverging,
                "argmax": self.argmax, "by_radius": self.by_radius, "heuristic": True}


M_SUP_RADII = (2.0, 4.0, 8.0, 16.0)
LOG_FLOOR = -1e6


def m_sup_estimate(w: WeightedSymbol, starts: int = 32, seed: int = 0,
                   radii=M_SUP_RADII) -> SupEstimate:
    """Multi-start ascent of ``log m_z`` over boxes of growing radius.

    ``starts`` are split evenly over the radii. The diverging flag is set when
    the best point of the largest box lies on its boundary and the value still
    grew from the previous radius.
    """
    n = w.n
    grads = [partial_derivative(w.psi, i) for i in range(n)]
    AhA = w.phi.A.conj().T @ w.phi.A
    Ahb = w.phi.A.conj().T @ w.phi.b

    def unpack(x):
        return x[:n] + 1j * x[n:]

    def negf(x):
        z = unpack(x)
        v = float(log_m_quantity(w, z)[0])
        v = max(v, LOG_FLOOR)
        psi = evaluate(w.psi, z)
        g = AhA @ z + Ahb - z
        if psi != 0:
            r = np.array([evaluate(d, z) for d in grads]) / psi
            g = g + np.conj(r)
        return -v, -np.concatenate([g.real, g.imag])

    rng = np.random.default_rng(seed)
    per = max(1, starts // len(radii))
    best = (-np.inf, np.zeros(2 * n))
    by_radius = {}
    for R in radii:
        bounds = [(-R, R)] * (2 * n)
        x0s = rng.uniform(-R, R, (per, 2 * n))
        x0s[0] = np.clip(best[1], -R, R)
        rbest = (-np.inf, None)
        for x0 in x0s:
            with np.errstate(all="ignore"):
                res = minimize(negf, x0, jac=True, method="L-BFGS-B", bounds=bounds)
            if -res.fun > rbest[0]:
                rbest = (-float(res.fun), res.x)
        by_radius[R] = rbest[0]
        if rbest[0] >= best[0]:
            best = rbest
    on_edge = bool(np.any(np.abs(best[1]) >= radii[-1] * (1 - 1e-6)))
    grew = by_radius[radii[-1]] > by_radius[radii[-2]] + 1e-6 * (1 + abs(by_radius[radii[-2]]))
    with np.errstate(over="ignore"):
        value = float(np.exp(best[0]))
    return SupEstimate(value, best[0], on_edge and grew,
                       complex_to_json(unpack(best[1])), {str(k): v for k, v in by_radius.items()})


def _require_diagonal_normal(w: WeightedSymbol) -> tuple[np.ndarray, int]:
    A = w.phi.A
    if np.max(np.abs(A - np.diag(np.diag(A))), initial=0) > 1e-12:
        raise DomainError("symbol is not in normalized diagonal form; call normalize first")
    a = np.diag(A)
    if np.any(np.abs(a.imag) > 1e-12) or np.any(a.real < -1e-12) or np.any(np.diff(a.real) > 1e-12):
        raise DomainError("diagonal of A must be nonnegative and nonincreasing")
    a = a.real
    return a, int(np.sum(a > UNIT_TOL))


def _ell_log_factor(a, b, zs):
    """``(|phi(z)|^2 - |z_[s]|^2) / 2`` for normalized phi; ``zs`` is (N, s)."""
    s = zs.shape[1]
    head = np.abs(zs * a[:s] + b[:s]) ** 2
    return (np.sum(head, axis=1) + np.sum(np.abs(b[s:]) ** 2) - np.sum(np.abs(zs) ** 2, axis=1)) / 2


def ell_quantity(w: WeightedSymbol, z_slice, q, budget: int | None = None,
                 seed: int = 0) -> NormEstimate:
    """``l_{z_[s]} = exp((|phi(z)|^2 - |z_[s]|^2)/2) ||psi(z_[s], .)||_{n-s, q}``.

    ``w`` must already be in normalized form (diagonal, nonnegative,
    nonincreasing ``A``). For ``s = n`` the slice norm is ``|psi(z)|``.
    Heuristic quantity; it is not used to certify anything.
    """
    a, s = _require_diagonal_normal(w)
    if s == 0:
        raise DomainError("l is undefined for rank 0 (constant maps); use m_quantity")
    zs = as_vector(z_slice, s)
    lf = float(_ell_log_factor(a, w.phi.b, zs[None, :])[0])
    if s == w.n:
        val = math.exp(lf) * abs(evaluate(w.psi, zs))
        return NormEstimate(val, 0.0, NormMethod.EXACT_GRAM, 0)
    sl = slice_head(w.psi, zs)
    est = fock_norm(sl, q, budget=budget, seed=seed)
    return NormEstimate(math.exp(lf) * est.value, math.exp(lf) * est.abs_error, est.method,
                        est.samples_or_nodes, est.seed)


ELL_SHELLS = (0.0, 2.0, 4.0, 8.0, 16.0)


def ell_integrability_estimate(w: WeightedSymbol, p, q, budget: int = 256,
                               seed: int = 0) -> SupEstimate:
    """Heuristic check that ``l`` lies in ``L^{pq/(p-q)}(C^s)`` for ``q < p``.

    Integrates ``l^r`` over shells ``R_k <= |z_[s]| < R_{k+1}`` by uniform
    Monte Carlo and flags divergence when the outermost shell carries more than
    1% of the total. ``value`` is the truncated integral.
    """
    p, q = float(p), float(q)
    if not q < p:
        raise InputError("integrability of l is the q < p criterion")
    a, s = _require_diagonal_normal(w)
    if s == 0:
        raise DomainError("l is undefined for rank 0 (constant maps); use m_quantity")
    r = p * q / (p - q)
    rng = np.random.default_rng(seed)
    shell_logs = []
    for R0, R1 in zip(ELL_SHELLS[:-1], ELL_SHELLS[1:]):
        d = 2 * s
        u = rng.uniform(size=budget)
        rad = (u * (R1 ** d - R0 ** d) + R0 ** d) ** (1 / d)
        g = quad.complex_normal(rng, (budget, s))
        zs = g / np.linalg.norm(g, axis=1, keepdims=True) * rad[:, None]
        lf = _ell_log_factor(a, w.phi.b, zs)
        if s == w.n:
            ln = log_abs(w.psi, zs)
        else:
            ln = np.array([math.log(max(fock_norm(slice_head(w.psi, z), q, seed=seed).value, 1e-300))
                           for z in zs])
        log_vol = s * math.log(math.pi) - gammaln(s + 1) + math.log(R1 ** d - R0 ** d)
        shell_logs.append(float(logsumexp(r * (lf + ln)) - math.log(budget) + log_vol))
    total = float(logsumexp(shell_logs))
    diverging = shell_logs[-1] - total > math.log(0.01)
    with np.errstate(over="ignore"):
        value = float(np.exp(total))
    return SupEstimate(value, total, bool(diverging), [],
                       {f"{a_}-{b_}": v for a_, b_, v in zip(ELL_SHELLS[:-1], ELL_SHELLS[1:], shell_logs)})


# ---------------------------------------------------------------------------
# factorization of the weight when ||A|| = 1


@dataclass(frozen=True, eq=False)
class PsiStar:
    """``psi~(z) = exp(-<z_[j], b~_[j]>) psi_*(z'_[j])``.

    ``psi_star`` is stored as a function on all of ``C^n`` that does not depend
    on the first ``j`` coordinates; :meth:`at` evaluates it on ``C^{n-j}``.
    """
    j: int
    b_head: np.ndarray
    psi_star: SymbolFn
    residual: float
    normalization: Normalization

    def at(self, z_tail) -> complex:
        z_tail = np.atleast_1d(np.asarray(z_tail, dtype=complex))
        z = np.concatenate([np.zeros(self.j, dtype=complex), z_tail])
        return evaluate(self.psi_star, z)


INDEPENDENCE_TOL = 1e-9


def factor_weight(psi_tilde: SymbolFn, b_head, seed: int = 0) -> tuple[SymbolFn, float]:
    """Return ``psi_*`` (as a function on ``C^n`` ignoring ``z_[j]``) and the check residual.

    ``g = psi~ * K_{(b_head, 0)}`` must not depend on ``z_[j]``, ``j = len(b_head)``:
    at 5 random tails with 20 random heads each, the relative variation of
    ``g`` must stay below ``1e-9``, else :class:`NotBoundedCompatibleError`.
    """
    n = psi_tilde.n
    b_head = np.atleast_1d(np.asarray(b_head, dtype=complex))
    j = len(b_head)
    g = multiply(psi_tilde, kernel(np.concatenate([b_head, np.zeros(n - j)])))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        tail = quad.complex_normal(rng, n - j)
        heads = quad.complex_normal(rng, (20, j))
        Z = np.hstack([heads, np.broadcast_to(tail, (20, n - j))])
        vals = evaluate(g, Z)
        ref = evaluate(g, np.concatenate([np.zeros(j), tail]))
        scale = max(abs(ref), float(np.max(np.abs(vals))), 1e-300)
        worst = max(worst, float(np.max(np.abs(vals - ref))) / scale)
    if worst >= INDEPENDENCE_TOL:
        raise NotBoundedCompatibleError(
            f"weight does not factor as exp(-<z_[j], b_[j]>) psi_*(z'_[j]) "
            f"(relative variation {worst:.3g}); m(psi, phi) is infinite")
    if j == n:
        star = SymbolFn.constant(n, evaluate(g, np.zeros(n)))
    else:
        star = pad_head(slice_head(g, np.zeros(j)), j)
    return star, worst


def extract_psi_star(w, tol: float = UNIT_TOL, seed: int = 0) -> PsiStar:
    """Split off ``psi_*`` after verifying the factorization numerically.

    Raises :class:`NotBoundedCompatibleError` when ``psi~ exp(<z_[j], b~_[j]>)``
    depends on ``z_[j]`` (see :func:`factor_weight`), or when ``psi = 1`` and
    ``b~_[j] != 0``.
    """
    w = as_weighted(w)
    nz = normalize(w, tol)
    j = nz.j
    if j < 1:
        raise DomainError("factorization needs ||A|| = 1 (j >= 1)")
    b_head = nz.b_tilde[:j].copy()
    if w.is_composition and np.linalg.norm(b_head) > INDEPENDENCE_TOL:
        raise NotBoundedCompatibleError(
            f"psi = 1 requires b~_[j] = 0, got |b~_[j]| = {np.linalg.norm(b_head):.3g}")
    star, worst = factor_weight(nz.psi_tilde, b_head, seed)
    return PsiStar(j, b_head, star, worst, nz)


# ---------------------------------------------------------------------------
# analytic operator norm upper bound


def weighted_norm_upper_bound(w, p, q, tol: float = UNIT_TOL, budget: int | None = None,
                              seed: int = 0) -> NormEstimate:
    """Upper bound ``N >= ||W_{psi, phi}||_{F^p -> F^q}``.

    With ``G~`` the singular values of ``A`` below 1 and ``psi_*`` the
    factor of the weight,

        N^q = e^{q|b~_[j]|^2/2} (q/p)^j (q/2pi)^{n-j}
              int_{C^{n-j}} |psi_*(z')|^q e^{q(|G~z' + b~'|^2 - |z'|^2)/2} dA(z').

    The integral is turned into a Fock norm by the substitution
    ``y_i = sqrt(1 - g_i^2) z_i``. For ``j = 0`` this is the bound
    ``(q/2pi)^n int m_z^q``, valid for all ``p, q``; for ``j >= 1`` it needs
    ``p <= q``. Returns ``inf`` (with zero error) when the integral diverges.
    """
    w = as_weighted(w)
    p, q = float(p), float(q)
    nz = normalize(w, tol)
    j, n = nz.j, w.n
    if j >= 1:
        if q < p:
            raise DomainError("no bounded weighted operator with ||A|| = 1 for q < p")
        ps = extract_psi_star(w, tol, seed)
        log_pref = q * float(np.vdot(ps.b_head, ps.b_head).real) / 2 + j * math.log(q / p)
        if j == n:
            val = math.exp(log_pref / q) * abs(evaluate(ps.psi_star, np.zeros(n)))
            return NormEstimate(val, 0.0, NormMethod.EXACT_GRAM, 0)
        star = slice_head(ps.psi_star, np.zeros(j))
    else:
        log_pref = 0.0
        star = nz.psi_tilde
    g = nz.a[j:]
    bt = nz.b_tilde[j:]
    d = np.sqrt(1.0 - g ** 2)
    # h(y) = psi_*(y / d) exp(<y, g b~' / d>) so |h|^q = |psi_*|^q e^{q Re<G~z', b~'>}
    h = compose_affine(star, np.diag(1.0 / d))
    h = multiply(h, kernel(g * bt / d))
    log_pref += q * float(np.vdot(bt, bt).real) / 2 - float(np.sum(np.log(d ** 2)))
    est = fock_norm(h, q, budget=budget, seed=seed)
    fac = math.exp(log_pref / q)
    return NormEstimate(fac * est.value, fac * est.abs_error, est.method,
                        est.samples_or_nodes, est.seed)
