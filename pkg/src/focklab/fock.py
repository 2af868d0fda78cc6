"""Entire functions of exponential-polynomial type and their Fock norms.

A :class:`SymbolFn` on ``C^n`` is a finite sum

    f(z) = sum_k c_k * z^{alpha_k} * exp(<z, w_k>),   <z, w> = sum_i z_i conj(w_i).

The class contains the reproducing kernels ``K_w``, constants and polynomials,
and is closed under composition with affine maps, products and partial
derivatives, so every function the classification code manipulates stays
exact. Norms

    ||f||_{n,p} = ( (p / 2 pi)^n int_{C^n} |f(z)|^p exp(-p |z|^2 / 2) dA(z) )^{1/p}

are computed exactly for kernel combinations at ``p = 2`` and estimated
otherwise (tensor Gauss-Hermite or seeded Monte Carlo).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp

from . import quadrature as quad
from .errors import BudgetError, InputError, UnsupportedMethodError
from .linalg import as_matrix, as_vector

KEY_DECIMALS = 12
P_MIN = 0.05


def _check_p(p) -> float:
    p = float(p)
    if not np.isfinite(p) or p < P_MIN:
        raise InputError(f"exponent p must be a finite number >= {P_MIN}, got {p}")
    return p


@dataclass(frozen=True)
class FockParams:
    n: int
    p: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise InputError("dimension n must be >= 1")
        _check_p(self.p)


def _key(alpha, w) -> tuple:
    wr = np.round(np.asarray(w, dtype=complex), KEY_DECIMALS)
    flat = []
    for x in wr:
        flat.append(float(x.real) + 0.0)
        flat.append(float(x.imag) + 0.0)
    return (tuple(int(a) for a in alpha), tuple(flat))


class SymbolFn:
    """Canonical exponential-polynomial on ``C^n``.

    Terms with identical ``(alpha, w)`` (``w`` rounded to 12 decimals) are
    merged and zero coefficients dropped, so the empty term list is the zero
    function. Instances are immutable.
    """

    __slots__ = ("n", "coeffs", "alphas", "freqs")

    def __init__(self, n: int, terms=()):
        n = int(n)
        if n < 1:
            raise InputError("dimension must be >= 1")
        merged: dict[tuple, list] = {}
        for c, alpha, w in terms:
            c = complex(c)
            alpha = tuple(int(a) for a in alpha)
            w = as_vector(w, n)
            if len(alpha) != n or min(alpha, default=0) < 0:
                raise InputError(f"bad multi-index {alpha} for n={n}")
            if not np.isfinite(c):
                raise InputError("non-finite coefficient")
            k = _key(alpha, w)
            if k in merged:
                merged[k][0] += c
            else:
                merged[k] = [c, alpha, w]
        items = [merged[k] for k in sorted(merged) if merged[k][0] != 0]
        m = len(items)
        coeffs = np.array([it[0] for it in items], dtype=complex)
        alphas = np.array([it[1] for it in items], dtype=np.int64).reshape(m, n)
        freqs = np.array([it[2] for it in items], dtype=complex).reshape(m, n)
        for a in (coeffs, alphas, freqs):
            a.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "freqs", freqs)

    def __setattr__(self, name, value):
        raise AttributeError("SymbolFn is immutable")

    # construction helpers
    @classmethod
    def from_arrays(cls, n, coeffs, alphas, freqs) -> "SymbolFn":
        return cls(n, zip(coeffs, alphas, freqs))

    @classmethod
    def constant(cls, n: int, c: complex = 1.0) -> "SymbolFn":
        return cls(n, [(c, (0,) * n, np.zeros(n))])

    @classmethod
    def zero(cls, n: int) -> "SymbolFn":
        return cls(n, [])

    @classmethod
    def monomial(cls, n: int, alpha, c: complex = 1.0) -> "SymbolFn":
        return cls(n, [(c, alpha, np.zeros(n))])

    @classmethod
    def coordinate(cls, n: int, i: int) -> "SymbolFn":
        alpha = [0] * n
        alpha[i] = 1
        return cls.monomial(n, alpha)

    # inspection
    @property
    def terms(self) -> list[tuple[complex, tuple, np.ndarray]]:
        return [(complex(c), tuple(int(x) for x in a), np.array(w))
                for c, a, w in zip(self.coeffs, self.alphas, self.freqs)]

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def is_pure_kernel(self) -> bool:
        """True if every term is a multiple of a kernel (no polynomial factor)."""
        return not np.any(self.alphas)

    def keys(self) -> list[tuple]:
        return [_key(a, w) for a, w in zip(self.alphas, self.freqs)]

    def equals(self, other: "SymbolFn", rtol: float = 1e-10, atol: float = 1e-12) -> bool:
        """Term-wise equality of canonical forms up to coefficient tolerance."""
        if self.n != other.n:
            return False
        diff = self - other
        scale = max([atol] + [abs(c) for c in self.coeffs] + [abs(c) for c in other.coeffs])
        return bool(np.all(np.abs(diff.coeffs) <= atol + rtol * scale))

    def __repr__(self) -> str:
        parts = []
        for c, a, w in self.terms:
            s = f"({c:.6g})"
            if any(a):
                s += "*z^" + str(a)
            if np.any(w != 0):
                s += "*K[" + ",".join(f"{x:.4g}" for x in w) + "]"
            parts.append(s)
        return f"SymbolFn(n={self.n}, " + (" + ".join(parts) or "0") + ")"

    # algebra
    def _check_dim(self, other):
        if self.n != other.n:
            raise InputError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = SymbolFn.constant(self.n, other)
        self._check_dim(other)
        return SymbolFn(self.n, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = SymbolFn.constant(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: complex) -> "SymbolFn":
        c = complex(c)
        return SymbolFn.from_arrays(self.n, self.coeffs * c, self.alphas, self.freqs)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return multiply(self, other)

    __rmul__ = __mul__

    def __call__(self, z):
        return evaluate(self, z)

    # serialization
    def to_json(self) -> list[dict]:
        return [{"coeff": [c.real, c.imag], "alpha": list(a),
                 "w": [[x.real, x.imag] for x in w]} for c, a, w in self.terms]

    @classmethod
    def from_json(cls, n: int, data) -> "SymbolFn":
        terms = []
        for t in data:
            c = complex(*t["coeff"])
            w = [complex(*x) for x in t["w"]]
            terms.append((c, t["alpha"], w))
        return cls(n, terms)


def kernel(w) -> SymbolFn:
    """``K_w(z) = exp(<z, w>)``."""
    w = as_vector(w)
    return SymbolFn(len(w), [(1.0, (0,) * len(w), w)])


def normalized_kernel(w) -> SymbolFn:
    """``k_w(z) = exp(<z, w> - |w|^2 / 2)``, of unit norm in every F^p."""
    w = as_vector(w)
    return SymbolFn(len(w), [(math.exp(-0.5 * float(np.vdot(w, w).real)), (0,) * len(w), w)])


def _log_abs_terms(f: SymbolFn, Z: np.ndarray) -> np.ndarray:
    """Complex logs of each term at each point: shape (N, m)."""
    with np.errstate(divide="ignore"):
        logz = np.log(Z.astype(complex))
    out = Z @ f.freqs.conj().T
    if np.any(f.alphas):
        # 0 * log(0) must count as 0
        safe = np.where(np.isfinite(logz), logz, 0.0)
        out = out + safe @ f.alphas.T.astype(float)
        zero_hit = (~np.isfinite(logz)).astype(float) @ f.alphas.T.astype(float) > 0
        out = np.where(zero_hit, -np.inf + 0j, out)
    with np.errstate(divide="ignore"):
        out = out + np.log(f.coeffs)
    return out


def evaluate(f: SymbolFn, z) -> complex | np.ndarray:
    """Evaluate at one point (shape ``(n,)``) or many points (shape ``(N, n)``)."""
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    if Z.shape[-1] != f.n:
        raise InputError(f"point dimension {Z.shape[-1]} does not match n={f.n}")
    if f.is_zero:
        vals = np.zeros(Z.shape[0], dtype=complex)
    else:
        poly = np.ones((Z.shape[0], len(f)), dtype=complex)
        for i in range(f.n):
            a = f.alphas[:, i]
            if np.any(a):
                poly *= Z[:, i:i + 1] ** a[None, :]
        vals = (poly * np.exp(Z @ f.freqs.conj().T)) @ f.coeffs
    return complex(vals[0]) if single else vals


def log_abs(f: SymbolFn, Z: np.ndarray) -> np.ndarray:
    """``log |f(z)|`` at points ``Z`` (N, n), stable for huge exponents."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if f.is_zero:
        return np.full(Z.shape[0], -np.inf)
    L = _log_abs_terms(f, Z)
    re = L.real
    shift = np.max(re, axis=1, keepdims=True)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    s = np.sum(np.exp(L - shift), axis=1)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(s)) + shift[:, 0]


def _poly_mul(p1: dict, p2: dict) -> dict:
    out: dict = {}
    for e1, c1 in p1.items():
        for e2, c2 in p2.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return out


def compose_affine(f: SymbolFn, A, b=None) -> SymbolFn:
    """``f o phi`` for ``phi(z) = A z + b``; ``A`` may be an object with ``.A``/``.b``.

    ``(Az + b)^alpha`` is expanded into monomials and
    ``exp(<Az + b, w>) = exp(<b, w>) exp(<z, A^* w>)``.
    """
    if hasattr(A, "A") and b is None:
        A, b = A.A, A.b
    n = f.n
    A = as_matrix(A, n)
    b = np.zeros(n, dtype=complex) if b is None else as_vector(b, n)
    zero = (0,) * n
    linear = []
    for i in range(n):
        form = {}
        for k in range(n):
            if A[i, k] != 0:
                e = [0] * n
                e[k] = 1
                form[tuple(e)] = A[i, k]
        if b[i] != 0:
            form[zero] = form.get(zero, 0) + b[i]
        linear.append(form)
    terms = []
    power_cache: dict = {}
    for c, alpha, w in zip(f.coeffs, f.alphas, f.freqs):
        poly = {zero: 1.0 + 0j}
        for i, a in enumerate(alpha):
            if a == 0:
                continue
            key = (i, int(a))
            if key not in power_cache:
                pw = {zero: 1.0 + 0j}
                for _ in range(int(a)):
                    pw = _poly_mul(pw, linear[i])
                power_cache[key] = pw
            poly = _poly_mul(poly, power_cache[key])
        factor = c * np.exp(np.vdot(w, b))
        new_w = A.conj().T @ w
        for e, pc in poly.items():
            terms.append((factor * pc, e, new_w))
    return SymbolFn(n, terms)


def multiply(f: SymbolFn, g: SymbolFn) -> SymbolFn:
    f._check_dim(g)
    terms = []
    for c1, a1, w1 in zip(f.coeffs, f.alphas, f.freqs):
        for c2, a2, w2 in zip(g.coeffs, g.alphas, g.freqs):
            terms.append((c1 * c2, a1 + a2, w1 + w2))
    return SymbolFn(f.n, terms)


def partial_derivative(f: SymbolFn, i: int) -> SymbolFn:
    """``d f / d z_i`` (0-based ``i``), using ``d/dz_i exp(<z,w>) = conj(w_i) exp(<z,w>)``."""
    if not 0 <= i < f.n:
        raise InputError(f"coordinate {i} out of range for n={f.n}")
    terms = []
    for c, a, w in zip(f.coeffs, f.alphas, f.freqs):
        if a[i] > 0:
            a2 = a.copy()
            a2[i] -= 1
            terms.append((c * a[i], a2, w))
        if w[i] != 0:
            terms.append((c * np.conj(w[i]), a, w))
    return SymbolFn(f.n, terms)


def fix_coordinates(f: SymbolFn, idx, values) -> SymbolFn:
    """Restrict ``f`` by fixing the coordinates ``idx`` to ``values``.

    Returns a function of the remaining coordinates (in their original order).
    Fixing every coordinate is not allowed; use :func:`evaluate` instead.
    """
    idx = [int(i) for i in idx]
    values = as_vector(values, len(idx))
    rest = [k for k in range(f.n) if k not in idx]
    if not rest:
        raise InputError("cannot fix every coordinate; evaluate instead")
    terms = []
    for c, a, w in zip(f.coeffs, f.alphas, f.freqs):
        factor = c
        for k, v in zip(idx, values):
            if a[k]:
                factor *= v ** int(a[k])
            if w[k] != 0:
                factor *= np.exp(v * np.conj(w[k]))
        terms.append((factor, a[rest], w[rest]))
    return SymbolFn(len(rest), terms)


def slice_head(f: SymbolFn, values) -> SymbolFn:
    """``f(values, .)``: fix the first ``len(values)`` coordinates."""
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    return fix_coordinates(f, range(len(values)), values)


def pad_head(f: SymbolFn, j: int) -> SymbolFn:
    """View a function of ``z'_[j]`` as a function on ``C^{j + n}`` independent of ``z_[j]``."""
    m = f.n + j
    return SymbolFn(m, [(c, (0,) * j + a, np.concatenate([np.zeros(j), w]))
                        for c, a, w in f.terms])


def independent_of(f: SymbolFn, idx, tol: float = 1e-12) -> bool:
    """True if no canonical term depends on the coordinates ``idx``."""
    idx = list(idx)
    if f.is_zero or not idx:
        return True
    scale = max(1.0, float(np.max(np.abs(f.freqs)))) if f.freqs.size else 1.0
    return bool(not np.any(f.alphas[:, idx]) and np.all(np.abs(f.freqs[:, idx]) <= tol * scale))


# ---------------------------------------------------------------------------
# norms


class NormMethod(str, Enum):
    EXACT_GRAM = "ExactGram"
    QUADRATURE = "Quadrature"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class NormEstimate:
    value: float
    abs_error: float
    method: NormMethod
    samples_or_nodes: int
    seed: int | None = None

    @property
    def lower(self) -> float:
        return max(0.0, self.value - self.abs_error)

    @property
    def upper(self) -> float:
        return self.value + self.abs_error

    def to_json(self) -> dict:
        return {"value": self.value, "abs_error": self.abs_error,
                "method": self.method.value, "samples_or_nodes": self.samples_or_nodes,
                "seed": self.seed}


DEFAULT_NODES = {1: 64, 2: 24, 3: 10, 4: 6}
DEFAULT_SAMPLES = 200_000
QUAD_SAFETY = 4.0


def gram_norm_squared(f: SymbolFn) -> float:
    """``||f||_2^2`` for a kernel combination from ``<K_a, K_b> = exp(<b, a>)``."""
    if f.is_zero:
        return 0.0
    c, W = f.coeffs, f.freqs
    logc = np.log(c)
    # E[k, l] = log c_k + conj(log c_l) + <w_l, w_k>
    inner = W.conj() @ W.T
    E = logc[:, None] + logc.conj()[None, :] + inner
    shift = float(np.max(E.real))
    total = np.sum(np.exp(E - shift)).real
    return max(0.0, float(total)) * math.exp(shift) if total > 0 else 0.0


def _coordinate_gram(al, be, x, y):
    """``d^al/dx^al d^be/dy^be exp(x y)`` divided by ``exp(x y)`` (broadcast arrays)."""
    out = np.zeros(np.broadcast(al, be, x, y).shape, dtype=complex)
    kmax = int(np.max(np.minimum(al, be), initial=0))
    for k in range(kmax + 1):
        ok = (al >= k) & (be >= k)
        a_k = np.where(ok, al - k, 0)
        b_k = np.where(ok, be - k, 0)
        coef = np.exp(gammaln(al + 1) - gammaln(k + 1) - gammaln(a_k + 1)
                      + gammaln(be + 1) - gammaln(b_k + 1))
        out = out + np.where(ok, coef * x ** b_k * y ** a_k, 0)
    return out


def gram_inner(f: SymbolFn, g: SymbolFn) -> complex:
    """``<f, g>`` in ``F^2(C^n)`` in closed form, for the whole function class.

    Uses ``z^al K_a = d^al/d(conj a)^al K_a`` and ``<K_a, K_b> = exp(<b, a>)``.
    """
    f._check_dim(g)
    if f.is_zero or g.is_zero:
        return 0j
    x = f.freqs.conj()[:, None, :]
    y = g.freqs[None, :, :]
    al = f.alphas[:, None, :]
    be = g.alphas[None, :, :]
    with np.errstate(divide="ignore"):
        logpoly = np.sum(np.log(_coordinate_gram(al, be, x, y)), axis=2)
    E = np.log(f.coeffs)[:, None] + np.log(g.coeffs).conj()[None, :] + np.sum(x * y, axis=2) + logpoly
    finite = np.isfinite(E.real)
    if not np.any(finite):
        return 0j
    shift = float(np.max(E.real[finite]))
    return complex(np.sum(np.exp(E[finite] - shift)) * math.exp(shift))


def exact_l2_norm(f: SymbolFn) -> NormEstimate:
    """``||f||_{n,2}`` from :func:`gram_inner`, exact for every term type."""
    if f.is_pure_kernel:
        return NormEstimate(math.sqrt(gram_norm_squared(f)), 0.0, NormMethod.EXACT_GRAM, 0)
    return NormEstimate(math.sqrt(max(gram_inner(f, f).real, 0.0)), 0.0, NormMethod.EXACT_GRAM, 0)


def monomial_norm(alpha, p) -> float:
    """``||z^alpha||_{n,p} = prod_i ((2/p)^{p a_i/2} Gamma(p a_i/2 + 1))^{1/p}``."""
    p = _check_p(p)
    a = np.asarray(alpha, dtype=float)
    return float(np.exp(np.sum(a / 2 * np.log(2 / p) + gammaln(p * a / 2 + 1) / p)))


def _finish(log_mean: float, p: float) -> float:
    return math.exp(log_mean / p)


def _term_centers(f: SymbolFn, p: float):
    """Peak location, per-coordinate variance and log-mass of each term of |f|^p."""
    centers, variances, logmass = [], [], []
    for c, a, w in zip(f.coeffs, f.alphas, f.freqs):
        mu = np.zeros(f.n, dtype=complex)
        var = np.full(f.n, 1.0 / p)
        lm = p * math.log(abs(c))
        for i in range(f.n):
            ai, wi = int(a[i]), w[i]
            if ai == 0:
                mu[i] = wi
                lm += p * abs(wi) ** 2 / 2
            elif wi == 0:
                var[i] = (1.0 + ai) / p
                lm += p * (ai / 2 * math.log(ai) - ai / 2) + math.log(1.0 + ai)
            else:
                r = (abs(wi) + math.sqrt(abs(wi) ** 2 + 4 * ai)) / 2
                mu[i] = r * wi / abs(wi)
                lm += p * (ai * math.log(r) + r * abs(wi) - r * r / 2)
        centers.append(mu)
        variances.append(var)
        logmass.append(lm)
    return np.array(centers), np.array(variances), np.array(logmass)


def _proposal(f: SymbolFn, p: float):
    """Defensive Gaussian mixture proposal for importance sampling of |f|^p."""
    mus, vars_, lm = _term_centers(f, p)
    mus = np.vstack([np.zeros((1, f.n)), mus])
    vars_ = np.vstack([np.full((1, f.n), 1.0 / p), vars_])
    K = len(mus)
    soft = np.exp(lm - logsumexp(lm)) if len(lm) else np.zeros(0)
    weights = np.full(K, 0.1 / K)
    weights[1:] += 0.9 * soft
    if K == 1:
        weights[0] = 1.0
    weights /= weights.sum()
    return mus, vars_, weights


def _log_proposal_density(Z, mus, vars_, weights):
    d2 = np.abs(Z[:, None, :] - mus[None, :, :]) ** 2
    comp = -np.sum(np.log(2 * np.pi * vars_), axis=1)[None, :] - np.sum(d2 / (2 * vars_[None]), axis=2)
    return logsumexp(comp + np.log(weights)[None, :], axis=1)


def _mc_log_terms(f: SymbolFn, p: float, rng, size, mus, vars_, weights):
    comp = rng.choice(len(weights), size=size, p=weights)
    Z = mus[comp] + np.sqrt(vars_[comp]) * quad.complex_normal(rng, (size, f.n))
    log_phi0 = f.n * math.log(p / (2 * math.pi)) - p * np.sum(np.abs(Z) ** 2, axis=1) / 2
    return p * log_abs(f, Z) + log_phi0 - _log_proposal_density(Z, mus, vars_, weights)


def mc_power_integral(f: SymbolFn, p: float, samples: int, seed: int):
    """Importance-sampled estimate of ``||f||_p^p``: (mean, standard error, N)."""
    mus, vars_, weights = _proposal(f, p)
    blocks = quad.block_generators(seed, samples)
    logs = quad.parallel_map(lambda gs: _mc_log_terms(f, p, gs[0], gs[1], mus, vars_, weights), blocks)
    return quad.mean_and_se(logs)


def _gh_log_power_integral(f: SymbolFn, p: float, nodes: int) -> float:
    """``log ||f||_p^p`` by Gauss-Hermite around the dominant term's peak."""
    mus, _, lm = _term_centers(f, p)
    center = mus[int(np.argmax(lm))]

    def logf(Z):
        return p * log_abs(f, Z) - p * np.sum(np.abs(Z) ** 2, axis=1) / 2

    return quad.gauss_hermite_log_integral(logf, f.n, nodes, center=center, var=1.0 / p) \
        + f.n * math.log(p / (2 * math.pi))


def fock_norm(f: SymbolFn, p, method: str | NormMethod = "auto", budget: int | None = None,
              seed: int = 0) -> NormEstimate:
    """``||f||_{n,p}`` with an explicit error bar.

    Parameters
    ----------
    method
        ``"ExactGram"`` (p = 2 and kernel combinations only), ``"Quadrature"``
        (tensor Gauss-Hermite, ``2n <= 8``), ``"MonteCarlo"`` or ``"auto"``,
        which picks the first applicable in that order.
    budget
        Nodes per real axis for quadrature, sample count for Monte Carlo.
    seed
        Seed for Monte Carlo; results are bit-reproducible for a fixed
        ``(seed, budget)``.
    """
    if isinstance(p, FockParams):
        if p.n != f.n:
            raise InputError("FockParams dimension does not match function")
        p = p.p
    p = _check_p(p)
    if method == "auto":
        if p == 2.0 and f.is_pure_kernel:
            method = NormMethod.EXACT_GRAM
        elif 2 * f.n <= 8 and budget is None:
            method = NormMethod.QUADRATURE
        else:
            method = NormMethod.MONTE_CARLO
    method = NormMethod(method)

    if method is NormMethod.EXACT_GRAM:
        if p != 2.0 or not f.is_pure_kernel:
            raise UnsupportedMethodError("ExactGram needs p = 2 and a pure kernel combination")
        return NormEstimate(math.sqrt(gram_norm_squared(f)), 0.0, method, 0)

    if f.is_zero:
        return NormEstimate(0.0, 0.0 if method is NormMethod.EXACT_GRAM else 1e-300, method, 0,
                            seed if method is NormMethod.MONTE_CARLO else None)

    if method is NormMethod.QUADRATURE:
        if 2 * f.n > 8:
            raise BudgetError(f"tensor quadrature over {2 * f.n} real dimensions; use MonteCarlo")
        nodes = int(budget or DEFAULT_NODES[f.n])
        coarse = max(2, (3 * nodes) // 4)
        fine = _gh_log_power_integral(f, p, nodes)
        rough = _gh_log_power_integral(f, p, coarse)
        value = _finish(fine, p)
        other = _finish(rough, p)
        # |f|^p is not smooth at zeros of f, where convergence is only algebraic
        # and the node-halving difference undershoots the true error (up to ~2.3x seen)
        err = float(max(QUAD_SAFETY * abs(value - other), 4 * np.finfo(float).eps * value, 1e-300))
        return NormEstimate(float(value), err, method, nodes)

    samples = int(budget or DEFAULT_SAMPLES)
    mean, se, N = mc_power_integral(f, p, samples, seed)
    value = mean ** (1 / p)
    hi = (mean + 3 * se) ** (1 / p)
    lo = max(mean - 3 * se, 0.0) ** (1 / p)
    err = float(max(hi - value, value - lo, 1e-300))
    return NormEstimate(float(value), err, method, N, int(seed))


# ---------------------------------------------------------------------------
# inequality checks


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of sampling an inequality ``lhs <= rhs``.

    ``worst_margin`` is ``min(rhs - lhs)`` over the sampled points; a point is a
    violation only if ``lhs`` exceeds ``rhs`` by more than the norm estimate's
    error bar.
    """
    name: str
    worst_margin: float
    violations: int
    checked: int
    worst_point: list | None
    norm: NormEstimate | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"name": self.name, "worst_margin": self.worst_margin,
                "violations": self.violations, "checked": self.checked,
                "worst_point": self.worst_point, "ok": self.ok,
                "norm": None if self.norm is None else self.norm.to_json()}


def _probe_points(f: SymbolFn, count: int, seed: int) -> np.ndarray:
    """Random points plus the term peaks, where the pointwise bounds are tightest."""
    rng = np.random.default_rng(seed)
    Z = quad.complex_normal(rng, (count, f.n)) * rng.uniform(0.1, 2.0, (count, 1))
    if not f.is_zero:
        mus, _, _ = _term_centers(f, 2.0)
        jitter = 0.05 * quad.complex_normal(rng, (len(mus), f.n))
        Z = np.vstack([Z, mus, mus + jitter])
    return Z


def _as_point_list(z):
    return [[float(x.real), float(x.imag)] for x in z]


def check_pointwise_bound(f: SymbolFn, params, samples: int = 256, seed: int = 0,
                          norm: NormEstimate | None = None) -> BoundCheck:
    """Sample ``|f(z)| exp(-|z|^2/2) <= ||f||_{n,p}``."""
    p = params.p if isinstance(params, FockParams) else _check_p(params)
    norm = norm or fock_norm(f, p)
    Z = _probe_points(f, samples, seed)
    lhs = np.exp(log_abs(f, Z) - np.sum(np.abs(Z) ** 2, axis=1) / 2)
    margin = norm.value - lhs
    k = int(np.argmin(margin))
    viol = int(np.sum(lhs > norm.upper * (1 + 1e-12)))
    return BoundCheck("pointwise", float(margin[k]), viol, len(Z), _as_point_list(Z[k]), norm)


def check_derivative_bound(f: SymbolFn, params, i: int, samples: int = 256, seed: int = 0,
                           norm: NormEstimate | None = None) -> BoundCheck:
    """Sample ``|df/dz_i (z)| <= e^2 (1 + |z_i|) exp(|z|^2/2) ||f||_{n,p}``."""
    p = params.p if isinstance(params, FockParams) else _check_p(params)
    norm = norm or fock_norm(f, p)
    df = partial_derivative(f, i)
    Z = _probe_points(f, samples, seed)
    # compare in scaled form to avoid overflow of exp(|z|^2/2)
    lhs = np.exp(log_abs(df, Z) - np.sum(np.abs(Z) ** 2, axis=1) / 2) / (math.e ** 2 * (1 + np.abs(Z[:, i])))
    margin = norm.value - lhs
    k = int(np.argmin(margin))
    viol = int(np.sum(lhs > norm.upper * (1 + 1e-12)))
    return BoundCheck(f"derivative[{i}]", float(margin[k]), viol, len(Z), _as_point_list(Z[k]), norm)


def embedding_constant(n: int, p: float, q: float) -> float:
    """``(q/p)^{n/q}``, the norm of the inclusion F^p -> F^q for p < q."""
    return (q / p) ** (n / q)


def check_embedding(f: SymbolFn, p, q, budget: int | None = None, seed: int = 0,
                    method: str = "auto") -> BoundCheck:
    """Check ``||f||_{n,q} <= (q/p)^{n/q} ||f||_{n,p}`` for ``0 < p < q``."""
    p, q = _check_p(p), _check_p(q)
    if not p < q:
        raise InputError("embedding check needs p < q")
    np_ = fock_norm(f, p, method=method, budget=budget, seed=seed)
    nq = fock_norm(f, q, method=method, budget=budget, seed=seed + 1)
    C = embedding_constant(f.n, p, q)
    margin = C * np_.value - nq.value
    viol = int(nq.lower > C * np_.upper * (1 + 1e-12))
    return BoundCheck("embedding", float(margin), viol, 1, None, nq)
