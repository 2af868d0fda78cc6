"""Explicit norm-continuous paths between operators in one path component.

A :class:`Homotopy` is a chain of segments. Each segment carries a family
``s -> (psi_s, phi_s)`` on ``[0, 1]`` and a Lipschitz constant ``M`` with

    ||W_{psi_s, phi_s} - W_{psi_r, phi_r}|| <= M |s - r|.

Chains may be conjugated by ``C_U (.) C_V`` and a translation operator
``T_c``; the unitary factors are isometries and ``||T_c|| = e^{|c|^2/2}``.

Lipschitz constants come from Gaussian integrals whose integrands depend only
on the moduli ``|z_i|``; they are computed by radial Gauss-Legendre
quadrature (Monte Carlo for more than four variables) and reported with an
error estimate that is added to the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import quadrature as quad
from .certify import monomial_tests, op_distance_lower_bound
from .errors import DomainError, InputError, UnboundedError
from .fock import SymbolFn, compose_affine, kernel, multiply
from .linalg import UNIT_TOL, as_vector, check_contraction, operator_norm
from .operators import (AffineMap, Regime, VerdictKind, WeightedSymbol, _regime, as_weighted,
                        classify_composition, complex_to_json, extract_psi_star, factor_weight,
                        normalize, weighted_norm_upper_bound)
from .topology import (b_equivalent, block_in_frame, canonical_form, matrices_equivalent,
                       same_component_composition, same_component_weighted)


class Recipe(str, Enum):
    SCALE_TO_CONSTANT = "ScaleToConstant"
    CONSTANT_LINE = "ConstantLine"
    DROP_TRANSLATION = "DropTranslation"
    BLOCK_INTERP = "BlockInterp"
    WEIGHT_INTERP = "WeightInterp"
    CONJUGATED_CHAIN = "ConjugatedChain"
    TRANSLATION_CONJUGATED_CHAIN = "TranslationConjugatedChain"


@dataclass(frozen=True)
class Lipschitz:
    """Lipschitz constant ``value`` with numerical error ``abs_error``; use :attr:`bound`."""
    value: float
    abs_error: float = 0.0
    method: str = "closed-form"
    formula: str = ""
    nodes_or_samples: int = 0

    @property
    def bound(self) -> float:
        return self.value + self.abs_error

    def scaled(self, c: float) -> "Lipschitz":
        return Lipschitz(c * self.value, c * self.abs_error, self.method, self.formula,
                         self.nodes_or_samples)

    def to_json(self) -> dict:
        return {"value": self.value, "abs_error": self.abs_error, "bound": self.bound,
                "method": self.method, "formula": self.formula,
                "nodes_or_samples": self.nodes_or_samples}


ZERO = Lipschitz(0.0, 0.0, "closed-form", "constant path")


@dataclass(frozen=True, eq=False)
class Segment:
    """One piece of a chain; ``family`` is parametrized by the local ``s`` in ``[0, 1]``."""
    recipe: Recipe
    family: Callable[[float], WeightedSymbol]
    M: Lipschitz
    params: dict = field(default_factory=dict)
    reverse: bool = False
    t0: float = 0.0
    t1: float = 1.0

    def at_local(self, s: float) -> WeightedSymbol:
        return self.family(1.0 - s if self.reverse else s)

    def reversed(self) -> "Segment":
        return Segment(self.recipe, self.family, self.M, self.params, not self.reverse)

    def placed(self, t0: float, t1: float) -> "Segment":
        return Segment(self.recipe, self.family, self.M, self.params, self.reverse, t0, t1)

    @property
    def is_constant(self) -> bool:
        return self.M.bound == 0.0

    def to_json(self) -> dict:
        return {"recipe": self.recipe.value, "t0": self.t0, "t1": self.t1,
                "reverse": self.reverse, "M": self.M.to_json(), "params": self.params}


@dataclass(frozen=True, eq=False)
class Frame:
    """``X -> C_U T_c X C_V`` with ``T_c f(z) = e^{-<z_[j], c>} f(z + (c, 0))``."""
    U: np.ndarray
    V: np.ndarray
    c: np.ndarray
    j: int

    @property
    def norm_T(self) -> float:
        return math.exp(float(np.vdot(self.c, self.c).real) / 2)

    def apply(self, w: WeightedSymbol) -> WeightedSymbol:
        n = w.n
        shift = np.concatenate([self.c, np.zeros(n - self.j)]).astype(complex)
        psi, A, b = w.psi, w.phi.A, w.phi.b
        if np.any(shift):
            psi = multiply(kernel(-shift), compose_affine(psi, np.eye(n), shift))
            b = A @ shift + b
        # C_U W_{psi, phi} C_V = W_{psi(U.), V phi(U.)}
        psi = compose_affine(psi, self.U)
        return WeightedSymbol(psi, AffineMap(self.V @ A @ self.U, self.V @ b))

    def to_json(self) -> dict:
        return {"U": complex_to_json(self.U), "V": complex_to_json(self.V),
                "c": complex_to_json(self.c), "j": self.j, "norm_T": self.norm_T}


@dataclass(frozen=True, eq=False)
class Homotopy:
    """A path ``t -> W_t`` on ``[0, 1]`` with exact endpoints ``start`` and ``end``."""
    recipe: Recipe
    segments: tuple
    start: WeightedSymbol
    end: WeightedSymbol
    frame: Frame | None = None

    @property
    def n(self) -> int:
        return self.start.n

    @property
    def is_composition(self) -> bool:
        return self.start.is_composition and self.end.is_composition and all(
            s.recipe is not Recipe.WEIGHT_INTERP for s in self.segments)

    @property
    def scale(self) -> float:
        return 1.0 if self.frame is None else self.frame.norm_T

    def at(self, t: float) -> WeightedSymbol:
        t = float(t)
        if t <= 0.0:
            return self.start
        if t >= 1.0:
            return self.end
        seg = next((s for s in self.segments if s.t0 <= t < s.t1), self.segments[-1])
        w = seg.at_local((t - seg.t0) / (seg.t1 - seg.t0))
        return w if self.frame is None else self.frame.apply(w)

    def lipschitz_bound(self, ta: float, tb: float) -> float:
        """Upper bound on ``||W_ta - W_tb||``, summing segment constants over the overlap."""
        ta, tb = sorted((float(ta), float(tb)))
        total = 0.0
        for s in self.segments:
            overlap = min(tb, s.t1) - max(ta, s.t0)
            if overlap > 0:
                total += s.M.bound * overlap / (s.t1 - s.t0)
        return self.scale * total

    @property
    def M(self) -> float:
        return self.lipschitz_bound(0.0, 1.0)

    def to_json(self) -> dict:
        return {"recipe": self.recipe.value, "M": self.M,
                "segments": [s.to_json() for s in self.segments],
                "start": self.start.to_json(), "end": self.end.to_json(),
                "frame": None if self.frame is None else self.frame.to_json()}


def _chain(recipe: Recipe, parts, start, end, frame=None) -> Homotopy:
    """Concatenate segments, dropping constant ones, with equal shares of ``[0, 1]``."""
    segs = [s for s in parts if not s.is_constant]
    if not segs:
        w = as_weighted(start)
        segs = [Segment(recipe, lambda s, w=w: w, ZERO)]
    k = len(segs)
    placed = tuple(s.placed(i / k, (i + 1) / k) for i, s in enumerate(segs))
    return Homotopy(recipe, placed, as_weighted(start), as_weighted(end), frame)


def _single(seg: Segment, start, end) -> Homotopy:
    return _chain(seg.recipe, [seg], start, end)


# ---------------------------------------------------------------------------
# Lipschitz integrals


RADIAL_NODES = {1: 256, 2: 80, 3: 28, 4: 14}
MC_SAMPLES = 1 << 17


def _summand_constant(k: int, q: float) -> float:
    """``C`` with ``(x_1 + ... + x_k)^q <= C^q sum x_i^q``."""
    return float(max(k, 1)) ** max(0.0, 1.0 - 1.0 / q)


def _envelope(log_h, d):
    dirs = np.vstack([np.eye(d), np.full((1, d), 1 / math.sqrt(d))])
    return lambda R: float(np.max(log_h(R * dirs)))


def _mc_log_integral(log_h, d, var, samples, seed):
    """``log int_{C^d} h(|z|)`` by Gaussian importance sampling; returns (log mean, rel se)."""
    logs = []
    for rng, size in quad.block_generators(seed, samples):
        z = math.sqrt(var) * quad.complex_normal(rng, (size, d))
        r = np.abs(z)
        log_dens = -np.sum(r * r, axis=1) / (2 * var) - d * math.log(2 * math.pi * var)
        logs.append(log_h(r) - log_dens)
    mean, se, _ = quad.mean_and_se(logs)
    return math.log(mean), se / mean


def _radial_lipschitz(log_h, d: int, log_pref: float, q: float, formula: str,
                      decay: float, seed: int = 0) -> Lipschitz:
    """``M = (e^{log_pref} int_{C^d} h)^{1/q}`` with ``h`` a function of the moduli.

    ``decay`` is a lower bound on the Gaussian rate ``h ~ e^{-decay |r|^2}``,
    used for the Monte Carlo proposal.
    """
    if d <= 4:
        cutoff = quad.radius_cutoff(_envelope(log_h, d))
        nodes = RADIAL_NODES[d]
        l1 = quad.radial_log_integral(log_h, d, cutoff, nodes)
        l2 = quad.radial_log_integral(log_h, d, cutoff, (3 * nodes) // 4)
        m1, m2 = math.exp((log_pref + l1) / q), math.exp((log_pref + l2) / q)
        return Lipschitz(m1, abs(m1 - m2), "Quadrature", formula, nodes ** d)
    var = 1.0 / max(decay, 1e-3)
    lm, rel = _mc_log_integral(log_h, d, var, MC_SAMPLES, seed)
    m = math.exp((log_pref + lm) / q)
    hi = math.exp((log_pref + lm + math.log1p(3 * rel)) / q) if rel < 1 / 3 else math.inf
    return Lipschitz(m, hi - m, "MonteCarlo", formula, MC_SAMPLES)


def _norm_sq(r, coef):
    return np.sum((coef * r) ** 2, axis=1)


def scale_lipschitz(phi: AffineMap, q: float, tol: float = UNIT_TOL, seed: int = 0) -> Lipschitz:
    """``M`` for ``phi_t(z) = tAz + b``, valid for every ``p, q``."""
    nz = normalize(phi, tol)
    s = nz.s
    if s == 0:
        return ZERO
    a = nz.a[:s]
    bt = np.abs(nz.b_tilde[:s])
    beta = float(np.linalg.norm(bt))
    rest = float(np.vdot(nz.b_tilde[s:], nz.b_tilde[s:]).real)

    def log_h(r):
        with np.errstate(divide="ignore"):
            terms = q * np.log(a * r) + q * np.log1p(a * r + bt)
        ar = np.sqrt(_norm_sq(r, a))
        return logsumexp(terms, axis=1) + q * (ar + beta) ** 2 / 2 - q * np.sum(r * r, axis=1) / 2

    log_pref = (q * math.log(_summand_constant(s, q)) + 2 * q + s * math.log(q / (2 * math.pi))
                + q * rest / 2)
    decay = q * (1 - float(a[0])) ** 2 / 4
    return _radial_lipschitz(log_h, s, log_pref, q, "scale-to-constant", decay, seed)


def constants_lipschitz(alpha, beta) -> Lipschitz:
    """``M = e^2 sum |beta_i - alpha_i| (1 + |alpha_i| + |beta_i|) e^{(|alpha| + |beta|)^2/2}``."""
    alpha, beta = as_vector(alpha), as_vector(beta, len(as_vector(alpha)))
    s = float(np.sum(np.abs(beta - alpha) * (1 + np.abs(alpha) + np.abs(beta))))
    if s == 0:
        return ZERO
    na, nb = np.linalg.norm(alpha), np.linalg.norm(beta)
    return Lipschitz(math.exp(2 + (na + nb) ** 2 / 2) * s, 0.0, "closed-form", "constant line")


def drop_lipschitz(phi: AffineMap, p: float, q: float, tol: float = UNIT_TOL,
                   seed: int = 0) -> Lipschitz:
    """``M`` for ``phi_t(z) = Az + tb`` with ``||A|| = 1``, ``p <= q``."""
    nz = normalize(phi, tol)
    n, j = len(nz.a), nz.j
    a = nz.a[j:]
    bt = np.abs(nz.b_tilde[j:])
    keep = bt > 0
    if not np.any(keep):
        return ZERO
    d = n - j
    beta = float(np.linalg.norm(bt))
    logb = np.where(keep, np.log(np.where(keep, bt, 1.0)), -np.inf)

    def log_h(r):
        terms = q * logb + q * np.log1p(a * r + bt)
        ar = np.sqrt(_norm_sq(r, a))
        return logsumexp(terms, axis=1) + q * (ar + beta) ** 2 / 2 - q * np.sum(r * r, axis=1) / 2

    log_pref = (q * math.log(_summand_constant(int(np.sum(keep)), q)) + 2 * q
                + n * math.log(q / p) + d * math.log(q / (2 * math.pi)))
    decay = q * (1 - float(np.max(a, initial=0))) ** 2 / 4
    return _radial_lipschitz(log_h, d, log_pref, q, "drop-translation", decay, seed)


def block_lipschitz(g, n: int, p: float, q: float, seed: int = 0) -> Lipschitz:
    """``M`` for ``t -> I_j + tG`` (``g`` the singular values of ``G``), ``p <= q``."""
    g = np.asarray(g, dtype=float)
    d = len(g)
    if d == 0 or not np.any(g > 0):
        return ZERO

    def log_h(r):
        with np.errstate(divide="ignore"):
            terms = q * np.log(g * r) + q * np.log1p(g * r)
        return (logsumexp(terms, axis=1) + q * _norm_sq(r, g) / 2
                - q * np.sum(r * r, axis=1) / 2)

    log_pref = (q * math.log(_summand_constant(d, q)) + 2 * q + n * math.log(q / p)
                + d * math.log(q / (2 * math.pi)))
    decay = q * (1 - float(np.max(g)) ** 2) / 2
    return _radial_lipschitz(log_h, d, log_pref, q, "block interpolation", decay, seed)


# ---------------------------------------------------------------------------
# primitive paths


def _as_map(phi) -> AffineMap:
    if isinstance(phi, WeightedSymbol):
        return phi.phi
    if isinstance(phi, AffineMap):
        return phi
    return AffineMap(*phi) if isinstance(phi, tuple) else AffineMap(phi)


def _comp(A, b) -> WeightedSymbol:
    A = np.asarray(A, dtype=complex)
    return WeightedSymbol(SymbolFn.constant(A.shape[0]), AffineMap(A, b))


def scale_segment(phi: AffineMap, q: float, tol: float = UNIT_TOL, seed: int = 0) -> Segment:
    phi = _as_map(phi)
    if operator_norm(phi.A) >= 1.0 - tol:
        raise DomainError("scale-to-constant path needs ||A|| < 1")
    A, b = phi.A, phi.b
    return Segment(Recipe.SCALE_TO_CONSTANT, lambda s: _comp(s * A, b),
                   scale_lipschitz(phi, q, tol, seed), {"phi": phi.to_json()})


def path_scale_to_constant(phi, p, q, tol: float = UNIT_TOL, seed: int = 0) -> Homotopy:
    """``phi_t(z) = tAz + b`` from the constant map ``b`` (``t = 0``) to ``phi`` (``t = 1``)."""
    _regime(p, q)
    phi = _as_map(phi)
    seg = scale_segment(phi, float(q), tol, seed)
    return _single(seg, _comp(np.zeros_like(phi.A), phi.b), _comp(phi.A, phi.b))


def constants_segment(alpha, beta) -> Segment:
    alpha = as_vector(alpha)
    beta = as_vector(beta, len(alpha))
    Z = np.zeros((len(alpha), len(alpha)), dtype=complex)
    return Segment(Recipe.CONSTANT_LINE, lambda s: _comp(Z, (1 - s) * alpha + s * beta),
                   constants_lipschitz(alpha, beta),
                   {"alpha": complex_to_json(alpha), "beta": complex_to_json(beta)})


def path_between_constants(alpha, beta, p, q) -> Homotopy:
    """``gamma_t = (1 - t) alpha + t beta`` as constant maps."""
    _regime(p, q)
    seg = constants_segment(alpha, beta)
    Z = np.zeros((len(seg.params["alpha"]),) * 2)
    return _single(seg, _comp(Z, as_vector(alpha)), _comp(Z, as_vector(beta, len(Z))))


def drop_segment(phi: AffineMap, p, q, tol: float = UNIT_TOL, seed: int = 0) -> Segment:
    phi = _as_map(phi)
    if _regime(p, q) is Regime.Q_LT_P:
        raise DomainError("drop-translation paths are a p <= q construction")
    v = classify_composition(phi, p, q, tol)
    if not v.bounded:
        raise UnboundedError(f"C_phi is unbounded: {v.reason}")
    if v.kind is not VerdictKind.BOUNDED_NOT_COMPACT:
        raise DomainError("drop-translation path needs ||A|| = 1")
    A, b = phi.A, phi.b
    for t in np.linspace(0, 1, 11):
        if not classify_composition(AffineMap(A, t * b), p, q, tol).bounded:
            raise UnboundedError(f"intermediate symbol at t={t:.2f} is unbounded")
    return Segment(Recipe.DROP_TRANSLATION, lambda s: _comp(A, s * b),
                   drop_lipschitz(phi, float(p), float(q), tol, seed), {"phi": phi.to_json()})


def path_drop_translation(phi, p, q, tol: float = UNIT_TOL, seed: int = 0) -> Homotopy:
    """``phi_t(z) = Az + tb`` from ``C_A`` (``t = 0``) to ``C_phi`` (``t = 1``)."""
    phi = _as_map(phi)
    seg = drop_segment(phi, p, q, tol, seed)
    return _single(seg, _comp(phi.A, np.zeros(phi.n)), _comp(phi.A, phi.b))


def block_segments(A, D, p, q, tol: float = UNIT_TOL, seed: int = 0) -> list[Segment]:
    """``A = V(I + G)U -> V(I + 0)U -> V(I + H)U = D`` as two linear segments."""
    if _regime(p, q) is Regime.Q_LT_P:
        raise DomainError("block interpolation is a p <= q construction")
    cf = canonical_form(A, tol)
    H = block_in_frame(D, cf.V, cf.U, cf.j, unit_tol=tol)
    n, j = cf.V.shape[0], cf.j
    mid = cf.V @ np.diag([1.0] * j + [0.0] * (n - j)).astype(complex) @ cf.U
    A = np.asarray(A, dtype=complex)
    D = np.asarray(D, dtype=complex)
    zero = np.zeros(n, dtype=complex)
    segs = []
    for end, block in ((A, cf.G), (D, H)):
        g = np.linalg.svd(block, compute_uv=False) if block.size else np.zeros(0)
        M = block_lipschitz(g, n, float(p), float(q), seed)
        segs.append(Segment(Recipe.BLOCK_INTERP,
                            lambda s, E=end: _comp((1 - s) * mid + s * E, zero), M,
                            {"from": complex_to_json(mid), "to": complex_to_json(end)}))
    return [segs[0].reversed(), segs[1]]


def path_block_interpolation(A, D, p, q, tol: float = UNIT_TOL, seed: int = 0) -> Homotopy:
    """Path from ``C_A`` to ``C_D`` for ``A``, ``D`` sharing the frame ``V(I_j + .)U``.

    It runs linearly through ``V(I_j + 0)U``; every intermediate block has norm
    below 1 by convexity, so every sample stays in the class of ``A``.
    """
    A = np.asarray(A, dtype=complex)
    D = np.asarray(D, dtype=complex)
    segs = block_segments(A, D, p, q, tol, seed)
    zero = np.zeros(A.shape[0])
    return _chain(Recipe.BLOCK_INTERP, segs, _comp(A, zero), _comp(D, zero))


def proportionality(psi: SymbolFn, chi: SymbolFn, rtol: float = 1e-12) -> complex | None:
    """``c`` with ``chi = c psi`` on canonical term lists, or ``None``."""
    if psi.keys() != chi.keys():
        return None
    ratios = chi.coeffs / psi.coeffs
    c = ratios[0]
    return complex(c) if np.all(np.abs(ratios - c) <= rtol * abs(c)) else None


def weight_schedule(psi: SymbolFn, chi: SymbolFn):
    """``(alpha, |alpha'|_max, kind)`` keeping ``(1 - alpha) psi + alpha chi`` nonzero.

    ``alpha(t) = t`` unless ``chi = c psi`` with real ``c <= 0``; then the zero
    ``1/(1 - c)`` lies in ``(0, 1)`` and ``alpha(t) = (1 - e^{i pi t})/2`` runs
    over the upper semicircle on ``[0, 1]``, which meets the real axis only at
    its endpoints.
    """
    c = proportionality(psi, chi)
    if c is not None and abs(c.imag) <= 1e-12 * max(1.0, abs(c)) and c.real <= 0:
        return (lambda t: 0.5 - 0.5 * np.exp(1j * math.pi * t)), math.pi / 2, "semicircle"
    return (lambda t: t), 1.0, "linear"


def weight_segment(psi: SymbolFn, chi: SymbolFn, phi: AffineMap, p, q, tol: float = UNIT_TOL,
                   seed: int = 0) -> Segment:
    if psi.is_zero or chi.is_zero:
        raise InputError("weights must be nonzero")
    phi = _as_map(phi)
    diff = chi - psi
    if diff.is_zero:
        return Segment(Recipe.WEIGHT_INTERP, lambda s: WeightedSymbol(psi, phi), ZERO)
    alpha, lip, kind = weight_schedule(psi, chi)
    N = weighted_norm_upper_bound(WeightedSymbol(diff, phi), p, q, tol, seed=seed)
    M = Lipschitz(lip * N.value, lip * N.abs_error, N.method.value,
                  f"weight interpolation ({kind})", N.samples_or_nodes)

    def family(s):
        a = complex(alpha(s))
        u = psi.scale(1 - a) + chi.scale(a)
        if u.is_zero:
            raise DomainError("weight path passes through zero")
        return WeightedSymbol(u, phi)

    return Segment(Recipe.WEIGHT_INTERP, family, M,
                   {"psi": psi.to_json(), "chi": chi.to_json(), "phi": phi.to_json(),
                    "schedule": kind})


def path_weight_interpolation(psi, chi, phi, p, q, tol: float = UNIT_TOL,
                              seed: int = 0) -> Homotopy:
    """``u_t = (1 - alpha(t)) psi + alpha(t) chi`` with a fixed symbol ``phi``."""
    _regime(p, q)
    phi = _as_map(phi)
    seg = weight_segment(psi, chi, phi, p, q, tol, seed)
    return _single(seg, WeightedSymbol(psi, phi), WeightedSymbol(chi, phi))


# ---------------------------------------------------------------------------
# chains


def _compact_chain_segments(phi1, phi2, q, tol, seed):
    return [scale_segment(phi1, q, tol, seed).reversed(),
            constants_segment(phi1.b, phi2.b),
            scale_segment(phi2, q, tol, seed)]


def _frame_chain(w1: WeightedSymbol, w2: WeightedSymbol, p, q, tol, seed) -> Homotopy:
    """Chain for ``||A|| = 1`` in the frame of ``A_1``, conjugated by ``C_U T_c (.) C_V``."""
    n = w1.n
    cf = canonical_form(w1.phi.A, tol)
    j, V, U = cf.j, cf.V, cf.U
    H = block_in_frame(w2.phi.A, V, U, j, unit_tol=tol)
    bt1, bt2 = V.conj().T @ w1.phi.b, V.conj().T @ w2.phi.b
    c = bt1[:j].copy()
    Uh = U.conj().T
    weighted = not (w1.is_composition and w2.is_composition)
    if weighted:
        psi1, _ = factor_weight(compose_affine(w1.psi, Uh), c, seed)
        chi1, _ = factor_weight(compose_affine(w2.psi, Uh), c, seed)
    else:
        psi1 = chi1 = SymbolFn.constant(n)
    head = np.zeros(j, dtype=complex)
    B1 = cf.block()
    B2 = np.zeros((n, n), dtype=complex)
    B2[:j, :j] = np.eye(j)
    B2[j:, j:] = H
    f1 = AffineMap(B1, np.concatenate([head, bt1[j:]]))
    f2 = AffineMap(B2, np.concatenate([head, bt2[j:]]))
    one = SymbolFn.constant(n)
    segs = []
    if weighted:
        segs.append(weight_segment(psi1, one, f1, p, q, tol, seed))
    segs.append(_maybe_drop(f1, p, q, tol, seed).reversed())
    segs.extend(block_segments(B1, B2, p, q, tol, seed))
    segs.append(_maybe_drop(f2, p, q, tol, seed))
    if weighted:
        segs.append(weight_segment(one, chi1, f2, p, q, tol, seed))
    recipe = Recipe.TRANSLATION_CONJUGATED_CHAIN if weighted else Recipe.CONJUGATED_CHAIN
    return _chain(recipe, segs, w1, w2, Frame(U, V, c, j))


def _maybe_drop(phi, p, q, tol, seed) -> Segment:
    if not np.any(phi.b):
        return Segment(Recipe.DROP_TRANSLATION, lambda s: _comp(phi.A, 0 * phi.b), ZERO)
    return drop_segment(phi, p, q, tol, seed)


def build_component_path(w1, w2, p, q, assume_bounded: bool = False, tol: float = UNIT_TOL,
                         seed: int = 0) -> Homotopy:
    """A path from ``w1`` to ``w2`` (composition or weighted symbols) in one component.

    Compact compositions use ``C_phi ~ C_phi(0) ~ C_phi2(0) ~ C_phi2``;
    ``||A|| = 1`` uses drop-translation, block interpolation and drop-translation
    conjugated by the SVD frame of ``A_1`` (and ``T_c`` for weighted symbols);
    weighted symbols with ``||A|| < 1`` first deform the weight to 1.

    Raises :class:`DomainError` when the operators lie in different components.
    """
    q_f = float(q)
    _regime(p, q)
    w1, w2 = as_weighted(w1), as_weighted(w2)
    if w1.n != w2.n:
        raise InputError("symbols act on different dimensions")
    if w1.equals(w2, 0.0):
        return _chain(Recipe.CONJUGATED_CHAIN, [], w1, w2)
    composition = w1.is_composition and w2.is_composition
    if composition:
        if not same_component_composition(w1.phi, w2.phi, p, q, tol):
            raise DomainError("operators lie in different path components")
    elif not same_component_weighted(w1, w2, p, q, assume_bounded=assume_bounded, tol=tol):
        raise DomainError("operators lie in different path components")
    if check_contraction(w1.phi.A, tol) < 1.0 - tol:
        segs = _compact_chain_segments(w1.phi, w2.phi, q_f, tol, seed)
        if not composition:
            one = SymbolFn.constant(w1.n)
            segs = ([weight_segment(w1.psi, one, w1.phi, p, q, tol, seed)] + segs
                    + [weight_segment(one, w2.psi, w2.phi, p, q, tol, seed)])
        return _chain(Recipe.CONJUGATED_CHAIN, segs, w1, w2)
    return _frame_chain(w1, w2, p, q, tol, seed)


# ---------------------------------------------------------------------------
# verification


FP_SLACK = 1e-9


@dataclass
class PathReport:
    grid: int
    violations: list
    gaps: list
    bounds: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"grid": self.grid, "ok": self.ok, "violations": self.violations,
                "gaps": self.gaps, "bounds": self.bounds}


def _component_violation(h: Homotopy, w: WeightedSymbol, p, q, tol) -> str | None:
    A0, b0 = h.start.phi.A, h.start.phi.b
    if operator_norm(w.phi.A) > 1.0 + tol:
        return "||A_t|| > 1"
    le = _regime(p, q) is Regime.P_LE_Q
    if h.is_composition:
        if not classify_composition(w.phi, p, q, tol).bounded:
            return "unbounded sample"
        if le and not matrices_equivalent(w.phi.A, A0, tol):
            return "sample left the class [A]"
        return None
    if le:
        if not matrices_equivalent(w.phi.A, A0, tol):
            return "sample left the class [A]"
        if not b_equivalent(A0, w.phi.b, b0, unit_tol=tol):
            return "sample left the class [b]"
        if operator_norm(w.phi.A) >= 1.0 - tol:
            try:
                extract_psi_star(w, tol)
            except DomainError as exc:
                return f"weight does not factor: {exc}"
    return None


def verify_path(h: Homotopy, grid: int = 21, p=2.0, q=2.0, m_scale: float = 1.0,
                seed: int = 0, tol: float = UNIT_TOL, test_points=None,
                monomial_degree: int = 2, screen: int = 4) -> PathReport:
    """Check component stability, Lipschitz gaps and endpoints on a ``t``-grid.

    Gaps between consecutive samples are kernel and monomial test-function
    lower bounds (for ``q != 2`` the ``q``-norm is estimated on the ``screen``
    functions with the largest ``F^2`` gap); a violation is recorded when a
    gap exceeds ``m_scale * M * dt`` plus its estimator error.
    """
    p, q = float(p), float(q)
    ts = np.linspace(0.0, 1.0, grid)
    ws = [h.at(t) for t in ts]
    violations = []
    for k in (0, -1):
        if not ws[k].equals((h.start, h.end)[k], 0.0):
            violations.append({"t": float(ts[k]), "check": "endpoint"})
    for t, w in zip(ts, ws):
        msg = _component_violation(h, w, p, q, tol)
        if msg:
            violations.append({"t": float(t), "check": "component", "detail": msg})
    funcs = monomial_tests(h.n, p, monomial_degree) if monomial_degree else None

    def gap(k):
        return op_distance_lower_bound(ws[k], ws[k + 1], p, q, test_points=test_points,
                                       functions=funcs, seed=seed + 7919 * k,
                                       screen=screen)

    results = quad.parallel_map(gap, range(grid - 1))
    gaps, bounds = [], []
    for k, est in enumerate(results):
        bound = m_scale * h.lipschitz_bound(ts[k], ts[k + 1])
        gaps.append(est.value)
        bounds.append(bound)
        if est.value > bound + est.abs_error + FP_SLACK * (1 + bound):
            violations.append({"t": float(ts[k]), "check": "lipschitz", "gap": est.value,
                               "bound": bound, "abs_error": est.abs_error,
                               "witness": est.witness})
    return PathReport(grid, violations, gaps, bounds)


def sample_path(h: Homotopy, grid: int = 21):
    """``(t, A_t, b_t, psi_t)`` records on a uniform grid."""
    for t in np.linspace(0.0, 1.0, grid):
        w = h.at(t)
        yield {"t": float(t), "A": complex_to_json(w.phi.A), "b": complex_to_json(w.phi.b),
               "psi": w.psi.to_json()}
