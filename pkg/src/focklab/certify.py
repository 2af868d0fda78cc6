"""Numerical certificates for distances between operators.

Every value returned here is a lower bound on an operator-norm distance,
obtained from explicit test functions ``f`` through

    ||W_1 - W_2|| >= ||(W_1 - W_2) f||_{n,q} / ||f||_{n,p}.

Normalized kernels ``k_w`` have ``||k_w||_{n,p} = 1`` for every ``p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .errors import DomainError, UnboundedError
from .fock import (NormEstimate, NormMethod, SymbolFn, exact_l2_norm, fock_norm,
                   monomial_norm, normalized_kernel)
from .linalg import UNIT_TOL, fixed_subspace
from .operators import (AffineMap, Regime, _regime, apply, as_weighted, classify_composition,
                        complex_to_json, extract_psi_star)
from .topology import matrices_equivalent

SHELLS = (0.5, 1.0, 2.0, 4.0, 8.0)
PER_SHELL = 16
MC_IMAGE_SAMPLES = 1 << 15


def default_dictionary(n: int, seed: int = 0, shells=SHELLS, per_shell: int = PER_SHELL) -> np.ndarray:
    """Kernel test points: ``0`` plus ``per_shell`` seeded directions on each shell."""
    rng = np.random.default_rng(seed)
    pts = [np.zeros(n, dtype=complex)]
    for r in shells:
        g = quad.complex_normal(rng, (per_shell, n))
        pts.extend(r * g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.array(pts)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A test function with an upper bound on its ``F^p`` norm."""
    f: SymbolFn
    norm_p: float
    label: str
    point: np.ndarray | None = None


def kernel_tests(points) -> list[TestFunction]:
    return [TestFunction(normalized_kernel(w), 1.0, "k_w", np.asarray(w, dtype=complex))
            for w in np.atleast_2d(points)]


def monomial_tests(n: int, p: float, degree: int = 2) -> list[TestFunction]:
    """``z^alpha`` for ``1 <= |alpha| <= degree`` with their exact ``F^p`` norms."""
    out = []
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            alpha = [0] * n
            for i in combo:
                alpha[i] += 1
            out.append(TestFunction(SymbolFn.monomial(n, alpha), monomial_norm(alpha, p),
                                    f"z^{tuple(alpha)}"))
    return out


def image_norm(g: SymbolFn, q: float, seed: int = 0) -> NormEstimate:
    """``||g||_{n,q}``: closed form for ``q = 2``, quadrature for ``n = 1``, else Monte Carlo."""
    if g.is_zero:
        return NormEstimate(0.0, 0.0, NormMethod.EXACT_GRAM, 0)
    if q == 2.0:
        return exact_l2_norm(g)
    if g.n == 1:
        return fock_norm(g, q, method="Quadrature")
    return fock_norm(g, q, method="MonteCarlo", budget=MC_IMAGE_SAMPLES, seed=seed)


@dataclass(frozen=True)
class DistanceBound(NormEstimate):
    """Lower bound on ``||W_1 - W_2||``; ``value - abs_error`` is certified."""
    witness: dict = field(default_factory=dict)

    @property
    def certified(self) -> float:
        return max(0.0, self.value - self.abs_error)

    def to_json(self) -> dict:
        return {**super().to_json(), "certified": self.certified, "witness": self.witness}


def op_distance_lower_bound(w1, w2, p, q, test_points=None, functions=None,
                            seed: int = 0, screen: int | None = None) -> DistanceBound:
    """``max_f ||(W_1 - W_2) f||_q / ||f||_p`` over kernel test points and extra functions.

    ``test_points`` defaults to :func:`default_dictionary`. ``functions`` are
    additional :class:`TestFunction` objects (e.g. :func:`monomial_tests`).
    With ``screen = k`` and ``q != 2`` the ``q``-norm is only estimated for
    the ``k`` functions with the largest exact ``F^2`` ratio; the maximum over
    a subset is still a lower bound.
    """
    w1, w2 = as_weighted(w1), as_weighted(w2)
    p, q = float(p), float(q)
    _regime(p, q)
    if test_points is None:
        test_points = default_dictionary(w1.n, seed)
    tests = kernel_tests(test_points) + list(functions or [])
    diffs = [apply(w1, t.f) - apply(w2, t.f) for t in tests]
    order = range(len(tests))
    if screen is not None and q != 2.0 and len(tests) > screen:
        l2 = [exact_l2_norm(d).value / t.norm_p for d, t in zip(diffs, tests)]
        order = sorted(np.argsort(l2)[::-1][:screen])
    best = None
    for k in order:
        t = tests[k]
        est = image_norm(diffs[k], q, seed + k)
        val, err = est.value / t.norm_p, est.abs_error / t.norm_p
        if best is None or val > best[0]:
            best = (val, err, est, t)
    val, err, est, t = best
    witness = {"label": t.label, "norm_p": t.norm_p}
    if t.point is not None:
        witness["w"] = complex_to_json(t.point)
    return DistanceBound(val, err, est.method, len(tests), est.seed, witness)


# ---------------------------------------------------------------------------
# separation of distinct components


LAMBDA_EXPONENTS = tuple(range(13))  # |lambda| = 1, 2, ..., 4096
SEPARATION_TARGET = 0.5 - 1e-6


@dataclass(frozen=True)
class SeparationCertificate:
    value: float
    xi: list
    lam: list
    side: str
    gap: float
    evaluations: int

    def to_json(self) -> dict:
        return {"value": self.value, "xi": self.xi, "lambda": self.lam, "side": self.side,
                "gap": self.gap, "evaluations": self.evaluations}


def _best_direction(A, D, tol):
    """Unit ``xi`` in ``S_A`` maximizing ``|A xi - D xi|``."""
    S = fixed_subspace(A, tol)
    if S.shape[1] == 0:
        return None, 0.0
    _, s, vh = np.linalg.svd((A - D) @ S)
    return S @ vh[0].conj(), float(s[0])


def separation_lower_bound(phi_iso: AffineMap, phi_other: AffineMap, z) -> float:
    """``1/2 exp((|phi(z)|^2 - |z|^2)/2) (1 - exp(-|phi(z) - phi2(z)|^2/2))``."""
    u, v = phi_iso(z), phi_other(z)
    lead = (np.vdot(u, u).real - np.vdot(z, z).real) / 2
    d2 = np.vdot(u - v, u - v).real
    return float(0.5 * math.exp(lead) * -math.expm1(-d2 / 2))


def separation_certificate(phi1, phi2, p, q, tol: float = UNIT_TOL) -> SeparationCertificate:
    """Certified ``||C_phi1 - C_phi2|| >= value`` for non-equivalent bounded symbols, ``p <= q``.

    ``xi`` is taken in the fixed subspace of whichever matrix gives the larger
    ``|A xi - D xi|``; ``lambda`` runs over ``|lambda| = 2^k`` (k <= 12) with
    four fixed phases plus the phase aligning ``lambda (A - D) xi`` with
    ``b - e``, stopping early once the value reaches ``1/2 - 1e-6``.
    """
    phi1 = phi1.phi if hasattr(phi1, "psi") else phi1
    phi2 = phi2.phi if hasattr(phi2, "psi") else phi2
    if _regime(p, q) is Regime.Q_LT_P:
        raise DomainError("the separation bound is a p <= q statement")
    for ph in (phi1, phi2):
        v = classify_composition(ph, p, q, tol)
        if not v.bounded:
            raise UnboundedError(f"composition operator is unbounded: {v.reason}")
    if matrices_equivalent(phi1.A, phi2.A, tol):
        raise DomainError("matrices are equivalent; operators lie in the same component")
    x1, g1 = _best_direction(phi1.A, phi2.A, tol)
    x2, g2 = _best_direction(phi2.A, phi1.A, tol)
    if g1 >= g2:
        iso, other, xi, gap, side = phi1, phi2, x1, g1, "phi1"
    else:
        iso, other, xi, gap, side = phi2, phi1, x2, g2, "phi2"
    u = (iso.A - other.A) @ xi
    v = iso.b - other.b
    phases = [1, -1, 1j, -1j]
    c = np.vdot(u, v)
    if abs(c) > 0:
        phases.append(c / abs(c))
    best = (-1.0, 0j)
    count = 0
    for k in LAMBDA_EXPONENTS:
        for ph in phases:
            lam = (2.0 ** k) * ph
            val = separation_lower_bound(iso, other, lam * xi)
            count += 1
            if val > best[0]:
                best = (val, lam)
        if best[0] >= SEPARATION_TARGET:
            break
    return SeparationCertificate(best[0], complex_to_json(xi), complex_to_json(best[1]),
                                 side, gap, count)


# ---------------------------------------------------------------------------
# closedness of the class with ||A|| = 1


@dataclass(frozen=True)
class ClosednessWitness:
    """``value = m_{(0, z0')}(psi~, phi~)``, a uniform lower bound on the distance to compact-type operators."""
    value: float
    case: int
    z0_tail: list
    j: int
    lower_bound: float | None = None

    def to_json(self) -> dict:
        return {"value": self.value, "case": self.case, "z0_tail": self.z0_tail, "j": self.j,
                "lower_bound": self.lower_bound}


def _witness_value(ps, z_tail) -> float:
    nz = ps.normalization
    img = nz.a[ps.j:] * z_tail + nz.b_tilde[ps.j:]
    lead = (np.vdot(ps.b_head, ps.b_head).real + np.vdot(img, img).real
            - np.vdot(z_tail, z_tail).real) / 2
    return float(abs(ps.at(z_tail)) * math.exp(lead))


def closedness_witness(w, w_compact=None, p=2.0, q=2.0, tol: float = UNIT_TOL,
                       seed: int = 0, test_lambdas=(8.0, 16.0, 32.0)) -> ClosednessWitness:
    """Positive lower bound on ``||W_{psi, phi} - W||`` over all ``W`` with ``||A_W|| < 1``.

    Case 1 uses ``z0' = 0`` when ``psi~_*(0) != 0``; otherwise unit vectors and
    then seeded random points are searched for ``psi~_*(z0') != 0`` (Case 2).
    If ``w_compact`` is given, the kernel lower bound against it at the proof's
    test points is attached as ``lower_bound``.
    """
    if _regime(p, q) is Regime.Q_LT_P:
        raise DomainError("closedness witnesses are a p <= q statement")
    w = as_weighted(w)
    ps = extract_psi_star(w, tol, seed)
    j, n = ps.j, w.n
    zero = np.zeros(n - j, dtype=complex)
    scale = max(1e-300, float(np.max(np.abs(ps.psi_star.coeffs))))
    if abs(ps.at(zero)) > 1e-12 * scale:
        case, z0 = 1, zero
    else:
        case = 2
        rng = np.random.default_rng(seed)
        cands = list(np.eye(n - j, dtype=complex)) + list(quad.complex_normal(rng, (64, n - j)))
        z0 = next((c for c in cands if abs(ps.at(c)) > 1e-12 * scale), None)
        if z0 is None:
            raise DomainError("could not find a point where psi_* is nonzero")
    value = _witness_value(ps, z0)
    lb = None
    if w_compact is not None:
        pts = closedness_test_points(w, ps, z0, test_lambdas)
        lb = op_distance_lower_bound(w, w_compact, p, q, test_points=pts, seed=seed).certified
    return ClosednessWitness(value, case, complex_to_json(z0), j, lb)


def closedness_test_points(w, ps, z0_tail, lambdas=(8.0, 16.0, 32.0)) -> np.ndarray:
    """Kernel points ``phi(U^* zeta)``, ``zeta = lambda (1_[j], 0) + (0, z0')``, from the proof."""
    w = as_weighted(w)
    nz = ps.normalization
    j, n = ps.j, w.n
    xi = np.concatenate([np.ones(j), np.zeros(n - j)]).astype(complex)
    shift = np.concatenate([np.zeros(j), np.asarray(z0_tail, dtype=complex)])
    pts = []
    for lam in lambdas:
        for ph in (1, -1, 1j, -1j):
            zeta = lam * ph * xi + shift
            pts.append(w.phi(nz.U.conj().T @ zeta))
    return np.array(pts)
