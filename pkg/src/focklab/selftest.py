"""Quick invariant suite behind ``focklab selftest``."""

from __future__ import annotations

import numpy as np

from .certify import closedness_witness, op_distance_lower_bound, separation_certificate
from .errors import NotBoundedCompatibleError
from .fock import SymbolFn, evaluate, fock_norm, kernel, normalized_kernel
from .homotopy import build_component_path, path_scale_to_constant, verify_path
from .linalg import random_contraction, random_unitary
from .operators import (AffineMap, VerdictKind, WeightedSymbol, apply, classify_composition,
                        conjugated_apply, extract_psi_star, normalize)
from .topology import matrices_equivalent


def _kernel_norm(rng):
    w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    f = normalized_kernel(w)
    return abs(fock_norm(f, 2).value - 1) < 1e-12 and abs(
        fock_norm(f, 1, method="Quadrature").value - 1) < 1e-6


def _classification(rng):
    cases = [((np.zeros((2, 2)), [1, 0]), 2, 2, VerdictKind.COMPACT),
             ((np.diag([1, 0.5]), [0, 1]), 2, 2, VerdictKind.BOUNDED_NOT_COMPACT),
             ((np.diag([1, 0.5]), [1, 0]), 2, 2, VerdictKind.UNBOUNDED),
             ((np.eye(2), [0, 0]), 4, 2, VerdictKind.UNBOUNDED),
             ((0.5 * np.eye(2), [3, 0]), 4, 2, VerdictKind.COMPACT)]
    return all(classify_composition(AffineMap(*phi), p, q).kind is k for phi, p, q, k in cases)


def _conjugation(rng):
    n = 2
    A = random_contraction(n, rng, 0.9)
    w = WeightedSymbol(kernel([0.3, -0.2j]) + SymbolFn.coordinate(n, 0), AffineMap(A, [0.4, 1j]))
    f = normalized_kernel([0.5, 0.1]) * SymbolFn.coordinate(n, 1)
    nz = normalize(w)
    z = rng.standard_normal((20, n)) + 1j * rng.standard_normal((20, n))
    a, b = evaluate(apply(w, f), z), evaluate(conjugated_apply(nz, f), z)
    return bool(np.all(np.abs(a - b) < 1e-10 * (1 + np.abs(a))))


def _equivalence(rng):
    V, U = random_unitary(3, rng), random_unitary(3, rng)
    A = V @ np.diag([1, 0.5, 0.2]) @ U
    D = V @ np.diag([1, 0.1, 0.0]) @ U
    return matrices_equivalent(A, D) and not matrices_equivalent(A, V @ np.diag([1, 1, 0]) @ U)


def _separation(rng):
    c = separation_certificate(AffineMap(np.diag([1, 0]), [0, 1]), AffineMap(np.diag([0, 1])), 2, 2)
    return c.value >= 0.499


def _psi_star(rng):
    ok = extract_psi_star(AffineMap(np.diag([1, 0.5]), [0, 1])).residual < 1e-9
    try:
        extract_psi_star(WeightedSymbol(SymbolFn.coordinate(2, 0), AffineMap(np.eye(2))))
        return False
    except NotBoundedCompatibleError:
        return ok


def _closedness(rng):
    w = AffineMap(np.eye(1))
    c = closedness_witness(w, AffineMap(np.array([[0.5]])))
    return abs(c.value - 1) < 1e-12 and c.lower_bound >= 0.8


def _path(rng):
    h = path_scale_to_constant(AffineMap(np.array([[0.5]])), 2, 2)
    return verify_path(h, 11, 2, 2).ok


def _chain(rng):
    h = build_component_path(AffineMap(np.diag([1, 0.5]), [0, 1]), AffineMap(np.diag([1, 0.2])), 2, 2)
    return verify_path(h, 11, 2, 2).ok


def _distance(rng):
    lb = op_distance_lower_bound(AffineMap(np.eye(1)), AffineMap(0.5 * np.eye(1)), 2, 2)
    return lb.value > 0 and lb.value <= 2 + 1e-12


CHECKS = [("kernel normalization", _kernel_norm), ("classification", _classification),
          ("conjugation identity", _conjugation), ("equivalence", _equivalence),
          ("separation", _separation), ("weight factorization", _psi_star),
          ("closedness witness", _closedness), ("scale path", _path),
          ("conjugated chain", _chain), ("distance lower bound", _distance)]


def run_selftest(seed: int = 0) -> dict:
    results = []
    for name, check in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            ok, err = bool(check(rng)), None
        except Exception as exc:  # a crashing check is a failed check
            ok, err = False, f"{type(exc).__name__}: {exc}"
        rec = {"name": name, "passed": ok}
        if err:
            rec["error"] = err
        results.append(rec)
    failed = sum(not r["passed"] for r in results)
    return {"passed": len(results) - failed, "failed": failed, "checks": results}
