import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from focklab.errors import DomainError, InputError, NotBoundedCompatibleError
from focklab.fock import SymbolFn, compose_affine, evaluate, fock_norm, kernel, normalized_kernel
from focklab.linalg import random_contraction, random_unitary
from focklab.operators import (AffineMap, VerdictKind, WeightedSymbol, apply, classify_composition,
                               composition, conjugated_apply, ell_integrability_estimate,
                               ell_quantity, extract_psi_star, fixed_image_projector, m_quantity,
                               m_sup_estimate, normalize, weighted_norm_upper_bound)
from focklab.linalg import fixed_subspace

from conftest import crandn


def random_weighted(rng, n, norm=0.9):
    A = random_contraction(n, rng, norm)
    psi = kernel(crandn(rng, n) * 0.5) + SymbolFn.coordinate(n, int(rng.integers(n))).scale(0.7)
    return WeightedSymbol(psi, AffineMap(A, crandn(rng, n)))


# symbols

def test_weighted_symbol_rejects_zero_weight():
    with pytest.raises(InputError):
        WeightedSymbol(SymbolFn.zero(1), AffineMap([[1]]))


def test_weighted_symbol_json_round_trip(rng):
    w = random_weighted(rng, 2)
    assert WeightedSymbol.from_json(w.to_json()).equals(w, 0)


# normalization

def test_normalize_diagonal_input_is_trivial():
    w = composition(AffineMap(np.diag([0.9, 0.4]), [1, 2j]))
    nz = normalize(w)
    np.testing.assert_allclose(np.abs(nz.U), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(nz.a, [0.9, 0.4])
    np.testing.assert_allclose(np.abs(nz.b_tilde), [1, 2])
    assert nz.psi_tilde.equals(SymbolFn.constant(2))


def test_normalize_nilpotent():
    nz = normalize(AffineMap([[0, 0.5], [0, 0]]))
    np.testing.assert_allclose(nz.a, [0.5, 0], atol=1e-15)
    assert (nz.s, nz.j) == (1, 0)


def test_normalize_fields_consistent(rng):
    w = random_weighted(rng, 3)
    nz = normalize(w)
    np.testing.assert_allclose(nz.V @ np.diag(nz.a) @ nz.U, w.phi.A, atol=1e-12)
    np.testing.assert_allclose(nz.b_tilde, nz.V.conj().T @ w.phi.b, atol=1e-12)
    assert nz.psi_tilde.equals(compose_affine(w.psi, nz.U.conj().T))


def test_normalize_idempotent(rng):
    nz = normalize(random_weighted(rng, 2))
    nz2 = normalize(nz.symbol)
    np.testing.assert_allclose(nz2.a, nz.a, atol=1e-12)
    np.testing.assert_allclose(np.abs(nz2.b_tilde), np.abs(nz.b_tilde), atol=1e-12)


def test_conjugation_identity(rng):
    for _ in range(5):
        n = int(rng.integers(1, 4))
        w = random_weighted(rng, n)
        nz = normalize(w)
        f = normalized_kernel(crandn(rng, n)) + SymbolFn.coordinate(n, 0)
        Z = crandn(rng, 100, n)
        a, b = evaluate(apply(w, f), Z), evaluate(conjugated_apply(nz, f), Z)
        assert np.all(np.abs(a - b) < 1e-10 * (1 + np.abs(a)))


# classification

@pytest.mark.parametrize("p,q", [(2, 2), (1, 3), (3, 1)])
def test_zero_matrix_is_compact(p, q):
    assert classify_composition(AffineMap(np.zeros((2, 2)), [5, 1j]), p, q).kind is VerdictKind.COMPACT


def test_projection_criterion_examples():
    A = np.diag([1, 0.5])
    v = classify_composition(AffineMap(A, [1, 0]), 2, 2)
    assert v.kind is VerdictKind.UNBOUNDED and v.margin >= 0
    v = classify_composition(AffineMap(A, [0, 1]), 2, 2)
    assert v.kind is VerdictKind.BOUNDED_NOT_COMPACT and v.margin >= 0


def test_unitary_unbounded_for_q_less_than_p(rng):
    v = classify_composition(AffineMap(random_unitary(2, rng)), 3, 2)
    assert v.kind is VerdictKind.UNBOUNDED and v.regime.value == "q<p"


def test_expanding_matrix_is_unbounded_not_error():
    assert classify_composition(AffineMap(2 * np.eye(2)), 2, 2).kind is VerdictKind.UNBOUNDED


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1), st.booleans())
def test_classification_invariant_under_unitary_conjugation(seed, le):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    j = int(rng.integers(0, n + 1))
    sig = np.concatenate([np.ones(j), rng.uniform(0, 0.9, n - j)])
    V, U = random_unitary(n, rng), random_unitary(n, rng)
    A = V @ np.diag(sig) @ U
    # b either orthogonal to A(S_A) or not
    b = crandn(rng, n)
    if rng.random() < 0.5:
        b = b - fixed_image_projector(A) @ b
    p, q = (2, 3) if le else (3, 2)
    V0, U0 = random_unitary(n, rng), random_unitary(n, rng)
    v1 = classify_composition(AffineMap(A, b), p, q)
    v2 = classify_composition(AffineMap(V0.conj().T @ A @ U0.conj().T, V0.conj().T @ b), p, q)
    assert v1.kind is v2.kind


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1))
def test_projection_equivalent_to_inner_products(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    j = int(rng.integers(1, n + 1))
    sig = np.concatenate([np.ones(j), rng.uniform(0, 0.9, n - j)])
    A = random_unitary(n, rng) @ np.diag(sig) @ random_unitary(n, rng)
    b = crandn(rng, n)
    if rng.random() < 0.5:
        b = b - fixed_image_projector(A) @ b
    S = fixed_subspace(A)
    inner_zero = all(abs(np.vdot(b, A @ S[:, k])) < 1e-8 for k in range(S.shape[1]))
    proj_zero = np.linalg.norm(fixed_image_projector(A) @ b) < 1e-8
    assert inner_zero == proj_zero


# application

def test_apply_identity(rng):
    f = normalized_kernel(crandn(rng, 2))
    assert apply(composition(AffineMap(np.eye(2))), f).equals(f)


def test_apply_kernel_closed_form(rng):
    w, b = crandn(rng, 2), crandn(rng, 2)
    A = random_contraction(2, rng)
    img = apply(composition(AffineMap(A, b)), normalized_kernel(w))
    expected = kernel(A.conj().T @ w).scale(np.exp(-np.vdot(w, w).real / 2 + np.vdot(w, b)))
    assert img.equals(expected)


def test_apply_weight_on_one(rng):
    c = crandn(rng, 2)
    w = WeightedSymbol(kernel(c), AffineMap(random_contraction(2, rng)))
    assert apply(w, SymbolFn.constant(2)).equals(kernel(c))


def test_apply_linear(rng):
    w = random_weighted(rng, 2)
    f, g = normalized_kernel(crandn(rng, 2)), SymbolFn.coordinate(2, 1)
    assert apply(w, f + g).equals(apply(w, f) + apply(w, g))


# m and l

def test_m_identity_is_one(rng):
    w = composition(AffineMap(np.eye(2)))
    assert m_quantity(w, crandn(rng, 2)) == pytest.approx(1)
    est = m_sup_estimate(w, seed=1)
    assert est.value == pytest.approx(1) and not est.diverging


def test_m_translation_diverges():
    w = composition(AffineMap([[1]], [1]))
    vals = [m_quantity(w, [t]) for t in (1, 4, 16)]
    assert vals[0] < vals[1] < vals[2]
    assert m_sup_estimate(w, seed=0).diverging


def test_m_constant_for_matched_weight(rng):
    b = np.array([0.7 - 0.3j])
    w = WeightedSymbol(kernel(-b), AffineMap([[1]], b))
    for z in crandn(rng, 100, 1):
        assert m_quantity(w, z) == pytest.approx(np.exp(abs(b[0]) ** 2 / 2), rel=1e-10)
    est = m_sup_estimate(w, seed=0)
    assert not est.diverging


def test_ell_full_rank_equals_m(rng):
    w = WeightedSymbol(kernel([0.3, 0.1]), AffineMap(np.diag([0.8, 0.5]), [0.2, 0]))
    z = crandn(rng, 2)
    assert ell_quantity(w, z, 2).value == pytest.approx(m_quantity(w, z))


def test_ell_gaussian_decay_integrable():
    a = 0.6
    w = composition(AffineMap([[a]]))
    assert ell_quantity(w, [2.0], 1).value == pytest.approx(np.exp((a * a - 1) * 4 / 2))
    assert not ell_integrability_estimate(w, 3, 1).diverging


def test_ell_flags_isometric_direction():
    w = composition(AffineMap(np.diag([1.0, 0.5])))
    assert ell_integrability_estimate(w, 3, 1).diverging


def test_ell_requires_normal_form():
    with pytest.raises(DomainError):
        ell_quantity(composition(AffineMap([[0, 0.5], [0.5, 0]])), [1, 1], 2)
    with pytest.raises(DomainError):
        ell_quantity(composition(AffineMap(np.zeros((1, 1)))), [], 2)


# factorization of the weight

def test_psi_star_identity():
    ps = extract_psi_star(AffineMap(np.eye(2)))
    assert ps.j == 2 and ps.psi_star.equals(SymbolFn.constant(2))


def test_psi_star_constructed(rng):
    b1, c = 0.8 + 0.1j, 0.5j
    w = WeightedSymbol(kernel([-b1, c]), AffineMap(np.diag([1, 0.5]), [b1, 0.3]))
    ps = extract_psi_star(w)
    assert ps.j == 1 and ps.residual < 1e-9
    assert ps.psi_star.equals(kernel([0, c]))
    for z2 in crandn(rng, 5):
        assert ps.at([z2]) == pytest.approx(evaluate(kernel([c]), [z2]))


def test_psi_star_rejects_polynomial_head():
    with pytest.raises(NotBoundedCompatibleError):
        extract_psi_star(WeightedSymbol(SymbolFn.coordinate(2, 0), AffineMap(np.eye(2))))


def test_psi_star_composition_needs_zero_head():
    with pytest.raises(NotBoundedCompatibleError):
        extract_psi_star(AffineMap(np.diag([1, 0.5]), [1, 0]))
    ps = extract_psi_star(AffineMap(np.diag([1, 0.5]), [0, 1]))
    assert np.linalg.norm(ps.b_head) < 1e-9


def test_psi_star_needs_unit_norm():
    with pytest.raises(DomainError):
        extract_psi_star(AffineMap(0.5 * np.eye(2)))


# norm upper bound

def test_upper_bound_exact_for_constant_map(rng):
    b = crandn(rng, 2)
    N = weighted_norm_upper_bound(AffineMap(np.zeros((2, 2)), b), 2, 2)
    assert N.value == pytest.approx(np.exp(np.vdot(b, b).real / 2), rel=1e-6)


def test_upper_bound_unitary_is_one(rng):
    N = weighted_norm_upper_bound(AffineMap(random_unitary(2, rng)), 2, 2)
    assert N.value == pytest.approx(1.0)


def test_upper_bound_dominates_kernel_tests(rng):
    for _ in range(4):
        w = random_weighted(rng, 1, 0.8)
        N = weighted_norm_upper_bound(w, 2, 2)
        for v in crandn(rng, 10, 1) * 2:
            img = fock_norm(apply(w, normalized_kernel(v)), 2, method="Quadrature", budget=96)
            assert img.value <= N.upper + img.abs_error


def test_upper_bound_q_less_than_p_with_unit_norm():
    with pytest.raises(DomainError):
        weighted_norm_upper_bound(AffineMap(np.eye(1)), 3, 2)
