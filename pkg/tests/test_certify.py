import math

import numpy as np
import pytest

from focklab.certify import (closedness_witness, default_dictionary, kernel_tests,
                             monomial_tests, op_distance_lower_bound, separation_certificate,
                             separation_lower_bound)
from focklab.errors import DomainError, NotBoundedCompatibleError, UnboundedError
from focklab.fock import SymbolFn, kernel
from focklab.homotopy import path_block_interpolation, verify_path
from focklab.linalg import random_unitary
from focklab.operators import AffineMap, WeightedSymbol, weighted_norm_upper_bound


def test_dictionary_shape_and_determinism():
    d = default_dictionary(2, seed=3)
    assert d.shape[1] == 2
    np.testing.assert_array_equal(d, default_dictionary(2, seed=3))
    radii = np.unique(np.round(np.linalg.norm(d, axis=1), 12))
    assert {0.5, 1.0, 2.0, 4.0, 8.0} <= set(radii)


def test_test_function_norms():
    assert all(t.norm_p == 1.0 for t in kernel_tests(default_dictionary(1)))
    mono = monomial_tests(2, 2.0)
    assert len(mono) == 5
    # F^2 norm of z^alpha is sqrt(alpha!)
    assert {round(t.norm_p ** 2, 12) for t in mono} == {1.0, 2.0}


def test_distance_same_symbol_is_zero():
    w = AffineMap([[0.5]], [1])
    assert op_distance_lower_bound(w, w, 2, 2).value == 0


def test_distance_constant_maps_needs_sweep():
    lb = op_distance_lower_bound(AffineMap([[0]]), AffineMap([[0]], [1]), 2, 2,
                                 test_points=np.zeros((1, 1)))
    assert lb.value == 0
    assert op_distance_lower_bound(AffineMap([[0]]), AffineMap([[0]], [1]), 2, 2).value > 0


def test_distance_identity_vs_half():
    lb = op_distance_lower_bound(AffineMap([[1]]), AffineMap([[0.5]]), 2, 2)
    assert lb.value > 0 and lb.witness is not None


def test_distance_q_not_two_reports_error():
    lb = op_distance_lower_bound(AffineMap([[1]]), AffineMap([[0.5]]), 1, 3)
    assert lb.value > 0 and lb.abs_error >= 0


def test_separation_closed_form_example():
    phi = AffineMap(np.diag([1, 0]), [0, 1])
    psi = AffineMap(np.diag([0, 1]))
    val = separation_lower_bound(phi, psi, [32, 0])
    assert val == pytest.approx(0.5 * math.exp(0.5) * (1 - math.exp(-512)))
    assert val == pytest.approx(0.824, abs=1e-3)


def test_separation_certificate_examples():
    c = separation_certificate(AffineMap(np.diag([1, 0]), [0, 1]), AffineMap(np.diag([0, 1])), 2, 2)
    assert c.value >= 0.499
    c = separation_certificate(AffineMap(np.eye(1)), AffineMap([[0.5]]), 1, 2)
    assert c.value >= 0.499


def test_separation_monotone_in_lambda(rng):
    phi, other = AffineMap(np.eye(2)), AffineMap(np.diag([0.3, 0.2]), [0.5, 0])
    xi = np.array([1, 0], dtype=complex)
    vals = [separation_lower_bound(phi, other, lam * xi) for lam in 2.0 ** np.arange(2, 10)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_separation_rejects_equivalent_and_q_less_than_p():
    with pytest.raises(DomainError):
        separation_certificate(AffineMap(np.diag([1, 0])), AffineMap(np.diag([1, 0.5])), 2, 2)
    with pytest.raises(DomainError):
        separation_certificate(AffineMap(np.eye(1)), AffineMap([[0.5]]), 3, 2)
    with pytest.raises(UnboundedError):
        separation_certificate(AffineMap(np.eye(1), [1]), AffineMap([[0.5]]), 2, 2)


def test_distance_small_along_equivalent_path(rng):
    V, U = random_unitary(2, rng), random_unitary(2, rng)
    h = path_block_interpolation(V @ np.diag([1, 0.1]) @ U, V @ np.diag([1, 0.3]) @ U, 2, 2)
    rep = verify_path(h, 11, 2, 2)
    assert rep.ok and max(rep.gaps) < 0.5
    assert op_distance_lower_bound(h.start, h.end, 2, 2).value < 0.5


def test_soundness_against_upper_bound(rng):
    for _ in range(5):
        w1 = AffineMap(0.6 * random_unitary(1, rng), rng.standard_normal(1))
        w2 = AffineMap(0.3 * random_unitary(1, rng), rng.standard_normal(1))
        lb = op_distance_lower_bound(w1, w2, 2, 2)
        N1 = weighted_norm_upper_bound(w1, 2, 2).upper
        N2 = weighted_norm_upper_bound(w2, 2, 2).upper
        assert lb.value <= N1 + N2


def test_closedness_case_one():
    c = closedness_witness(AffineMap(np.eye(1)))
    assert c.case == 1 and c.value == pytest.approx(1.0)
    for a in (0.0, 0.5, 0.9j):
        c = closedness_witness(AffineMap(np.eye(1)), AffineMap([[a]], [0.3]))
        assert c.lower_bound >= 0.9


def test_closedness_case_two():
    w = WeightedSymbol(SymbolFn.coordinate(2, 1), AffineMap(np.diag([1, 0.5])))
    c = closedness_witness(w, AffineMap(np.diag([0.5, 0.5])))
    assert c.case == 2
    assert c.value == pytest.approx(math.exp((0.25 - 1) / 2))
    assert c.lower_bound >= 0.8 * c.value


def test_closedness_weighted_case_one_translation():
    b1 = 0.7
    w = WeightedSymbol(kernel([-b1]), AffineMap(np.eye(1), [b1]))
    c = closedness_witness(w, WeightedSymbol(kernel([0.2]), AffineMap([[0.4]])))
    assert c.value == pytest.approx(math.exp(b1 ** 2 / 2))
    assert c.lower_bound >= 0.8 * c.value


def test_closedness_errors():
    with pytest.raises(NotBoundedCompatibleError):
        closedness_witness(WeightedSymbol(SymbolFn.coordinate(1, 0), AffineMap(np.eye(1))))
    with pytest.raises(DomainError):
        closedness_witness(AffineMap(np.eye(1)), p=3, q=2)
