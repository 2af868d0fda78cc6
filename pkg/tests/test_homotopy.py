import json
import math

import numpy as np
import pytest

from focklab.errors import DomainError, InputError
from focklab.fock import SymbolFn, kernel
from focklab.homotopy import (Recipe, build_component_path, constants_lipschitz,
                              path_between_constants, path_block_interpolation,
                              path_drop_translation, path_scale_to_constant,
                              path_weight_interpolation, sample_path, verify_path,
                              weight_schedule)
from focklab.linalg import operator_norm, random_unitary
from focklab.operators import AffineMap, WeightedSymbol, classify_composition
from focklab.topology import matrices_equivalent


def test_scale_zero_matrix_is_constant():
    h = path_scale_to_constant(AffineMap(np.zeros((2, 2)), [1, 2]), 2, 2)
    assert h.M == 0
    assert h.at(0.3).equals(h.at(0.9), 0)


def test_scale_endpoints_exact():
    phi = AffineMap([[0.5]], [0.2j])
    h = path_scale_to_constant(phi, 2, 2)
    assert h.at(1).phi.A[0, 0] == 0.5 and h.at(0).phi.A[0, 0] == 0
    np.testing.assert_array_equal(h.at(0).phi.b, phi.b)


def test_scale_requires_strict_contraction():
    with pytest.raises(DomainError):
        path_scale_to_constant(AffineMap(np.eye(1)), 2, 2)


def test_scale_path_verifies():
    h = path_scale_to_constant(AffineMap([[0.5]]), 2, 2)
    assert np.isfinite(h.M) and h.M > 0
    rep = verify_path(h, 21, 2, 2)
    assert rep.ok, rep.violations


def test_negative_control_reports_violations():
    # a nearly tight path, so M/10 is exceeded by the measured gaps
    h = path_scale_to_constant(AffineMap([[0.1]]), 2, 2)
    assert verify_path(h, 21, 2, 2).ok
    assert not verify_path(h, 21, 2, 2, m_scale=0.1).ok


def test_constants_closed_form():
    assert constants_lipschitz([0], [0]).value == 0
    h = path_between_constants([0], [1], 2, 2)
    assert h.M == pytest.approx(2 * math.exp(2.5))
    assert h.recipe is Recipe.CONSTANT_LINE


def test_constants_gap_below_M():
    h = path_between_constants([0], [1], 2, 2)
    rep = verify_path(h, 5, 2, 2)
    assert rep.ok and max(rep.gaps) <= h.M / 4


def test_drop_translation_keeps_boundedness():
    phi = AffineMap(np.diag([1, 0.5]), [0, 1])
    h = path_drop_translation(phi, 2, 2)
    assert np.isfinite(h.M) and h.M > 0
    np.testing.assert_array_equal(h.at(0).phi.b, [0, 0])
    for t in np.linspace(0, 1, 11):
        assert classify_composition(h.at(t).phi, 2, 2).bounded
    assert verify_path(h, 11, 2, 2).ok


def test_drop_translation_zero_b_constant():
    assert path_drop_translation(AffineMap(np.diag([1, 0.5])), 2, 2).M == 0


def test_drop_translation_rejects_unbounded():
    with pytest.raises(DomainError):
        path_drop_translation(AffineMap(np.diag([1, 0.5]), [1, 0]), 2, 2)


def test_block_interpolation_convexity(rng):
    V, U = random_unitary(2, rng), random_unitary(2, rng)
    A, D = V @ np.diag([1, 0]) @ U, V @ np.diag([1, 0.5]) @ U
    h = path_block_interpolation(A, D, 2, 2)
    for t in np.linspace(0, 1, 11):
        At = h.at(t).phi.A
        assert operator_norm(At) <= 1 + 1e-12
        assert matrices_equivalent(At, A)
    assert verify_path(h, 11, 2, 2).ok


def test_block_interpolation_frame_mismatch():
    with pytest.raises(DomainError):
        path_block_interpolation(np.diag([1, 0]), np.diag([0, 1]), 2, 2)


def test_weight_schedules():
    psi = kernel([0.3])
    assert weight_schedule(psi, psi.scale(2))[2] == "linear"
    assert weight_schedule(kernel([0]), kernel([1]))[2] == "linear"
    alpha, lip, kind = weight_schedule(psi, psi.scale(-1))
    assert kind == "semicircle" and lip == pytest.approx(math.pi / 2)
    # the arc avoids the real zero 1/2 of (1 - a) - a
    ts = np.linspace(0, 1, 1001)
    assert min(abs(1 - 2 * alpha(t)) for t in ts) > 0


@pytest.mark.parametrize("chi_of", [lambda s: s.scale(2), lambda s: kernel([1]),
                                    lambda s: s.scale(-1)])
def test_weight_paths_nonzero_and_verified(chi_of):
    psi = kernel([0])
    chi = chi_of(psi)
    phi = AffineMap([[0.5]], [0.3])
    h = path_weight_interpolation(psi, chi, phi, 2, 2)
    for t in np.linspace(0, 1, 21):
        assert not h.at(t).psi.is_zero
    assert h.at(1).psi.equals(chi) and h.at(0).psi.equals(psi)
    assert verify_path(h, 21, 2, 2).ok


def test_weight_path_rejects_zero():
    with pytest.raises(InputError):
        path_weight_interpolation(SymbolFn.zero(1), kernel([0]), AffineMap([[0.5]]), 2, 2)


def test_chain_trivial():
    w = AffineMap(np.diag([1, 0.5]), [0, 1])
    h = build_component_path(w, w, 2, 2)
    assert h.M == 0


def test_chain_compact_compositions(rng):
    h = build_component_path(AffineMap(0.5 * random_unitary(2, rng), [1, 0]),
                             AffineMap([[0, 0.3], [0.2, 0]], [0, 1j]), 2, 2)
    assert [s.recipe for s in h.segments] == [Recipe.SCALE_TO_CONSTANT, Recipe.CONSTANT_LINE,
                                             Recipe.SCALE_TO_CONSTANT]
    assert verify_path(h, 21, 2, 2).ok


def test_chain_unit_norm_compositions(rng):
    V, U = random_unitary(2, rng), random_unitary(2, rng)
    w1 = AffineMap(V @ np.diag([1, 0.5]) @ U, V @ np.array([0, 1]))
    w2 = AffineMap(V @ np.diag([1, 0.2]) @ U, V @ np.array([0, -0.5j]))
    h = build_component_path(w1, w2, 2, 2)
    assert h.recipe is Recipe.CONJUGATED_CHAIN
    recipes = {s.recipe for s in h.segments}
    assert {Recipe.DROP_TRANSLATION, Recipe.BLOCK_INTERP} <= recipes
    assert h.at(0).equals(h.start, 0) and h.at(1).equals(h.end, 0)
    assert verify_path(h, 21, 2, 2).ok


def test_chain_weighted_translation(rng):
    b1 = 0.6
    phi1 = AffineMap(np.diag([1, 0.5]), [b1, 0.4])
    phi2 = AffineMap(np.diag([1, 0.1]), [b1, -1])
    w1 = WeightedSymbol(kernel([-b1, 0.2]), phi1)
    w2 = WeightedSymbol(kernel([-b1, 0]).scale(2j), phi2)
    h = build_component_path(w1, w2, 2, 2, assume_bounded=True)
    assert h.recipe is Recipe.TRANSLATION_CONJUGATED_CHAIN
    assert h.frame.norm_T == pytest.approx(math.exp(b1 ** 2 / 2))
    assert verify_path(h, 21, 2, 2).ok


def test_chain_rejects_different_components():
    with pytest.raises(DomainError):
        build_component_path(AffineMap(np.diag([1, 0])), AffineMap(np.diag([0, 1])), 2, 2)


def test_chain_q_less_than_p_compact():
    h = build_component_path(AffineMap([[0.5]], [1]), AffineMap([[0.2j]]), 3, 2)
    rep = verify_path(h, 11, 3, 2)
    assert rep.ok, rep.violations


def test_serialization_and_samples():
    h = path_scale_to_constant(AffineMap([[0.5]], [1j]), 2, 2)
    js = json.loads(json.dumps(h.to_json()))
    assert js["recipe"] == "ScaleToConstant" and js["M"] == pytest.approx(h.M)
    samples = list(sample_path(h, 5))
    assert [s["t"] for s in samples] == [0, 0.25, 0.5, 0.75, 1]
    json.dumps(samples)


def test_distance_bounded_by_lipschitz_sum(rng):
    h = path_between_constants([0.2], [-0.4j], 2, 2)
    from focklab.certify import op_distance_lower_bound
    assert op_distance_lower_bound(h.start, h.end, 2, 2).value <= h.M
