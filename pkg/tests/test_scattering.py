"""Scattering matrices: propagation, rearrangement, closed form, probabilities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinpoint import (
    CLOSED_FORM_PERMUTATION,
    InvalidTransferError,
    ParameterDomainError,
    SpectralSingularityError,
    channel_index,
    channel_probabilities,
    closed_form_flip_smatrix,
    closed_form_to_grouped,
    compose,
    defect_matrix,
    momentum_from_energy,
    propagation,
    r_flip_defect,
    rtilde_flip_defect,
    transfer_to_scattering,
)
from spinpoint.scattering import _solve_rearrangement

k_values = st.floats(min_value=0.05, max_value=30)
lengths = st.floats(min_value=0.0, max_value=5.0)


def test_propagation_zero_length_identity():
    assert np.allclose(propagation(1.7, 0.0), np.eye(4))


def test_propagation_half_turn():
    m = propagation(np.pi, 1.0)
    assert np.allclose(m, -np.eye(4), atol=1e-12)


def test_propagation_quarter_turn_block():
    m = propagation(1.0, np.pi / 2)
    block = np.array([[0, 1], [-1, 0]])
    assert np.allclose(m[:2, :2], block, atol=1e-12)
    assert np.allclose(m[2:, 2:], block, atol=1e-12)


def test_propagation_domain_errors():
    with pytest.raises(ParameterDomainError):
        propagation(0.0, 1.0)
    with pytest.raises(ParameterDomainError):
        propagation(1.0, -0.1)


@given(k=k_values, l1=lengths, l2=lengths)
@settings(max_examples=100)
def test_propagation_composes_additively(k, l1, l2):
    lhs = propagation(k, l1) @ propagation(k, l2)
    assert np.abs(lhs - propagation(k, l1 + l2)).max() < 1e-12


def test_identity_transfer_is_perfect_transmission():
    s = transfer_to_scattering(np.eye(4), 1.3)
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[1, 3] = expected[2, 0] = expected[3, 1] = 1.0
    assert np.allclose(s.matrix, expected, atol=1e-14)


def test_closed_form_r_zero_full_transmission():
    s = closed_form_flip_smatrix(2.0, 0.0)
    # in its own ordering "4" positions sit at the (left,right) same-spin pairs
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = expected[2, 3] = expected[3, 2] = 1.0
    assert np.array_equal(s, expected)


def test_closed_form_kr_two_squared_moduli():
    s = closed_form_flip_smatrix(2.0, 1.0)
    assert np.allclose(np.abs(s) ** 2, 0.25, atol=1e-14)


@given(k=k_values, r=st.floats(min_value=-5, max_value=5))
@settings(max_examples=100)
def test_closed_form_row_norm_identity(k, r):
    # k^4 r^4 + 16 + 8 k^2 r^2 = (k^2 r^2 + 4)^2
    u = (k * r) ** 2
    assert u * u + 16 + 8 * u == pytest.approx((u + 4.0) ** 2, rel=1e-12)
    s = closed_form_flip_smatrix(k, r)
    assert np.abs(s.conj().T @ s - np.eye(4)).max() < 1e-12


@pytest.mark.parametrize("k,r", [(0.4, 0.9), (2.0, 2.0), (6.3, -1.1)])
def test_transfer_route_matches_closed_form_exactly(k, r):
    s = transfer_to_scattering(defect_matrix(r_flip_defect(r)), k)
    expected = closed_form_to_grouped(closed_form_flip_smatrix(k, r))
    assert np.abs(s.matrix - expected).max() < 1e-12


def test_frozen_permutation_value():
    assert CLOSED_FORM_PERMUTATION == (0, 2, 1, 3)


def test_probabilities_r_zero_incident_left_up():
    s = transfer_to_scattering(defect_matrix(r_flip_defect(0.0)), 1.0)
    assert np.allclose(s.probabilities("left_up"), [0, 0, 1, 0], atol=1e-14)


def test_probabilities_kr_two_quarters():
    s = transfer_to_scattering(defect_matrix(r_flip_defect(0.5)), 4.0)
    assert np.allclose(s.probabilities("left_up"), 0.25, atol=1e-12)


@given(k=k_values, r=st.floats(min_value=-3, max_value=3))
@settings(max_examples=60)
def test_flip_probability_closed_form_r_defect(k, r):
    # total spin flip for a single derivative-coupling defect: 8k^2r^2/(k^2r^2+4)^2
    s = transfer_to_scattering(defect_matrix(r_flip_defect(r)), k)
    p = s.probabilities("left_up")
    expected = 8 * (k * r) ** 2 / ((k * r) ** 2 + 4) ** 2
    assert p[1] + p[3] == pytest.approx(expected, abs=1e-12)


@given(k=k_values, rt=st.floats(min_value=-3, max_value=3))
@settings(max_examples=60)
def test_flip_probability_value_coupling_defect(k, rt):
    # hand-derived from the matching equations: 8k^2 rt^2/(4k^2 + rt^2)^2
    s = transfer_to_scattering(defect_matrix(rtilde_flip_defect(rt)), k)
    p = s.probabilities("left_up")
    expected = 8 * (k * rt) ** 2 / (4 * k * k + rt * rt) ** 2
    assert p[1] + p[3] == pytest.approx(expected, abs=1e-12)


def test_flip_probability_table_reciprocity_under_sign_and_spin_swap():
    spin_swap = [1, 0, 3, 2]
    for k, r in [(0.7, 0.4), (3.0, 1.5)]:
        p_plus = np.abs(transfer_to_scattering(defect_matrix(r_flip_defect(r)), k).matrix)
        p_minus = np.abs(transfer_to_scattering(defect_matrix(r_flip_defect(-r)), k).matrix)
        assert np.abs(p_plus - p_minus[np.ix_(spin_swap, spin_swap)]).max() < 1e-12


def test_random_conserving_products_yield_unitary_s():
    rng = np.random.default_rng(11)
    for _ in range(25):
        k = rng.uniform(0.1, 20.0)
        transfer = compose(
            [
                defect_matrix(r_flip_defect(rng.uniform(-1, 1))),
                propagation(k, rng.uniform(0.1, 2.0)),
                defect_matrix(rtilde_flip_defect(rng.uniform(-1, 1))),
                propagation(k, rng.uniform(0.1, 2.0)),
            ]
        )
        s = transfer_to_scattering(transfer, k)
        assert s.unitarity_residual() < 1e-11


def test_non_conserving_transfer_rejected():
    with pytest.raises(InvalidTransferError):
        transfer_to_scattering(2.0 * np.eye(4), 1.0)


def test_singular_rearrangement_raises():
    # Crafted amplitude transfer whose outgoing-side system is rank deficient.
    tt = np.zeros((4, 4), dtype=complex)
    tt[0, 1] = 1.0
    tt[2, 3] = 1.0
    with pytest.raises(SpectralSingularityError) as excinfo:
        _solve_rearrangement(tt, 1.5)
    assert excinfo.value.k == 1.5


def test_apply_conserves_flux():
    s = transfer_to_scattering(defect_matrix(r_flip_defect(0.8)), 2.2)
    amps = s.apply([1.0, 0.5j, 0.0, -0.25])
    assert abs(amps.flux_mismatch()) < 1e-12


def test_channel_index_lookup():
    assert channel_index("left_up") == 0
    assert channel_index(3) == 3
    with pytest.raises(ParameterDomainError):
        channel_index("up_left")
    with pytest.raises(ParameterDomainError):
        channel_index(7)


def test_momentum_from_energy():
    assert momentum_from_energy(4.0) == pytest.approx(2.0)
    with pytest.raises(ParameterDomainError):
        momentum_from_energy(0.0)


def test_channel_probabilities_accepts_raw_matrix():
    s = closed_form_flip_smatrix(2.0, 1.0)
    assert np.allclose(channel_probabilities(s, 0), 0.25, atol=1e-14)
