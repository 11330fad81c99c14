import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from cvtelefid.analytics import ECSSpec, ecs_entanglement_fidelity
from cvtelefid.channels import GaussianNoiseChannel
from cvtelefid.entfid import (
    EntFidResult,
    Method,
    ecs_characteristic,
    ecs_purification,
    entanglement_fidelity_brute,
    entanglement_fidelity_closed,
    entanglement_fidelity_overlap,
    purification_independence_check,
    qubit_purification,
    reduced_entanglement_fidelity,
    spectral_purification,
    trivial_purification,
)
from cvtelefid.errors import DegenerateECS, PurificationMismatch
from cvtelefid.fock import FockSpace, FockVector, coherent_state, displacement_matrix, ecs_state


def test_result_range_is_enforced():
    with pytest.raises(ValueError):
        EntFidResult(1.5, Method.CLOSED_FORM, 0.0)


@pytest.mark.parametrize("z", [0.3, -0.2 + 0.9j, 1.4j])
def test_characteristic_matches_fock_expectation(z):
    space = FockSpace(30, modes=2)
    a, b = 1.1 - 0.2j, -0.7j
    psi = ecs_state(a, b, space)
    d = displacement_matrix(z, space.levels)
    m = psi.as_matrix()
    # <Psi| I (x) D |Psi> = Tr(M^dagger M D^T)
    expected = np.trace(m.conj().T @ m @ d.T)
    assert abs(ecs_characteristic(a, b, z) - expected) < 1e-12


def test_overlap_quadrature_matches_adaptive_cubature():
    a, b, sigma = 0.7, -0.3j, 0.4

    def integrand(y, x):
        z = x + 1j * y
        return abs(ecs_characteristic(a, b, z)) ** 2 * math.exp(-abs(z) ** 2 / sigma) / (math.pi * sigma)

    lim = 8 * math.sqrt(sigma)
    ref, _ = dblquad(integrand, -lim, lim, -lim, lim, epsabs=1e-12)
    res = entanglement_fidelity_overlap(a, b, sigma)
    assert res.value == pytest.approx(ref, abs=1e-9)
    assert res.est_error < 1e-10


@pytest.mark.parametrize("sigma", [0.05, 0.5, 1.0])
def test_overlap_close_to_closed_form_at_large_separation(sigma):
    exact = entanglement_fidelity_overlap(2, -2, sigma)
    closed = entanglement_fidelity_closed(2, -2, sigma)
    assert abs(exact.value - closed.value) <= max(1e-4, closed.est_error)


def test_overlap_needs_high_order_at_alpha_ten():
    coarse = entanglement_fidelity_overlap(10, -10, 1.0, order=20, max_order=20)
    fine = entanglement_fidelity_overlap(10, -10, 1.0)
    closed = ecs_entanglement_fidelity(ECSSpec.symmetric(10), 1.0)
    assert fine.value == pytest.approx(closed, abs=1e-8)
    assert abs(coarse.value - closed) > 1e-6


def test_zero_noise_and_degenerate_inputs():
    assert entanglement_fidelity_overlap(1, -1, 0.0).value == 1.0
    with pytest.raises(DegenerateECS):
        entanglement_fidelity_overlap(1, 1, 0.3)


@pytest.mark.parametrize("sigma", [0.1, 0.6])
def test_pure_coherent_input(sigma):
    space = FockSpace(40)
    gamma = trivial_purification(coherent_state(0.9 - 0.4j, space))
    ch = GaussianNoiseChannel.gaussian(sigma, 40)
    res = entanglement_fidelity_brute(gamma, ch)
    assert res.value == pytest.approx(1 / (1 + sigma), abs=1e-8)


def test_fock_state_input():
    # <1|E_sigma(|1><1|)|1> = sum_k w_k |<1|D|1>|^2 = (1 + sigma^2)/(1+sigma)^3
    sigma = 0.3
    gamma = trivial_purification(FockVector.fock(1, FockSpace(40)))
    res = entanglement_fidelity_brute(gamma, GaussianNoiseChannel.gaussian(sigma, 40))
    assert res.value == pytest.approx((1 + sigma**2) / (1 + sigma) ** 3, abs=1e-9)


def test_brute_force_ecs_matches_overlap():
    gamma = ecs_purification(2, -2, FockSpace(40))
    ch = GaussianNoiseChannel.gaussian(0.5, 40)
    brute = entanglement_fidelity_brute(gamma, ch)
    exact = entanglement_fidelity_overlap(2, -2, 0.5)
    assert abs(brute.value - exact.value) < max(1e-6, brute.est_error + exact.est_error)


def test_reduced_form_matches_brute_force():
    gamma = ecs_purification(1.0, -1.0, FockSpace(30))
    ch = GaussianNoiseChannel.gaussian(0.2)
    brute = entanglement_fidelity_brute(gamma, ch, grid_error=False)
    assert reduced_entanglement_fidelity(gamma.reduced_state(), ch) == pytest.approx(brute.value, abs=1e-12)


def test_reduced_state_of_ecs_purification_is_marginal():
    space = FockSpace(30)
    gamma = ecs_purification(1.5, -1.5, space)
    # the antisymmetric ECS marginal is the equal mixture of |a> and |b> up to overlap terms
    psi = ecs_state(1.5, -1.5, space.with_modes(2))
    m = psi.as_matrix()
    np.testing.assert_allclose(gamma.reduced_state().elements, m.T @ m.conj(), atol=1e-15)
    assert gamma.reduced_state().trace() == pytest.approx(1.0)


def test_purifications_give_the_same_fidelity():
    space = FockSpace(30)
    qubit = qubit_purification([1.0, -1.0j], [0.3, 0.7], space)
    rho_b = qubit.reduced_state()
    spectral = spectral_purification(rho_b)
    rot = np.array([[0, 1], [1, 0], [0, 0]], dtype=complex)
    embedded = qubit.with_isometry(rot)
    report = purification_independence_check(rho_b, [qubit, spectral, embedded],
                                             GaussianNoiseChannel.gaussian(0.4))
    assert report.consistent and not report.approximate
    assert report.max_gap < 1e-10


def test_mismatched_purifications_are_rejected():
    space = FockSpace(30)
    a = qubit_purification([1.0, -1.0], [0.5, 0.5], space)
    b = qubit_purification([1.0, -1.0], [0.4, 0.6], space)
    with pytest.raises(PurificationMismatch):
        purification_independence_check(a.reduced_state(), [a, b], GaussianNoiseChannel.gaussian(0.1))


def test_loose_reduced_tolerance_is_flagged():
    space = FockSpace(30)
    a = qubit_purification([1.0, -1.0], [0.5, 0.5], space)
    b = qubit_purification([1.0, -1.0], [0.5 + 1e-5, 0.5 - 1e-5], space)
    report = purification_independence_check(a.reduced_state(), [a, b], GaussianNoiseChannel.gaussian(0.1),
                                             reduced_tol=1e-4)
    assert report.approximate and report.consistent


def test_non_isometry_rejected():
    qubit = qubit_purification([1.0, -1.0], [0.5, 0.5], FockSpace(20))
    with pytest.raises(ValueError):
        qubit.with_isometry(np.ones((3, 2)))
