import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtelefid.analytics import sigma_from_squeezing
from cvtelefid.channels import (
    GaussianNoiseChannel,
    TeleportationSetup,
    apply_noise,
    apply_noise_two_mode,
    compose_noise,
    simulate_teleportation_channel,
    suggested_teleport_cutoff,
)
from cvtelefid.errors import CutoffTooSmall
from cvtelefid.fock import (
    DensityMatrix,
    FockSpace,
    FockVector,
    coherent_state,
    displacement_operator,
    ecs_state,
    fidelity_pure_mixed,
    partial_trace,
    trace_distance,
)
from cvtelefid.quadrature import Scheme, gaussian_grid


def thermal(mean, levels):
    n = np.arange(levels)
    return mean**n / (1 + mean) ** (n + 1)


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize("variance", [0.1, 1.0])
def test_grid_moments(scheme, variance):
    grid = gaussian_grid(variance, 20, scheme)
    assert grid.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert abs(grid.expect(lambda z: z)) < 1e-12
    assert grid.expect(lambda z: np.abs(z) ** 2).real == pytest.approx(variance, rel=1e-12)
    # fourth moment of a complex Gaussian is 2 variance^2
    assert grid.expect(lambda z: np.abs(z) ** 4).real == pytest.approx(2 * variance**2, rel=1e-10)


def test_grid_centering_and_refinement():
    grid = gaussian_grid(0.5, 10, center=1 - 1j)
    assert grid.expect(lambda z: z) == pytest.approx(1 - 1j)
    assert grid.refined().order == 20
    assert len(grid.pruned(1e-10)) <= len(grid)


def test_high_order_grid_is_finite():
    grid = gaussian_grid(1.0, 320)
    assert np.all(np.isfinite(grid.nodes)) and np.all(grid.weights >= 0)


@pytest.mark.parametrize("sigma", [0.05, 0.5, 1.0])
def test_vacuum_becomes_thermal(sigma):
    space = FockSpace(60)
    ch = GaussianNoiseChannel.gaussian(sigma, 40)
    out = apply_noise(ch, FockVector.fock(0, space).density(), renormalize=False)
    np.testing.assert_allclose(np.diag(out.elements).real, thermal(sigma, 61), atol=1e-12)
    off = out.elements - np.diag(np.diag(out.elements))
    assert np.abs(off).max() < 1e-12


@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.floats(0.01, 1.0))
@settings(max_examples=15, deadline=None)
def test_coherent_fidelity_is_amplitude_independent(alpha, sigma):
    space = FockSpace(60)
    psi = coherent_state(alpha, space)
    order = 20 if sigma <= 0.5 else 40
    out = apply_noise(GaussianNoiseChannel.gaussian(sigma, order), psi.density())
    assert fidelity_pure_mixed(psi, out) == pytest.approx(1 / (1 + sigma), abs=1e-6)


def test_schemes_agree():
    space = FockSpace(40)
    rho = coherent_state(0.8j, space).density()
    a = apply_noise(GaussianNoiseChannel.gaussian(0.3, 30), rho)
    b = apply_noise(GaussianNoiseChannel.gaussian(0.3, 30, Scheme.POLAR_GAUSS_LAGUERRE), rho)
    assert trace_distance(a, b) < 1e-8


def test_factored_and_dense_paths_agree():
    space = FockSpace(30)
    psi = coherent_state(1 - 0.5j, space)
    ch = GaussianNoiseChannel.gaussian(0.4, 10)
    factored = apply_noise(ch, psi.density())
    dense = apply_noise(ch, DensityMatrix(space, psi.density().elements))
    np.testing.assert_allclose(factored.elements, dense.elements, atol=1e-13)


def test_identity_channel():
    rho = coherent_state(1.0, FockSpace(20)).density()
    ch = GaussianNoiseChannel.gaussian(0.0)
    assert ch.is_identity
    assert apply_noise(ch, rho) is rho


def test_output_is_a_state():
    space = FockSpace(50)
    rho = DensityMatrix.mixture([FockVector.fock(2, space), coherent_state(1j, space)], [0.4, 0.6])
    out = apply_noise(GaussianNoiseChannel.gaussian(0.7), rho, renormalize=False)
    assert abs(1 - out.trace()) < 1e-6
    assert out.hermiticity_defect() < 1e-12
    assert out.min_eigenvalue() > -1e-10


def test_displacement_covariance():
    space = FockSpace(50)
    rho = FockVector.fock(1, space).density()
    d = displacement_operator(0.5 + 0.2j, space).elements
    ch = GaussianNoiseChannel.gaussian(0.3)
    left = apply_noise(ch, DensityMatrix(space, d @ rho.elements @ d.conj().T)).elements
    right = d @ apply_noise(ch, rho).elements @ d.conj().T
    assert np.abs(left - right).max() < 1e-8


def test_semigroup():
    rho = FockVector.fock(1, FockSpace(40)).density()
    once = apply_noise(GaussianNoiseChannel.gaussian(compose_noise(0.1, 0.2)), rho)
    twice = apply_noise(GaussianNoiseChannel.gaussian(0.1), apply_noise(GaussianNoiseChannel.gaussian(0.2), rho))
    assert np.abs(once.elements - twice.elements).max() < 1e-8


def test_cutoff_too_small_is_reported():
    rho = coherent_state(2.0, FockSpace(20), tail_tol=1e-6).density()
    with pytest.raises(CutoffTooSmall) as info:
        apply_noise(GaussianNoiseChannel.gaussian(2.0), rho)
    assert info.value.lost > info.value.tolerance


def test_two_mode_application_acts_locally():
    space = FockSpace(25, modes=2)
    psi = ecs_state(1.0, -1.0, space, tail_tol=1e-10)
    ch = GaussianNoiseChannel.gaussian(0.2)
    out = apply_noise_two_mode(ch, psi.density(), 1, trace_tol=1e-5)
    # tracing out the untouched mode is unaffected by the channel
    np.testing.assert_allclose(partial_trace(out, 0).elements, partial_trace(psi.density(), 0).elements,
                               atol=1e-7)
    expected = apply_noise(ch, partial_trace(psi.density(), 1), trace_tol=1e-5)
    assert trace_distance(partial_trace(out, 1), expected) < 1e-7


def test_suggested_cutoffs():
    assert [suggested_teleport_cutoff(e, 1.0) for e in (0.0, 0.3, 0.5, 0.7)] == [51, 53, 58, 70]


@pytest.mark.parametrize("eta", [0.0, 0.5])
def test_teleportation_is_gaussian_noise(eta):
    cutoff = suggested_teleport_cutoff(eta, 1.0)
    space = FockSpace(cutoff)
    rho = coherent_state(1.0, space).density()
    out = simulate_teleportation_channel(TeleportationSetup(eta, cutoff), rho)
    target = apply_noise(GaussianNoiseChannel.gaussian(sigma_from_squeezing(eta), 40), rho)
    assert trace_distance(out, target) < 1e-3
    assert out.trace_deficit < 1e-3


def test_teleportation_rejects_bad_eta():
    with pytest.raises(ValueError):
        TeleportationSetup(1.0, 30)
