"""Gaussian displacement noise and a direct simulation of CV teleportation.

Noise variances follow the convention that vacuum noise has variance 1/2:
the channel ``E_sigma`` displaces by a complex Gaussian ``z`` with
``<|z|^2> = sigma``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffTooSmall, GridTooCoarse, SpaceMismatch
from .fock import (
    DensityMatrix,
    FockSpace,
    _require_modes,
    displacement_matrices,
    two_mode_squeezed_state,
)
from .quadrature import QuadratureGrid, Scheme, gaussian_grid

log = logging.getLogger(__name__)

TRACE_TOL = 1e-6
PROB_TOL = 1e-3
DEFAULT_ORDER = 20
# bounds memory of the stacked displacement matrices
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True, eq=False)
class GaussianNoiseChannel:
    """Random-displacement channel ``rho -> sum_k w_k D(z_k) rho D(z_k)^dagger``.

    ``sigma`` is the variance ``<|z|^2>`` of the displacement (vacuum = 1/2).
    For ``sigma == 0`` the grid is a single node at the origin.
    """

    sigma: float
    grid: QuadratureGrid = field(repr=False)

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    @classmethod
    def gaussian(cls, sigma: float, order: int = DEFAULT_ORDER,
                 scheme: Scheme | str = Scheme.GAUSS_HERMITE_CARTESIAN) -> GaussianNoiseChannel:
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        if sigma == 0:
            grid = QuadratureGrid(np.zeros(1), np.ones(1), Scheme(scheme), 1, 0.0)
        else:
            grid = gaussian_grid(sigma, order, scheme)
        return cls(float(sigma), grid)

    @property
    def is_identity(self) -> bool:
        return self.sigma == 0

    def refined(self) -> GaussianNoiseChannel:
        if self.is_identity:
            return self
        return GaussianNoiseChannel(self.sigma, self.grid.refined())

    def kraus_weights(self) -> np.ndarray:
        return self.grid.weights


def _chunks(n_nodes: int, levels: int):
    size = max(1, _CHUNK_ELEMENTS // (levels * levels))
    for start in range(0, n_nodes, size):
        yield slice(start, min(n_nodes, start + size))


def apply_noise_local(channel: GaussianNoiseChannel, rho, dims: tuple[int, ...], target: int,
                      *, factored: bool = False) -> np.ndarray:
    """Apply ``E_sigma`` to one tensor factor of a (possibly multipartite) state.

    ``rho`` is a dense matrix or, with ``factored=True``, a factor ``F`` with
    ``rho = F F^dagger``. Factor ``target`` of ``dims`` must be a Fock mode.
    Returns the unnormalized output in the same representation (a factored
    output has ``len(grid) * rank`` columns).
    """
    levels = dims[target]
    before = int(np.prod(dims[:target], dtype=int))
    after = int(np.prod(dims[target + 1:], dtype=int))
    grid = channel.grid
    rho = np.asarray(rho, dtype=complex)

    if factored:
        rank = rho.shape[1]
        f = rho.reshape(before, levels, after, rank)
        cols = []
        for sl in _chunks(len(grid), levels):
            ds = displacement_matrices(grid.nodes[sl], levels)
            out = np.einsum("kbc,acdr->kabdr", ds, f)
            out *= np.sqrt(grid.weights[sl])[:, None, None, None, None]
            cols.append(out)
        w = np.concatenate(cols, axis=0)
        # columns ordered (node, rank)
        return np.moveaxis(w, 0, 3).reshape(before * levels * after, -1)

    dim = before * levels * after
    if before == after == 1:
        acc = np.zeros((levels, levels), dtype=complex)
        for sl in _chunks(len(grid), levels):
            ds = displacement_matrices(grid.nodes[sl], levels)
            acc += np.einsum("k,kij,klj->il", grid.weights[sl], ds @ rho, ds.conj(), optimize=True)
        return acc
    r = rho.reshape(before, levels, after, before, levels, after)
    acc = np.zeros_like(r)
    for sl in _chunks(len(grid), levels):
        ds = displacement_matrices(grid.nodes[sl], levels)
        for d, wk in zip(ds, grid.weights[sl]):
            left = np.einsum("bc,acdefg->abdefg", d, r)
            acc += wk * np.einsum("abdefg,hf->abdehg", left, d.conj())
    return acc.reshape(dim, dim)


def _finish(space: FockSpace, out, factored: bool, trace_in: float, trace_tol: float,
            renormalize: bool) -> DensityMatrix:
    if factored:
        trace_out = float(np.sum(np.abs(out) ** 2))
    else:
        trace_out = float(np.trace(out).real)
    deficit = 1.0 - trace_out / trace_in
    if deficit > trace_tol:
        raise CutoffTooSmall(
            f"noise channel leaked {deficit:.3g} of the trace past cutoff {space.cutoff}",
            lost=deficit, tolerance=trace_tol,
        )
    if renormalize:
        if deficit > 0:
            log.debug("renormalizing channel output, trace deficit %.3g", deficit)
        out = out / (math.sqrt(trace_out) if factored else trace_out)
    elif trace_in != 1.0:
        out = out / (math.sqrt(trace_in) if factored else trace_in)
    kwargs = {"factor": out} if factored else {"elements": out}
    return DensityMatrix(space, trace_deficit=deficit, normalized=renormalize, **kwargs)


def _use_factor(rho: DensityMatrix, n_nodes: int) -> bool:
    f = rho.factor
    return f is not None and f.shape[1] * n_nodes <= rho.space.dim


def apply_noise(channel: GaussianNoiseChannel, rho: DensityMatrix, *, trace_tol: float = TRACE_TOL,
                renormalize: bool = True) -> DensityMatrix:
    """``E_sigma(rho)`` on a single-mode state.

    The trace lost past the cutoff is stored as ``trace_deficit`` on the
    result; above ``trace_tol`` it raises ``CutoffTooSmall``.
    """
    _require_modes(rho.space, 1, "apply_noise")
    if channel.is_identity:
        return rho
    factored = _use_factor(rho, len(channel.grid))
    data = rho.factor if factored else rho.elements
    out = apply_noise_local(channel, data, (rho.space.levels,), 0, factored=factored)
    return _finish(rho.space, out, factored, rho.trace(), trace_tol, renormalize)


def apply_noise_two_mode(channel: GaussianNoiseChannel, rho: DensityMatrix, target_mode: int, *,
                         trace_tol: float = TRACE_TOL, renormalize: bool = True) -> DensityMatrix:
    """``(I ⊗ E_sigma)(rho)`` with the channel on ``target_mode`` only."""
    _require_modes(rho.space, 2, "apply_noise_two_mode")
    if target_mode not in (0, 1):
        raise ValueError(f"target_mode must be 0 or 1, got {target_mode}")
    if channel.is_identity:
        return rho
    factored = _use_factor(rho, len(channel.grid))
    data = rho.factor if factored else rho.elements
    out = apply_noise_local(channel, data, rho.space.shape, target_mode, factored=factored)
    return _finish(rho.space, out, factored, rho.trace(), trace_tol, renormalize)


def compose_noise(sigma1: float, sigma2: float) -> float:
    """Variance of ``E_sigma1 ∘ E_sigma2``, which is ``E_{sigma1 + sigma2}``.

    Gaussian displacements convolve, so independent noise sources add in
    variance.
    """
    if sigma1 < 0 or sigma2 < 0:
        raise ValueError(f"variances must be >= 0, got {sigma1}, {sigma2}")
    return sigma1 + sigma2


# ---------------------------------------------------------------------------
# teleportation protocol


@dataclass(frozen=True)
class TeleportationSetup:
    """Parameters of the three-mode teleportation simulation.

    Mode 1 carries the input, modes 2 and 3 share the two-mode squeezed
    resource with squeezing parameter ``eta``. Alice projects modes 1, 2 on
    displaced EPR states ``D_1(alpha)|Phi>``; Bob displaces mode 3 by the
    reported ``alpha``. The outcome integral uses a Gaussian grid of
    ``order`` points per axis.
    """

    eta: float
    cutoff: int
    order: int = DEFAULT_ORDER
    scheme: Scheme = Scheme.GAUSS_HERMITE_CARTESIAN
    min_weight: float = 1e-16

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.cutoff, 1)

    @property
    def outcome_variance(self) -> float:
        """``<|alpha - <a>|^2>`` of the outcome for a coherent input: ``1/(1-eta^2)``."""
        return 1.0 / (1.0 - self.eta**2)

    def outcome_grid(self, center: complex = 0j) -> QuadratureGrid:
        grid = gaussian_grid(self.outcome_variance, self.order, self.scheme, center=center)
        return grid.pruned(self.min_weight) if self.min_weight > 0 else grid


def suggested_teleport_cutoff(eta: float, amplitude: float = 0.0, prob_tol: float = PROB_TOL) -> int:
    """Cutoff holding the outcome-probability loss well under ``prob_tol``."""
    from .fock import default_cutoff

    reach = math.sqrt(math.log(1.0 / prob_tol) + 4.0) / math.sqrt(1.0 - eta * eta)
    return max(default_cutoff(abs(amplitude) + reach), 20)


def _input_components(rho: DensityMatrix) -> np.ndarray:
    if rho.factor is not None:
        return rho.factor
    lam, vec = np.linalg.eigh(0.5 * (rho.elements + rho.elements.conj().T))
    keep = lam > 1e-14 * max(lam.max(), 1.0)
    return vec[:, keep] * np.sqrt(lam[keep])


def _resource_matrix(setup: TeleportationSetup) -> np.ndarray:
    tmsv = two_mode_squeezed_state(setup.eta, FockSpace(setup.cutoff, 2), tail_tol=1.0)
    return tmsv.as_matrix()


def conditional_states(setup: TeleportationSetup, rho_in: DensityMatrix, outcomes) -> np.ndarray:
    """Bob's unnormalized states after outcome ``alpha`` and his correction.

    Returns shape ``(len(outcomes), L, rank)``: for each outcome, columns
    ``D_3(alpha) <Phi_alpha|_12 (psi_1 ⊗ |eta>_23)`` for each pure component
    ``psi`` of ``rho_in``. Their squared norm is the outcome density with
    respect to ``d^2 alpha / pi``.
    """
    _require_modes(rho_in.space, 1, "conditional_states")
    if rho_in.space.cutoff != setup.cutoff:
        raise SpaceMismatch(f"input cutoff {rho_in.space.cutoff} vs setup cutoff {setup.cutoff}")
    psi = _input_components(rho_in)
    resource = _resource_matrix(setup)
    L = setup.cutoff + 1
    outcomes = np.atleast_1d(np.asarray(outcomes, dtype=complex))
    parts = []
    for sl in _chunks(outcomes.size, L):
        ds = displacement_matrices(outcomes[sl], L)
        # <Phi| (D_1(alpha) ⊗ I)^dagger contracts mode 1 with D^dagger, mode 2 with the resource
        alice = np.einsum("kji,jr->kir", ds.conj(), psi)
        bob = np.einsum("in,kir->knr", resource, alice)
        parts.append(np.einsum("kmn,knr->kmr", ds, bob))
    return np.concatenate(parts, axis=0)


def simulate_teleportation_channel(setup: TeleportationSetup, rho_in: DensityMatrix, *,
                                   prob_tol: float = PROB_TOL) -> DensityMatrix:
    """Outcome-averaged output of the teleportation protocol, built in Fock space.

    Integrates ``D_3(a) Tr_12[(Pi_a ⊗ I_3)(rho_in ⊗ |eta><eta|_23)] D_3(a)^dagger``
    over outcomes ``a`` with measure ``d^2 a / pi``, the normalization that
    makes the projectors ``Pi_a = D_1(a)|Phi><Phi|D_1(a)^dagger`` complete.
    Raises ``GridTooCoarse`` if the integrated outcome probability misses 1
    by more than ``prob_tol``; the result is renormalized and its
    ``trace_deficit`` records the miss.
    """
    a_op = np.diag(np.sqrt(np.arange(1, setup.cutoff + 1)), 1)
    center = complex(np.round(rho_in.expectation(a_op), 12))
    grid = setup.outcome_grid(center)
    s = grid.variance
    # weights for the measure d^2 alpha / pi from the Gaussian sampling density
    omega = grid.weights * s * np.exp(np.abs(grid.nodes - center) ** 2 / s)

    states = conditional_states(setup, rho_in, grid.nodes)
    total = float(np.sum(omega * np.sum(np.abs(states) ** 2, axis=(1, 2))))
    if abs(total - 1.0) > prob_tol:
        raise GridTooCoarse(
            f"outcome probability integrates to {total:.6f} (tolerance {prob_tol:.3g}); "
            f"raise the cutoff ({setup.cutoff}) or the grid order ({setup.order})"
        )
    weighted = states * np.sqrt(omega)[:, None, None]
    factor = np.moveaxis(weighted, 0, 1).reshape(setup.cutoff + 1, -1)
    rho_out = factor @ factor.conj().T
    log.debug("teleportation outcome probability %.9f over %d nodes", total, len(grid))
    return DensityMatrix(setup.space, rho_out / total, trace_deficit=1.0 - total)
