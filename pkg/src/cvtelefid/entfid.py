"""Entanglement fidelity of the Gaussian noise channel.

Three independent routes:

* ``fock_brute_force`` purifies the input, pushes ``I ⊗ E_sigma`` through the
  truncated Fock representation and takes the overlap with the purification;
* ``overlap_quadrature`` integrates ``|<Psi|I ⊗ D(z)|Psi>|^2`` for an
  entangled coherent state using exact coherent-state overlaps, no
  truncation and no large-separation approximation;
* ``closed_form`` evaluates the large-separation formulas in ``analytics``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .channels import GaussianNoiseChannel, _chunks, apply_noise_local
from .errors import CutoffTooSmall, DegenerateECS, PurificationMismatch
from .fock import (
    EPS_SEP,
    Amplitude,
    DensityMatrix,
    FockSpace,
    FockVector,
    as_complex,
    coherent_state,
    ecs_normalization,
    displacement_matrices,
    ecs_state,
)
from .quadrature import QuadratureGrid, gaussian_grid

REDUCED_TOL = 1e-8


class AncillaKind(str, enum.Enum):
    ECS_PARTNER = "ecs_partner"
    ORTHOGONAL_QUBIT = "orthogonal_qubit"
    CUSTOM_ISOMETRY = "custom_isometry"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    OVERLAP_QUADRATURE = "overlap_quadrature"
    FOCK_BRUTE_FORCE = "fock_brute_force"


@dataclass(frozen=True)
class EntFidResult:
    value: float
    method: Method
    est_error: float = 0.0

    def __post_init__(self):
        if not -1e-9 <= self.value <= 1 + 1e-9:
            raise ValueError(f"entanglement fidelity {self.value!r} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class Purification:
    """Pure state on ``ancilla ⊗ mode``, stored as an ``(ancilla_dim, L)`` array.

    Row ``i`` is the (unnormalized) Fock vector of the kept mode paired with
    ancilla basis state ``i``; a qubit ancilla is just two stacked Fock
    vectors.
    """

    ancilla_kind: AncillaKind
    state: np.ndarray = field(repr=False)
    space: FockSpace
    kept_mode: int = 1
    tail_mass: float = 0.0

    def __post_init__(self):
        arr = np.array(self.state, dtype=complex)
        if arr.ndim != 2 or arr.shape[1] != self.space.levels:
            raise ValueError(f"state must have shape (ancilla_dim, {self.space.levels}), got {arr.shape}")
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"purification must be normalized, norm is {norm!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "state", arr)

    @property
    def ancilla_dim(self) -> int:
        return self.state.shape[0]

    def vector(self) -> np.ndarray:
        return self.state.reshape(-1)

    def reduced_state(self) -> DensityMatrix:
        """Trace out the ancilla."""
        c = self.state
        return DensityMatrix(self.space, c.T @ c.conj(), trace_deficit=self.tail_mass)

    def with_isometry(self, isometry) -> Purification:
        """Re-purify through ``V: ancilla -> ancilla'`` with ``V^dagger V = I``."""
        v = np.asarray(isometry, dtype=complex)
        if not np.allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-12):
            raise ValueError("ancilla map is not an isometry")
        return Purification(AncillaKind.CUSTOM_ISOMETRY, v @ self.state, self.space,
                            self.kept_mode, self.tail_mass)


def ecs_purification(alpha: Amplitude, beta: Amplitude, space: FockSpace, **kwargs) -> Purification:
    """The ECS itself as a purification of its mode-b marginal."""
    psi = ecs_state(alpha, beta, space.with_modes(2), **kwargs)
    return Purification(AncillaKind.ECS_PARTNER, psi.as_matrix(), space.single(), 1, psi.tail_mass)


def qubit_purification(amplitudes, probabilities, space: FockSpace, **kwargs) -> Purification:
    """``sum_i sqrt(p_i) |i>_a |amp_i>_b`` with orthonormal ancilla states.

    Reduces to the coherent-state mixture ``sum_i p_i |amp_i><amp_i|``; with
    two amplitudes the ancilla is a qubit.
    """
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    rows, tail = [], 0.0
    for amp, pi in zip(amplitudes, p):
        cs = coherent_state(amp, space.single(), **kwargs)
        rows.append(math.sqrt(pi) * cs.coefficients)
        tail = max(tail, cs.tail_mass)
    kind = AncillaKind.ORTHOGONAL_QUBIT if len(rows) == 2 else AncillaKind.CUSTOM_ISOMETRY
    return Purification(kind, np.stack(rows), space.single(), 1, tail)


def trivial_purification(psi: FockVector) -> Purification:
    """One-dimensional ancilla: the pure state purifies itself."""
    return Purification(AncillaKind.CUSTOM_ISOMETRY, psi.coefficients[None, :], psi.space, 1,
                        psi.tail_mass)


def spectral_purification(rho: DensityMatrix, cutoff_eig: float = 1e-15) -> Purification:
    """Purify with the eigenbasis of ``rho`` as ancilla basis."""
    lam, vec = np.linalg.eigh(0.5 * (rho.elements + rho.elements.conj().T))
    keep = lam > cutoff_eig
    rows = (vec[:, keep] * np.sqrt(lam[keep])).T
    return Purification(AncillaKind.CUSTOM_ISOMETRY, rows, rho.space, 1, rho.trace_deficit)


# ---------------------------------------------------------------------------
# brute force


def entanglement_fidelity_brute(gamma: Purification, channel: GaussianNoiseChannel, *,
                                trace_tol: float = 1e-3, grid_error: bool = True) -> EntFidResult:
    """``<Gamma| (I ⊗ E)(|Gamma><Gamma|) |Gamma>`` in the truncated Fock space.

    The channel output is not renormalized, so trace leaked past the cutoff
    cannot inflate the overlap; it is added to ``est_error`` together with
    the purification's own truncation tail and, with ``grid_error``, half the
    change of the reduced-state form on doubling the quadrature order.
    """
    if channel.is_identity:
        return EntFidResult(1.0, Method.FOCK_BRUTE_FORCE, gamma.tail_mass)
    g = gamma.vector()
    out = apply_noise_local(channel, g[:, None], (gamma.ancilla_dim, gamma.space.levels), 1,
                            factored=True)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(out) ** 2)))
    if deficit > trace_tol:
        raise CutoffTooSmall(
            f"channel leaked {deficit:.3g} of the purification past cutoff {gamma.space.cutoff}",
            lost=deficit, tolerance=trace_tol,
        )
    value = float(np.sum(np.abs(out.conj().T @ g) ** 2))
    est = gamma.tail_mass + deficit
    if grid_error:
        rho_b = gamma.reduced_state()
        coarse = reduced_entanglement_fidelity(rho_b, channel)
        fine = reduced_entanglement_fidelity(rho_b, channel.refined())
        est += 0.5 * abs(fine - coarse)
    return EntFidResult(min(max(value, 0.0), 1.0), Method.FOCK_BRUTE_FORCE, est)


def reduced_entanglement_fidelity(rho: DensityMatrix, channel: GaussianNoiseChannel) -> float:
    """``sum_k w_k |Tr(rho D(z_k))|^2``, the random-unitary form of ``F_e``.

    Depends on ``rho`` alone, which is why any purification gives the same
    entanglement fidelity.
    """
    if channel.is_identity:
        return 1.0
    grid = channel.grid
    levels = rho.space.levels
    total = 0.0
    for sl in _chunks(len(grid), levels):
        ds = displacement_matrices(grid.nodes[sl], levels)
        tr = np.einsum("kij,ji->k", ds, rho.elements)
        total += float(np.sum(grid.weights[sl] * np.abs(tr) ** 2))
    return total


# ---------------------------------------------------------------------------
# exact overlap quadrature


def _displaced_overlap(gamma: complex, delta: complex, z: np.ndarray) -> np.ndarray:
    """``<gamma|D(z)|delta>`` for untruncated coherent states."""
    shifted = delta + z
    phase = 0.5 * (z * np.conj(delta) - np.conj(z) * delta)
    return np.exp(phase - 0.5 * abs(gamma) ** 2 - 0.5 * np.abs(shifted) ** 2 + np.conj(gamma) * shifted)


def ecs_characteristic(alpha: Amplitude, beta: Amplitude, z) -> np.ndarray:
    """``<Psi(a,b)| I ⊗ D(z) |Psi(a,b)>`` keeping every overlap term.

    Expanding ``N^2 (<a|<b| - <b|<a|)(I ⊗ D)(|a>|b> - |b>|a>)`` gives

        <a|a><b|D|b> - <a|b><b|D|a> - <b|a><a|D|b> + <b|b><a|D|a>
    """
    a, b = as_complex(alpha), as_complex(beta)
    z = np.asarray(z, dtype=complex)
    ab = complex(np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b))
    terms = (
        _displaced_overlap(b, b, z)
        - ab * _displaced_overlap(b, a, z)
        - np.conj(ab) * _displaced_overlap(a, b, z)
        + _displaced_overlap(a, a, z)
    )
    return ecs_normalization(a, b) ** 2 * terms


def _overlap_value(alpha: complex, beta: complex, grid: QuadratureGrid) -> float:
    return float(grid.expect(lambda z: np.abs(ecs_characteristic(alpha, beta, z)) ** 2).real)


def entanglement_fidelity_overlap(alpha: Amplitude, beta: Amplitude, sigma: float,
                                  grid: QuadratureGrid | None = None, *, order: int = 20,
                                  tol: float = 1e-10, max_order: int = 1024,
                                  eps_sep: float = EPS_SEP) -> EntFidResult:
    """Entanglement fidelity of one ECS mode through ``E_sigma`` by quadrature.

    ``est_error`` is half the change on doubling the order. With an explicit
    ``grid`` (variance ``sigma``) that single comparison is made. Otherwise
    Gauss-Hermite grids start at ``order`` points per axis and double until
    the estimate drops below ``tol``; the integrand oscillates at a rate set
    by ``|alpha - beta|``, so widely separated states need high orders.
    """
    a, b = as_complex(alpha), as_complex(beta)
    if abs(a - b) < eps_sep:
        raise DegenerateECS(f"|alpha - beta| = {abs(a - b):.3g} below {eps_sep:.3g}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return EntFidResult(1.0, Method.OVERLAP_QUADRATURE, 0.0)
    if grid is not None:
        if abs(grid.variance - sigma) > 1e-12 * max(1.0, sigma):
            raise ValueError(f"grid variance {grid.variance} does not match sigma {sigma}")
        value = _overlap_value(a, b, grid)
        fine = _overlap_value(a, b, grid.refined())
        return EntFidResult(min(max(fine, 0.0), 1.0), Method.OVERLAP_QUADRATURE, 0.5 * abs(fine - value))

    value = _overlap_value(a, b, gaussian_grid(sigma, order))
    while True:
        fine = _overlap_value(a, b, gaussian_grid(sigma, 2 * order))
        est = 0.5 * abs(fine - value)
        order *= 2
        if est < tol or 2 * order > max_order:
            break
        value = fine
    return EntFidResult(min(max(fine, 0.0), 1.0), Method.OVERLAP_QUADRATURE, est)


def overlap_converged_order(alpha: Amplitude, beta: Amplitude, sigma: float, *, order: int = 20,
                            tol: float = 1e-10, max_order: int = 1024) -> int:
    """Smallest doubling of ``order`` at which the overlap quadrature settles to ``tol``."""
    a, b = as_complex(alpha), as_complex(beta)
    if sigma == 0:
        return order
    value = _overlap_value(a, b, gaussian_grid(sigma, order))
    while 2 * order <= max_order:
        fine = _overlap_value(a, b, gaussian_grid(sigma, 2 * order))
        if 0.5 * abs(fine - value) < tol:
            return order
        order, value = 2 * order, fine
    return order


def entanglement_fidelity_closed(alpha: Amplitude, beta: Amplitude, sigma: float) -> EntFidResult:
    """Large-separation closed form; its error is of order ``exp(-|a-b|^2)``."""
    a, b = as_complex(alpha), as_complex(beta)
    value = analytics.ecs_entanglement_fidelity(analytics.ECSSpec(a, b), sigma)
    return EntFidResult(value, Method.CLOSED_FORM, 10 * math.exp(-abs(a - b) ** 2))


# ---------------------------------------------------------------------------
# purification independence


@dataclass
class PurificationReport:
    results: list[EntFidResult]
    reduced_deviation: list[float]
    kinds: list[AncillaKind]
    max_gap: float
    allowed_gap: float
    consistent: bool
    approximate: bool
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "values": [r.value for r in self.results],
            "est_errors": [r.est_error for r in self.results],
            "kinds": [k.value for k in self.kinds],
            "reduced_deviation": self.reduced_deviation,
            "max_gap": self.max_gap,
            "allowed_gap": self.allowed_gap,
            "consistent": self.consistent,
            "approximate": self.approximate,
            "notes": self.notes,
        }


def purification_independence_check(rho_b: DensityMatrix, purifications, channel: GaussianNoiseChannel,
                                    *, reduced_tol: float = REDUCED_TOL,
                                    agreement_floor: float = 1e-8) -> PurificationReport:
    """Entanglement fidelity of ``rho_b`` through each purification.

    Every purification must reduce to ``rho_b`` within ``reduced_tol``
    (max-abs elementwise), else ``PurificationMismatch``. Values must agree
    pairwise within the summed ``est_error``s plus ``agreement_floor``; when
    ``reduced_tol`` is loosened past 1e-8 the reduced states differ and the
    gap allowance also includes twice the largest reduced-state deviation in
    trace norm, and the report is flagged ``approximate``.
    """
    results, deviations, max_abs, kinds, notes = [], [], [], [], []
    for i, gamma in enumerate(purifications):
        if gamma.space != rho_b.space:
            raise PurificationMismatch(f"purification {i} lives on {gamma.space}, rho_b on {rho_b.space}")
        diff = gamma.reduced_state().elements - rho_b.elements
        dev = float(np.max(np.abs(diff)))
        if dev > reduced_tol:
            raise PurificationMismatch(
                f"purification {i} ({gamma.ancilla_kind.value}) reduces to a state {dev:.3g} away from rho_b"
            )
        max_abs.append(dev)
        deviations.append(float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))))))
        results.append(entanglement_fidelity_brute(gamma, channel))
        kinds.append(gamma.ancilla_kind)

    values = np.array([r.value for r in results])
    errors = np.array([r.est_error for r in results])
    max_gap = float(values.max() - values.min()) if values.size else 0.0
    approximate = bool(max_abs) and max(max_abs) > REDUCED_TOL
    allowed = float(np.sort(errors)[-2:].sum()) + agreement_floor if values.size else agreement_floor
    if approximate:
        # F_e = sum_k w_k |Tr(rho D_k)|^2 moves by at most 2 ||rho - rho'||_1
        allowed += 2 * max(deviations)
        notes.append("purifications reduce to slightly different states; gap bounded by their distance")
    return PurificationReport(results, deviations, kinds, max_gap, allowed, max_gap <= allowed,
                              approximate, notes)
