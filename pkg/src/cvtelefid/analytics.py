"""Closed-form figures of merit for noisy CV teleportation.

All variances use the vacuum-noise = 1/2 convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateECS, DomainError, NoRoot
from .fock import EPS_SEP, Amplitude, as_complex

# entanglement-resource and no-cloning fidelity thresholds
THRESHOLD_ENTANGLEMENT = 0.5
THRESHOLD_NO_CLONING = 2.0 / 3.0

BRACKET = (1e-12, 4.0)
MAX_ITER = 200
ABS_TOL = 1e-12


@dataclass(frozen=True)
class NoiseBudget:
    """Independent Gaussian noise variances; they add (see ``compose_noise``).

    ``sigma_G`` (linear-amplification noise) is taken as given.
    """

    sigma_G: float = 0.0
    sigma_eta: float = 0.0
    sigma_nu: float = 0.0
    sigma_other: float = 0.0

    def __post_init__(self):
        for name in ("sigma_G", "sigma_eta", "sigma_nu", "sigma_other"):
            value = getattr(self, name)
            if not value >= 0 or not math.isfinite(value):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")

    @classmethod
    def from_physical(cls, sigma_G: float = 0.0, eta: float = 0.0, nu: float = 1.0,
                      sigma_other: float = 0.0) -> NoiseBudget:
        return cls(sigma_G, sigma_from_squeezing(eta), sigma_from_detector(nu), sigma_other)

    def total(self) -> float:
        return self.sigma_G + self.sigma_eta + self.sigma_nu + self.sigma_other


@dataclass(frozen=True)
class ECSSpec:
    """Labels of the entangled coherent state ``N(|alpha>|beta> - |beta>|alpha>)``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = as_complex(self.alpha), as_complex(self.beta)
        if abs(a - b) < EPS_SEP:
            raise DegenerateECS(f"alpha and beta coincide ({a})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def symmetric(cls, alpha: Amplitude) -> ECSSpec:
        a = as_complex(alpha)
        return cls(a, -a)

    @property
    def separation_sq(self) -> float:
        return abs(self.alpha - self.beta) ** 2

    @property
    def mean_photon_number(self) -> float:
        """``|alpha|^2``, the large-separation mean photon number for ``beta = -alpha``."""
        return abs(self.alpha) ** 2

    def exact_mean_photon_number(self) -> float:
        """Mean photon number of either mode, including overlap corrections."""
        a, b = self.alpha, self.beta
        overlap_sq = math.exp(-self.separation_sq)
        n_sq = 1.0 / (2.0 - 2.0 * overlap_sq)
        return n_sq * (abs(a) ** 2 + abs(b) ** 2 - 2.0 * overlap_sq * (b.conjugate() * a).real)


def sigma_from_squeezing(eta: float) -> float:
    """Finite-squeezing noise ``exp(-2 atanh eta)``; 1 for no squeezing."""
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta must lie in [0, 1), got {eta}")
    return math.exp(-2.0 * math.atanh(eta))


def sigma_from_detector(nu: float) -> float:
    """Homodyne-efficiency noise ``(1 - nu^2) / nu^2``."""
    if not 0.0 < nu <= 1.0:
        raise DomainError(f"detector efficiency nu must lie in (0, 1], got {nu}")
    return (1.0 - nu * nu) / (nu * nu)


def coherent_entanglement_fidelity(sigma: float) -> float:
    """``1 / (1 + sigma)``, the same for every coherent state."""
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    return 1.0 / (1.0 + sigma)


def sigma_eff(sigma: float) -> float:
    return sigma / (1.0 + sigma)


def ecs_entanglement_fidelity(spec: ECSSpec, sigma: float) -> float:
    """``(1/2) (1/(1+sigma)) (1 + exp(-|alpha-beta|^2 sigma/(1+sigma)))``.

    Drops terms of order ``exp(-|alpha-beta|^2)``.
    """
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    return 0.5 / (1.0 + sigma) * (1.0 + math.exp(-spec.separation_sq * sigma_eff(sigma)))


def required_sigma_for_ecs_fidelity(spec: ECSSpec, target: float, *, bracket=BRACKET,
                                    max_iter: int = MAX_ITER, abs_tol: float = ABS_TOL) -> float:
    """Largest noise variance keeping the ECS entanglement fidelity at ``target``.

    Bisection on the monotone decreasing closed form.
    """
    lo, hi = bracket
    f_lo = ecs_entanglement_fidelity(spec, lo) - target
    f_hi = ecs_entanglement_fidelity(spec, hi) - target
    if f_lo < 0:
        raise NoRoot(f"target {target} exceeds the attainable fidelity {f_lo + target:.12g}")
    if f_hi > 0:
        raise NoRoot(f"target {target} is below the fidelity {f_hi + target:.6g} at sigma={hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if ecs_entanglement_fidelity(spec, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < abs_tol:
            break
    return 0.5 * (lo + hi)


def squeezing_db(sigma_eta: float) -> float:
    """Squeezing in dB, ``-10 log10(sigma_eta)``.

    With ``sigma_eta = exp(-2r)`` this is ``20 r / ln 10``.
    """
    if not 0.0 < sigma_eta <= 1.0:
        raise DomainError(f"sigma_eta must lie in (0, 1], got {sigma_eta}")
    return -10.0 * math.log10(sigma_eta)


def sigma_from_db(db: float) -> float:
    if db < 0:
        raise DomainError(f"squeezing in dB must be >= 0, got {db}")
    return 10.0 ** (-db / 10.0)


def eta_from_sigma(sigma_eta: float) -> float:
    """Inverse of ``sigma_from_squeezing``."""
    if not 0.0 < sigma_eta <= 1.0:
        raise DomainError(f"sigma_eta must lie in (0, 1], got {sigma_eta}")
    return math.tanh(-0.5 * math.log(sigma_eta))


def sigma_from_average_fidelity(fbar: float) -> float:
    """Invert ``F = 1/(1 + sigma)``: ``sigma = 1/F - 1``.

    Since the coherent-state fidelity does not depend on the amplitude, an
    average over any set of coherent states inverts the same way.
    """
    if not 0.0 < fbar <= 1.0:
        raise DomainError(f"average fidelity must lie in (0, 1], got {fbar}")
    return 1.0 / fbar - 1.0


def passes_threshold(sigma: float, threshold: float) -> bool:
    """Strict ``F > threshold`` for the coherent-state fidelity."""
    return coherent_entanglement_fidelity(sigma) > threshold
