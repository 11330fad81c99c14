"""Noisy continuous-variable teleportation: fidelities of coherent and entangled coherent states."""

from .analytics import (
    ECSSpec,
    NoiseBudget,
    coherent_entanglement_fidelity,
    ecs_entanglement_fidelity,
    required_sigma_for_ecs_fidelity,
    sigma_from_average_fidelity,
    sigma_from_detector,
    sigma_from_squeezing,
    squeezing_db,
)
from .channels import (
    GaussianNoiseChannel,
    TeleportationSetup,
    apply_noise,
    apply_noise_two_mode,
    compose_noise,
    simulate_teleportation_channel,
)
from .entfid import (
    EntFidResult,
    Purification,
    entanglement_fidelity_brute,
    entanglement_fidelity_overlap,
    purification_independence_check,
)
from .errors import (
    CutoffTooSmall,
    DegenerateECS,
    DomainError,
    GridTooCoarse,
    NoRoot,
    PurificationMismatch,
    SpaceMismatch,
)
from .fock import (
    ComplexAmplitude,
    DensityMatrix,
    FockSpace,
    FockVector,
    Operator,
    coherent_state,
    displacement_operator,
    ecs_state,
    fidelity_pure_mixed,
    partial_trace,
    two_mode_squeezed_state,
)
from .quadrature import QuadratureGrid

__version__ = "0.1.0"

__all__ = [
    "ComplexAmplitude",
    "CutoffTooSmall",
    "DegenerateECS",
    "DensityMatrix",
    "DomainError",
    "ECSSpec",
    "EntFidResult",
    "FockSpace",
    "FockVector",
    "GaussianNoiseChannel",
    "GridTooCoarse",
    "NoRoot",
    "NoiseBudget",
    "Operator",
    "Purification",
    "PurificationMismatch",
    "QuadratureGrid",
    "SpaceMismatch",
    "TeleportationSetup",
    "apply_noise",
    "apply_noise_two_mode",
    "coherent_entanglement_fidelity",
    "coherent_state",
    "compose_noise",
    "displacement_operator",
    "ecs_entanglement_fidelity",
    "ecs_state",
    "entanglement_fidelity_brute",
    "entanglement_fidelity_overlap",
    "fidelity_pure_mixed",
    "partial_trace",
    "purification_independence_check",
    "required_sigma_for_ecs_fidelity",
    "sigma_from_average_fidelity",
    "sigma_from_detector",
    "sigma_from_squeezing",
    "simulate_teleportation_channel",
    "squeezing_db",
    "two_mode_squeezed_state",
]
