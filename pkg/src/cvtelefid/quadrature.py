"""Quadrature rules for the complex Gaussian weight ``exp(-|z|^2/s) / (pi s)``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_hermite
from numpy.polynomial.laguerre import laggauss

WEIGHT_SUM_TOL = 1e-10


class Scheme(str, enum.Enum):
    GAUSS_HERMITE_CARTESIAN = "gauss_hermite_cartesian"
    POLAR_GAUSS_LAGUERRE = "polar_gauss_laguerre"


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes ``z_k`` and probability weights ``w_k`` for a complex Gaussian.

    ``variance`` is ``<|z|^2>`` under the weight, ``center`` its mean.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme: Scheme
    order: int
    variance: float
    center: complex = 0j

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=complex).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights differ in length")
        if np.any(weights < 0):
            raise ValueError("quadrature weights must be nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"quadrature weights sum to {total!r}")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def __iter__(self):
        return iter(zip(self.nodes, self.weights))

    def expect(self, f) -> complex:
        """Quadrature estimate of ``E[f(z)]`` for vectorized ``f``."""
        return np.sum(self.weights * f(self.nodes))

    def density(self, z) -> np.ndarray:
        """The Gaussian weight function itself, per unit ``d^2 z``."""
        s = self.variance
        return np.exp(-np.abs(np.asarray(z) - self.center) ** 2 / s) / (math.pi * s)

    def pruned(self, min_weight: float) -> QuadratureGrid:
        """Drop nodes lighter than ``min_weight`` and renormalize."""
        keep = self.weights >= min_weight
        w = self.weights[keep]
        return QuadratureGrid(self.nodes[keep], w / w.sum(), self.scheme, self.order,
                              self.variance, self.center)

    def refined(self) -> QuadratureGrid:
        """Same rule at twice the order."""
        return gaussian_grid(self.variance, 2 * self.order, self.scheme, center=self.center)


def gauss_hermite_cartesian(variance: float, order: int, center: complex = 0j) -> QuadratureGrid:
    """Tensor-product Gauss-Hermite rule in ``Re z`` and ``Im z``.

    Each quadrature carries variance ``variance / 2``, so ``x = sqrt(variance) t``
    against the Hermite weight ``exp(-t^2)``.
    """
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    t, w = roots_hermite(order)
    w = w / math.sqrt(math.pi)
    scale = math.sqrt(variance)
    x = scale * t
    nodes = complex(center) + (x[:, None] + 1j * x[None, :]).reshape(-1)
    weights = np.outer(w, w).reshape(-1)
    return QuadratureGrid(nodes, weights / weights.sum(), Scheme.GAUSS_HERMITE_CARTESIAN, order,
                          variance, complex(center))


def polar_gauss_laguerre(variance: float, order: int, center: complex = 0j,
                         angles: int | None = None) -> QuadratureGrid:
    """Gauss-Laguerre in ``|z|^2`` times an equispaced trapezoid rule in ``arg z``.

    ``|z|^2 / variance`` is unit-exponential under the weight. The angular
    rule defaults to ``2 * order`` points.
    """
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    angles = 2 * order if angles is None else angles
    u, w = laggauss(order)
    phi = 2 * math.pi * np.arange(angles) / angles
    r = np.sqrt(variance * u)
    nodes = complex(center) + (r[:, None] * np.exp(1j * phi[None, :])).reshape(-1)
    weights = np.repeat(w / angles, angles)
    return QuadratureGrid(nodes, weights / weights.sum(), Scheme.POLAR_GAUSS_LAGUERRE, order,
                          variance, complex(center))


def gaussian_grid(variance: float, order: int = 20, scheme: Scheme | str = Scheme.GAUSS_HERMITE_CARTESIAN,
                  center: complex = 0j) -> QuadratureGrid:
    scheme = Scheme(scheme)
    if scheme is Scheme.GAUSS_HERMITE_CARTESIAN:
        return gauss_hermite_cartesian(variance, order, center)
    return polar_gauss_laguerre(variance, order, center)
