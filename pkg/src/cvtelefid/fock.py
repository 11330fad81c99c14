"""Truncated Fock-space states, operators and fidelity primitives.

Multi-mode states use the row-major tensor index ``n_0 * L**(M-1) + ... + n_{M-1}``
with ``L = cutoff + 1`` levels per mode. Everything is dense numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import CutoffTooSmall, DegenerateECS, SpaceMismatch

TAIL_TOL = 1e-12
TOL_NORM = 1e-10
TOL_HERM = 1e-10
TOL_TRACE = 1e-8
TOL_PSD = -1e-8
EPS_SEP = 1e-8

# rescale the Laguerre recurrence before it can overflow
_RESCALE_AT = 1e100


@dataclass(frozen=True)
class ComplexAmplitude:
    """A phase-space point ``re + i*im`` (coherent label, outcome or displacement)."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"amplitude must be finite, got {self.re}+{self.im}j")

    @classmethod
    def of(cls, value: Amplitude) -> ComplexAmplitude:
        if isinstance(value, ComplexAmplitude):
            return value
        z = complex(value)
        return cls(z.real, z.imag)

    def __complex__(self):
        return complex(self.re, self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)


Amplitude = Union[complex, float, int, ComplexAmplitude]


def as_complex(value: Amplitude) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"amplitude must be finite, got {z}")
    return z


@dataclass(frozen=True)
class FockSpace:
    """Number basis ``|0>, ..., |cutoff>`` on each of ``modes`` modes."""

    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**self.modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.levels,) * self.modes

    def single(self) -> FockSpace:
        return FockSpace(self.cutoff, 1)

    def with_modes(self, modes: int) -> FockSpace:
        return FockSpace(self.cutoff, modes)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def _require_modes(space: FockSpace, modes: int, what: str):
    if space.modes != modes:
        raise SpaceMismatch(f"{what} needs a {modes}-mode space, got {space.modes} modes")


@dataclass(frozen=True, eq=False)
class FockVector:
    """Normalized pure state in a truncated Fock space.

    ``tail_mass`` is the probability discarded by truncation before the
    vector was renormalized.
    """

    space: FockSpace
    coefficients: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        coeffs = _frozen(self.coefficients).reshape(-1)
        if coeffs.size != self.space.dim:
            raise SpaceMismatch(
                f"expected {self.space.dim} coefficients for {self.space}, got {coeffs.size}"
            )
        norm = float(np.linalg.norm(coeffs))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"FockVector must be normalized, norm is {norm!r}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def normalized(cls, space: FockSpace, coefficients, tail_mass: float = 0.0) -> FockVector:
        coeffs = np.asarray(coefficients, dtype=complex).reshape(-1)
        norm = np.linalg.norm(coeffs)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(space, coeffs / norm, tail_mass)

    @classmethod
    def fock(cls, n: int, space: FockSpace) -> FockVector:
        _require_modes(space, 1, "fock")
        if not 0 <= n <= space.cutoff:
            raise ValueError(f"Fock index {n} outside 0..{space.cutoff}")
        coeffs = np.zeros(space.dim, dtype=complex)
        coeffs[n] = 1.0
        return cls(space, coeffs)

    def inner(self, other: FockVector) -> complex:
        """``<self|other>``."""
        if self.space != other.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")
        return complex(np.vdot(self.coefficients, other.coefficients))

    def tensor(self, other: FockVector) -> FockVector:
        if self.space.cutoff != other.space.cutoff:
            raise SpaceMismatch("tensor product needs equal cutoffs")
        space = FockSpace(self.space.cutoff, self.space.modes + other.space.modes)
        tail = 1.0 - (1.0 - self.tail_mass) * (1.0 - other.tail_mass)
        return FockVector.normalized(space, np.kron(self.coefficients, other.coefficients), tail)

    def as_matrix(self) -> np.ndarray:
        """Two-mode coefficients as an ``(L, L)`` array indexed ``[n_a, n_b]``."""
        _require_modes(self.space, 2, "as_matrix")
        return self.coefficients.reshape(self.space.shape)

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    def mean_photon_number(self) -> float:
        _require_modes(self.space, 1, "mean_photon_number")
        n = np.arange(self.space.levels)
        return float(np.sum(n * np.abs(self.coefficients) ** 2))


class DensityMatrix:
    """Hermitian, trace-one matrix on a truncated Fock space.

    May be stored densely or as a factor ``F`` with ``rho = F F^dagger``; the
    dense elements are then built on first access. ``trace_deficit`` records
    trace lost to truncation before any renormalization.
    """

    def __init__(self, space: FockSpace, elements=None, *, factor=None, trace_deficit: float = 0.0,
                 normalized: bool = True):
        if (elements is None) == (factor is None):
            raise ValueError("give exactly one of elements or factor")
        self.space = space
        self.trace_deficit = float(trace_deficit)
        self.normalized = normalized
        if factor is not None:
            f = np.array(factor, dtype=complex)
            if f.ndim == 1:
                f = f[:, None]
            if f.shape[0] != space.dim:
                raise SpaceMismatch(f"factor has {f.shape[0]} rows, space dim is {space.dim}")
            f.setflags(write=False)
            self._factor = f
        else:
            rho = np.asarray(elements, dtype=complex)
            if rho.shape != (space.dim, space.dim):
                raise SpaceMismatch(f"matrix shape {rho.shape} does not fit {space}")
            rho = _frozen(rho)
            self.__dict__["elements"] = rho
            self._factor = None
        if normalized:
            tr = self.trace()
            if abs(tr - 1.0) > TOL_TRACE:
                raise ValueError(f"density matrix trace is {tr!r}, expected 1")

    @classmethod
    def from_pure(cls, psi: FockVector) -> DensityMatrix:
        return cls(psi.space, factor=psi.coefficients, trace_deficit=psi.tail_mass)

    @classmethod
    def mixture(cls, states, weights) -> DensityMatrix:
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0):
            raise ValueError("mixture weights must be nonnegative")
        weights = weights / weights.sum()
        space = states[0].space
        cols = []
        for s, w in zip(states, weights):
            if s.space != space:
                raise SpaceMismatch("mixture components live on different spaces")
            cols.append(math.sqrt(w) * s.coefficients)
        return cls(space, factor=np.stack(cols, axis=1))

    @property
    def factor(self) -> np.ndarray | None:
        return self._factor

    @cached_property
    def elements(self) -> np.ndarray:
        f = self._factor
        return _frozen(f @ f.conj().T)

    def trace(self) -> float:
        if self._factor is not None:
            return float(np.sum(np.abs(self._factor) ** 2))
        return float(np.trace(self.elements).real)

    def renormalized(self) -> DensityMatrix:
        tr = self.trace()
        if self._factor is not None:
            return DensityMatrix(self.space, factor=self._factor / math.sqrt(tr),
                                 trace_deficit=self.trace_deficit)
        return DensityMatrix(self.space, self.elements / tr, trace_deficit=self.trace_deficit)

    def hermiticity_defect(self) -> float:
        if self._factor is not None and "elements" not in self.__dict__:
            return 0.0
        rho = self.elements
        return float(np.max(np.abs(rho - rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.elements + self.elements.conj().T))[0])

    def check(self, *, tol_herm: float = TOL_HERM, tol_trace: float = TOL_TRACE,
              check_psd: bool = False):
        """Raise ``ValueError`` if the state violates its invariants."""
        defect = self.hermiticity_defect()
        if defect > tol_herm:
            raise ValueError(f"Hermiticity defect {defect:.3g} exceeds {tol_herm:.3g}")
        if self.normalized and abs(self.trace() - 1.0) > tol_trace:
            raise ValueError(f"trace {self.trace()!r} differs from 1 by more than {tol_trace:.3g}")
        if check_psd:
            lam = self.min_eigenvalue()
            if lam < TOL_PSD:
                raise ValueError(f"smallest eigenvalue {lam:.3g} is negative")

    def expectation(self, operator) -> complex:
        op = operator.elements if isinstance(operator, Operator) else np.asarray(operator)
        if self._factor is not None:
            f = self._factor
            return complex(np.sum(f.conj() * (op @ f)))
        return complex(np.trace(op @ self.elements))

    def mean_photon_number(self) -> float:
        _require_modes(self.space, 1, "mean_photon_number")
        return self.expectation(np.diag(np.arange(self.space.levels, dtype=float))).real

    def tensor(self, other: DensityMatrix) -> DensityMatrix:
        if self.space.cutoff != other.space.cutoff:
            raise SpaceMismatch("tensor product needs equal cutoffs")
        space = FockSpace(self.space.cutoff, self.space.modes + other.space.modes)
        if self._factor is not None and other._factor is not None:
            return DensityMatrix(space, factor=np.kron(self._factor, other._factor))
        return DensityMatrix(space, np.kron(self.elements, other.elements))

    def __repr__(self):
        kind = "factored" if self._factor is not None else "dense"
        return f"DensityMatrix({self.space}, {kind}, trace_deficit={self.trace_deficit:.3g})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Matrix of an operator on a truncated Fock space."""

    space: FockSpace
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = _frozen(self.elements)
        if mat.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatch(f"matrix shape {mat.shape} does not fit {self.space}")
        object.__setattr__(self, "elements", mat)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.space != self.space:
                raise SpaceMismatch(f"{self.space} vs {other.space}")
            return Operator(self.space, self.elements @ other.elements)
        if isinstance(other, FockVector):
            if other.space != self.space:
                raise SpaceMismatch(f"{self.space} vs {other.space}")
            return self.elements @ other.coefficients
        return self.elements @ other

    @property
    def dag(self) -> Operator:
        return Operator(self.space, self.elements.conj().T)

    def unitarity_defect(self, block: int | None = None) -> float:
        """``max |U^dagger U - I|`` over the leading ``block`` levels.

        Truncation breaks unitarity near the cutoff, so only an interior
        block is meaningful.
        """
        n = self.space.dim if block is None else block
        u = self.elements[:, :n]
        return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


# ---------------------------------------------------------------------------
# constructors


def default_cutoff(max_amplitude: float) -> int:
    """Poisson-tail heuristic ``ceil(a^2 + 5a + 10)`` for amplitude ``a``."""
    a = abs(max_amplitude)
    return int(math.ceil(a * a + 5 * a + 10))


def coherent_overlap(alpha: Amplitude, beta: Amplitude) -> complex:
    """Exact ``<alpha|beta>`` of untruncated coherent states."""
    a, b = as_complex(alpha), as_complex(beta)
    return complex(np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + a.conjugate() * b))


def coherent_coefficients(alpha: Amplitude, levels: int) -> np.ndarray:
    """Unrenormalized ``e^{-|a|^2/2} a^n / sqrt(n!)`` for ``n < levels``."""
    a = as_complex(alpha)
    if a == 0:
        out = np.zeros(levels, dtype=complex)
        out[0] = 1.0
        return out
    n = np.arange(levels)
    log_mag = -0.5 * abs(a) ** 2 + n * math.log(abs(a)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(a))


def coherent_tail_mass(alpha: Amplitude, cutoff: int) -> float:
    """Probability of photon numbers above ``cutoff`` in ``|alpha>``."""
    x = abs(as_complex(alpha)) ** 2
    if x == 0:
        return 0.0
    return float(gammainc(cutoff + 1, x))


def coherent_state(alpha: Amplitude, space: FockSpace, *, tail_tol: float = TAIL_TOL) -> FockVector:
    """Truncated, renormalized coherent state ``|alpha>``."""
    _require_modes(space, 1, "coherent_state")
    tail = coherent_tail_mass(alpha, space.cutoff)
    if tail > tail_tol:
        raise CutoffTooSmall(
            f"coherent state |{complex(alpha)}> loses {tail:.3g} above cutoff {space.cutoff}",
            lost=tail, tolerance=tail_tol,
        )
    return FockVector.normalized(space, coherent_coefficients(alpha, space.levels), tail)


def displacement_matrices(zs, levels: int) -> np.ndarray:
    """Stack of truncated displacement matrices, shape ``(len(zs), levels, levels)``.

    Uses ``<m|D(z)|n> = sqrt(n!/m!) z^(m-n) e^{-|z|^2/2} L_n^(m-n)(|z|^2)`` for
    ``m >= n`` and ``<m|D(z)|n> = (-1)^(n-m) conj(<n|D(z)|m>)`` above the
    diagonal. The Laguerre recurrence runs on the normalized radial part with
    a per-diagonal log scale, so large ``|z|`` neither overflows nor loses the
    small-``n`` elements to underflow.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    K, L = zs.size, levels
    x = np.abs(zs) ** 2
    theta = np.angle(zs)
    k = np.arange(L, dtype=float)

    # z == 0 rows are overwritten with the identity below
    log_r = np.log(np.where(zs == 0, 1.0, np.abs(zs)))
    scale = -0.5 * x[:, None] + k[None, :] * log_r[:, None] - 0.5 * gammaln(k + 1)[None, :]

    out = np.zeros((K, L, L), dtype=complex)
    phase = np.exp(1j * k[None, :] * theta[:, None])

    prev = np.zeros((K, L))
    cur = np.ones((K, L))
    xs = x[:, None]
    for n in range(L):
        with np.errstate(under="ignore"):
            radial = cur[:, : L - n] * np.exp(scale[:, : L - n])
        rows = np.arange(n, L)
        out[:, rows, n] = phase[:, : L - n] * radial
        if n == L - 1:
            break
        nxt = ((2 * n + 1 + k - xs) * cur - np.sqrt(n * (n + k)) * prev) / np.sqrt(
            (n + 1) * (n + 1 + k)
        )
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if big.any():
            factor = np.where(big, np.abs(cur), 1.0)
            cur = cur / factor
            prev = prev / factor
            scale = scale + np.log(factor)

    lower = np.tril(np.ones((L, L), dtype=bool), -1)
    sign = (-1.0) ** (np.arange(L)[None, :] - np.arange(L)[:, None])
    upper = sign * np.conj(np.swapaxes(out, 1, 2))
    out = np.where(lower.T[None, :, :], upper, out)
    out[zs == 0] = np.eye(L)
    return out


def displacement_matrix(z: Amplitude, levels: int) -> np.ndarray:
    return displacement_matrices([as_complex(z)], levels)[0]


def displacement_operator(z: Amplitude, space: FockSpace) -> Operator:
    """Truncated ``D(z) = exp(z a^dagger - z* a)`` with exact matrix elements."""
    _require_modes(space, 1, "displacement_operator")
    mat = displacement_matrix(z, space.levels)
    if not np.all(np.isfinite(mat)):
        raise FloatingPointError(f"non-finite displacement matrix element for z={z}")
    return Operator(space, mat)


def number_operator(space: FockSpace) -> Operator:
    _require_modes(space, 1, "number_operator")
    return Operator(space, np.diag(np.arange(space.levels, dtype=complex)))


def annihilation_operator(space: FockSpace) -> Operator:
    _require_modes(space, 1, "annihilation_operator")
    return Operator(space, np.diag(np.sqrt(np.arange(1, space.levels)), 1))


def two_mode_squeezed_state(eta: float, space: FockSpace, *, tail_tol: float = TAIL_TOL) -> FockVector:
    """``sqrt(1-eta^2) sum_n eta^n |n>|n>``, truncated and renormalized."""
    _require_modes(space, 2, "two_mode_squeezed_state")
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    tail = eta ** (2 * (space.cutoff + 1))
    if tail > tail_tol:
        raise CutoffTooSmall(
            f"two-mode squeezed state with eta={eta} loses {tail:.3g} above cutoff {space.cutoff}",
            lost=tail, tolerance=tail_tol,
        )
    L = space.levels
    schmidt = math.sqrt(1.0 - eta * eta) * eta ** np.arange(L)
    mat = np.diag(schmidt.astype(complex))
    return FockVector.normalized(space, mat.reshape(-1), tail)


def ecs_normalization(alpha: Amplitude, beta: Amplitude) -> float:
    """``N = (2 - 2 exp(-|alpha - beta|^2))^(-1/2)``."""
    d2 = abs(as_complex(alpha) - as_complex(beta)) ** 2
    return 1.0 / math.sqrt(2.0 - 2.0 * math.exp(-d2))


def ecs_state(alpha: Amplitude, beta: Amplitude, space: FockSpace, *,
              tail_tol: float = TAIL_TOL, eps_sep: float = EPS_SEP) -> FockVector:
    """Antisymmetric entangled coherent state ``N(|a>|b> - |b>|a>)``."""
    _require_modes(space, 2, "ecs_state")
    a, b = as_complex(alpha), as_complex(beta)
    if abs(a - b) < eps_sep:
        raise DegenerateECS(f"|alpha - beta| = {abs(a - b):.3g} below {eps_sep:.3g}")
    tail = 1.0 - (1.0 - coherent_tail_mass(a, space.cutoff)) * (1.0 - coherent_tail_mass(b, space.cutoff))
    if tail > tail_tol:
        raise CutoffTooSmall(
            f"ECS({a}, {b}) loses {tail:.3g} above cutoff {space.cutoff}", lost=tail, tolerance=tail_tol
        )
    L = space.levels
    ca, cb = coherent_coefficients(a, L), coherent_coefficients(b, L)
    raw = np.kron(ca, cb) - np.kron(cb, ca)
    norm_sq = float(np.vdot(raw, raw).real)
    exact_sq = 1.0 / ecs_normalization(a, b) ** 2
    # the truncated norm can only fall short of the exact one
    lost = max(0.0, 1.0 - norm_sq / exact_sq)
    if lost > max(tail_tol, 2 * tail) + 1e-12:
        raise CutoffTooSmall(f"ECS norm {norm_sq!r} disagrees with closed form {exact_sq!r}",
                             lost=lost, tolerance=tail_tol)
    return FockVector.normalized(space, raw, lost)


# ---------------------------------------------------------------------------
# reductions and figures of merit


def partial_trace(rho: DensityMatrix, keep_mode: int) -> DensityMatrix:
    """Reduce a two-mode state onto ``keep_mode`` (0 or 1)."""
    _require_modes(rho.space, 2, "partial_trace")
    if keep_mode not in (0, 1):
        raise ValueError(f"keep_mode must be 0 or 1, got {keep_mode}")
    L = rho.space.levels
    single = rho.space.single()
    if rho.factor is not None:
        f = rho.factor.reshape(L, L, -1)
        if keep_mode == 1:
            red = np.einsum("abr,acr->bc", f, f.conj())
        else:
            red = np.einsum("abr,cbr->ac", f, f.conj())
    else:
        r4 = rho.elements.reshape(L, L, L, L)
        red = np.einsum("abac->bc", r4) if keep_mode == 1 else np.einsum("abcb->ac", r4)
    return DensityMatrix(single, red, trace_deficit=rho.trace_deficit, normalized=rho.normalized)


def fidelity_pure_mixed(psi: FockVector, rho: DensityMatrix) -> float:
    """``<psi|rho|psi>``."""
    if psi.space != rho.space:
        raise SpaceMismatch(f"{psi.space} vs {rho.space}")
    v = psi.coefficients
    if rho.factor is not None:
        return float(np.sum(np.abs(rho.factor.conj().T @ v) ** 2))
    return float(np.vdot(v, rho.elements @ v).real)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``(1/2) ||rho - sigma||_1``."""
    if rho.space != sigma.space:
        raise SpaceMismatch(f"{rho.space} vs {sigma.space}")
    diff = rho.elements - sigma.elements
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
