"""Exception types raised by the library."""


class CVTeleFidError(Exception):
    """Base class for all library errors."""


class CutoffTooSmall(CVTeleFidError):
    """Fock truncation discards more weight than the configured tolerance."""

    def __init__(self, message, *, lost=None, tolerance=None):
        super().__init__(message)
        self.lost = lost
        self.tolerance = tolerance


class GridTooCoarse(CVTeleFidError):
    """A quadrature grid fails to integrate a probability density to one."""


class DegenerateECS(CVTeleFidError, ValueError):
    """Entangled coherent state requested with coinciding amplitudes."""


class SpaceMismatch(CVTeleFidError, ValueError):
    """Operands live on different truncated Fock spaces."""


class PurificationMismatch(CVTeleFidError):
    """A purification does not reduce to the declared mixed state."""


class NoRoot(CVTeleFidError):
    """A root-finding target lies outside the attainable range."""


class DomainError(CVTeleFidError, ValueError):
    """A physical parameter lies outside its allowed range."""
