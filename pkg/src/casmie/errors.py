"""Exception taxonomy shared across the library."""


class CasmieError(Exception):
    """Base class for all library errors."""


class DomainError(CasmieError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RadialOverflowError(CasmieError, OverflowError):
    """An unscaled radial function exceeds the representable range.

    Callers hitting this should switch to the scaled evaluation API.
    """


class OrderCapError(CasmieError, ValueError):
    """Requested multipole order exceeds the configured hard cap."""


class QuadratureError(CasmieError, RuntimeError):
    """A numerical quadrature failed to reach the requested accuracy."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateDenominatorError(CasmieError, ArithmeticError):
    """A reflection-coefficient denominator underflowed (near a resonance
    of an effectively lossless configuration)."""


class SingularSystemError(CasmieError, ArithmeticError):
    """An interface-matching linear system is numerically singular."""


class RootSearchError(CasmieError, RuntimeError):
    """Complex root search failed to converge; carries the best residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TailError(CasmieError, RuntimeError):
    """A truncated expansion's tail estimate exceeds the tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(CasmieError, RuntimeError):
    """A stress computation did not converge; carries the partial result."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(CasmieError, ValueError):
    """A job configuration failed validation; carries the diagnostics."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
