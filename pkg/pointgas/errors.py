from __future__ import annotations

from typing import Sequence


class PointGasError(Exception):
    """Base class for every failure raised by the library."""


class InvalidArgumentError(PointGasError, ValueError):
    """Raised when an operation receives arguments outside its domain."""


class SingularConfigurationError(PointGasError, ValueError):
    """Raised when two particle positions coincide and g is infinite."""


class EmptySumError(PointGasError, ValueError):
    """Raised when a pair sum has no terms (the unitary two-particle case)."""


class InfeasibleOccupationError(PointGasError, ValueError):
    """Raised when N fermions do not fit into the available one-body states."""


class PrecisionLossError(PointGasError, ArithmeticError):
    """Raised when the alternating canonical recursion loses its significant digits."""


class TruncationError(PointGasError, RuntimeError):
    """Raised when a spectrum cutoff is too low for the requested temperature."""


class SpectrumTooLargeError(PointGasError, RuntimeError):
    """Raised when a spectrum slice would exceed the configured size limit."""


class QuadratureError(PointGasError, RuntimeError):
    """Raised when adaptive quadrature or root bracketing does not converge."""


class IndefiniteAssemblyError(PointGasError, RuntimeError):
    """Raised when an assembled form that must be positive is not."""


class EigensolverError(PointGasError, RuntimeError):
    """Raised when the iterative eigensolver fails after all restarts."""

    def __init__(self, message: str, residuals: Sequence[float] | None = None) -> None:
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class BudgetExceededError(PointGasError, RuntimeError):
    """Raised when a grid would exceed the unknowns budget."""

    def __init__(self, message: str, suggested_cells: int | None = None) -> None:
        super().__init__(message)
        self.suggested_cells = suggested_cells


__all__ = [
    "BudgetExceededError",
    "EigensolverError",
    "EmptySumError",
    "IndefiniteAssemblyError",
    "InfeasibleOccupationError",
    "InvalidArgumentError",
    "PointGasError",
    "PrecisionLossError",
    "QuadratureError",
    "SingularConfigurationError",
    "SpectrumTooLargeError",
    "TruncationError",
]
