"""
Exception hierarchy for the laboratory.
Every failure raised by the core modules derives from LaboratoryError.
"""

from typing import Any, Dict, Optional


class LaboratoryError(Exception):
    """Base class for all laboratory errors."""


class InvalidArgumentError(LaboratoryError, ValueError):
    """An operation was called outside its documented domain."""


class ConfigError(LaboratoryError, ValueError):
    """An experiment configuration could not be parsed or validated."""


class InvariantViolation(LaboratoryError, AssertionError):
    """A structural invariant was broken (signals a defective kernel or sampler)."""


class NumericFailure(LaboratoryError, ArithmeticError):
    """
    A quadrature did not reach its tolerance.
    Carries the partial value so callers can still report it.
    """

    def __init__(
        self,
        message: str,
        partial_value: float = float("nan"),
        error_estimate: float = float("nan"),
        diagnostics: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.partial_value = partial_value
        self.error_estimate = error_estimate
        self.diagnostics = diagnostics or {}

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (partial={self.partial_value:.6g}, error={self.error_estimate:.3g})"
