"""
Core package for the stable Girsanov laboratory.
Contains the simulation, quadrature and experiment components.
"""

from .models import *
from .errors import ConfigError, InvalidArgumentError, InvariantViolation, LaboratoryError, NumericFailure

__all__ = [
    'ConfigError',
    'InvalidArgumentError',
    'InvariantViolation',
    'LaboratoryError',
    'NumericFailure',
]
