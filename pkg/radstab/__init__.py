"""Radstab - Transport solver and numerical checks of stability estimates."""

__version__ = "0.1.0"
__license__ = "MIT"

# Public API exports
from radstab.config import RunConfig, parse_config
from radstab.core import Radstab
from radstab.exceptions import (
    ConfigurationError,
    DataError,
    DegenerateKernelError,
    DivergenceError,
    DomainError,
    HypothesisError,
    IncompleteDataError,
    InsufficientDataError,
    ObservationTimeError,
    PreconditionError,
    RadstabError,
    SignError,
    StabilityError,
    ValidationError,
)
from radstab.models.carleman import CarlemanConfig, EstimateReport
from radstab.models.coefficients import CoefficientField, PhaseKernel, SourceFactor
from radstab.models.geometry import MeshSpec, PhaseSpace
from radstab.models.stability import StabilityOptions, StabilityReport
from radstab.models.transport import AngularDensityField, ForwardOptions, ProblemData

# Package metadata
__all__ = [
    # Main classes
    "Radstab",
    "RunConfig",
    "parse_config",
    # Geometry and data models
    "MeshSpec",
    "PhaseSpace",
    "CoefficientField",
    "PhaseKernel",
    "SourceFactor",
    "ProblemData",
    # Solver models
    "ForwardOptions",
    "AngularDensityField",
    # Estimate and stability models
    "CarlemanConfig",
    "EstimateReport",
    "StabilityOptions",
    "StabilityReport",
    # Exceptions
    "RadstabError",
    "ConfigurationError",
    "DomainError",
    "ValidationError",
    "DataError",
    "IncompleteDataError",
    "InsufficientDataError",
    "DegenerateKernelError",
    "StabilityError",
    "DivergenceError",
    "HypothesisError",
    "ObservationTimeError",
    "PreconditionError",
    "SignError",
]
