"""Custom exceptions for radstab."""

from typing import Optional


class RadstabError(Exception):
    """Base exception for all radstab errors."""

    pass


class ConfigurationError(RadstabError):
    """Raised when configuration is invalid."""

    pass


class DomainError(RadstabError):
    """Raised when a value lies outside its mathematical domain."""

    pass


class ValidationError(RadstabError):
    """Raised when input validation fails."""

    pass


class DataError(RadstabError):
    """Raised when data processing encounters errors."""

    pass


class IncompleteDataError(DataError):
    """Raised when boundary or source data does not cover the required entries."""

    pass


class InsufficientDataError(DataError):
    """Raised when there are too few time steps or reports for an operation."""

    pass


class DegenerateKernelError(RadstabError):
    """Raised when a phase kernel row cannot be normalized."""

    pass


class StabilityError(RadstabError):
    """Raised when a time step violates the upwind Courant condition."""

    pass


class DivergenceError(RadstabError):
    """Raised when the solver produces non-finite values."""

    def __init__(self, message: str, step: int):
        """Initialize with the index of the first non-finite step."""
        super().__init__(message)
        self.step = step


class HypothesisError(RadstabError):
    """Raised when a hypothesis of the stability theory does not hold."""

    def __init__(self, message: str, condition: Optional[str] = None):
        """Initialize with the name of the violated condition."""
        super().__init__(message)
        self.condition = condition


class ObservationTimeError(HypothesisError):
    """Raised when the observation horizon is too short."""

    pass


class PreconditionError(RadstabError):
    """Raised when a weighted estimate is evaluated on an inadmissible field."""

    pass


class SignError(RadstabError):
    """Raised when a flux-weighted norm is requested where the flux is not positive."""

    pass
