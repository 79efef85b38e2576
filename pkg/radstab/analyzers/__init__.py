"""Analyzers module containing all phase-space analysis classes."""

from .base import Base
from .carleman import Carleman
from .coefficients import Coefficients
from .energy import Energy
from .geometry import Geometry
from .presets import Presets
from .stability import Stability
from .stats import Stats
from .transport import Transport

__all__ = [
    "Base",
    "Carleman",
    "Coefficients",
    "Energy",
    "Geometry",
    "Presets",
    "Stability",
    "Stats",
    "Transport",
]
