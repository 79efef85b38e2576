"""Models for the exponential weight, its geometric constants and weighted-estimate reports."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple


@dataclass(frozen=True)
class CarlemanConfig:
    """Weight slope, parameter grid and the level constants of the weight.

    r_min and r_max are the extrema of v·x over the closed domain and ordinates;
    r_max - beta·T < r0 < r1 < r_min, mu = r1 - r0, and delta sizes the time
    cutoff.
    """

    beta: float
    horizon: float
    s_grid: Tuple[float, ...]
    r_min: float
    r_max: float
    r0: float
    r1: float
    delta: float
    mu: float
    s0: float

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        data = asdict(self)
        data["s_grid"] = list(self.s_grid)
        return data


@dataclass
class EstimatePoint:
    """Both sides of a weighted estimate at one value of s."""

    s: float
    lhs_terms: Dict[str, float]
    rhs_terms: Dict[str, float]
    c: Optional[float]  # (Σ lhs) / (Σ rhs); None when not applicable
    log_shift: float  # Common exponent subtracted before exponentiation

    def to_dict(self) -> Dict[str, Any]:
        """Convert point to dictionary."""
        return asdict(self)


@dataclass
class EstimateReport:
    """Weighted-estimate evaluation over the s grid."""

    estimate_id: str  # "streaming" or "scattering"
    points: List[EstimatePoint] = field(default_factory=list)
    applicable: bool = True

    @property
    def constants(self) -> List[Optional[float]]:
        """C(s) for every grid point."""
        return [p.c for p in self.points]

    @property
    def c_spread(self) -> Optional[float]:
        """max_s C(s) / min_s C(s), None when any C is missing or zero."""
        values = [c for c in self.constants if c is not None]
        if not values or len(values) != len(self.points) or min(values) <= 0:
            return None
        return max(values) / min(values)

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary."""
        return {
            "estimate_id": self.estimate_id,
            "applicable": self.applicable,
            "c_spread": self.c_spread,
            "points": [p.to_dict() for p in self.points],
        }
