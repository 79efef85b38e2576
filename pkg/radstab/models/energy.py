"""Models for energy traces and a priori inequality reports."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    """E(t) = ∫∫ |u|² dv dx at every step plus the boundary and source integrals."""

    times: np.ndarray
    energy: np.ndarray
    inflow_integral: float  # ∫∫_{Γ-} |ν·v| |u|² over [0, T]
    outflow_integral: float  # ∫∫_{Γ+} (ν·v) |u|² over [0, T]
    source_norm: float  # ‖f R‖² over Ω × V × (0, T)
    inflow_unweighted: float = 0.0  # ∫∫_{Γ-} |u|² over [0, T]

    def to_dict(self) -> Dict[str, Any]:
        """Convert trace summary to dictionary (arrays as lists)."""
        return {
            "times": self.times.tolist(),
            "energy": self.energy.tolist(),
            "inflow_integral": self.inflow_integral,
            "outflow_integral": self.outflow_integral,
            "source_norm": self.source_norm,
            "inflow_unweighted": self.inflow_unweighted,
        }


@dataclass
class InequalityReport:
    """Fitted constant of one a priori inequality.

    ``c_fit`` is the smallest constant making the discrete inequality hold;
    None when both sides vanish (not applicable).
    """

    inequality_id: str
    c_fit: Optional[float]
    lhs: float
    rhs_components: Dict[str, float] = field(default_factory=dict)
    argmax_t: Optional[float] = None
    applicable: bool = True
    violation: bool = False  # Nonzero left side against a zero right side
    sign_consistent: bool = True  # ν·v < 0 on every inflow entry

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary."""
        return asdict(self)


@dataclass
class IdentityResidual:
    """Per-step defect of the discrete energy balance."""

    residuals: np.ndarray
    accumulated: float  # Σ_k |residual_k| dt
    dt: float

    def to_dict(self) -> Dict[str, Any]:
        """Convert residual summary to dictionary."""
        return {"accumulated": self.accumulated, "dt": self.dt, "steps": int(self.residuals.size)}

