"""Models for boundary measurements and stability experiment reports."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .transport import ForwardOptions


@dataclass(frozen=True, eq=False)
class MeasurementTrace:
    """∂_t u on boundary entries with the quadrature data needed to integrate it.

    ``values`` is indexed (entry, step). ``side`` is "plus", "minus" or "full".
    """

    faces: np.ndarray
    ordinates: np.ndarray
    nu_dot_v: np.ndarray
    areas: np.ndarray  # dS of each entry's face
    weights: np.ndarray  # w_j of each entry's ordinate
    values: np.ndarray
    dt: float
    side: str

    @property
    def n_steps(self) -> int:
        """Number of time steps (intervals)."""
        return int(self.values.shape[-1] - 1)


@dataclass
class StabilityReport:
    """Outcome of one stability experiment.

    ``ratio`` is coefficient_diff_norm / measurement_norm and is None for a
    degenerate pair (zero coefficient difference).
    """

    experiment_id: str
    kind: str  # "sigma_t", "sigma_s" or "linearized"
    coefficient_diff_norm: float
    measurement_norm: float
    ratio: Optional[float]
    degenerate: bool = False
    side: str = "plus"
    weighted: bool = True
    amplitude: Optional[float] = None
    seed: Optional[int] = None
    measurement_norms: Dict[str, float] = field(default_factory=dict)
    source_factor_floor: Optional[float] = None
    admissibility: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary."""
        return asdict(self)


@dataclass
class HolderFit:
    """Least-squares exponent of ‖f‖² against the squared measurement norm."""

    theta: float
    intercept: float
    residual: float  # Root-mean-square residual of the log-log fit
    stderr: float
    n_points: int
    in_range: bool  # 0 < theta <= 1 (up to fit tolerance)

    def to_dict(self) -> Dict[str, Any]:
        """Convert fit to dictionary."""
        return asdict(self)


@dataclass
class EnsembleSummary:
    """Ratio statistics of an ensemble of comparable experiments."""

    kind: str
    count: int
    rho_min: float
    rho_max: float
    spread: float
    geometric_mean: float
    log_spread: float
    threshold: float
    passed: bool
    n_unbounded: int = 0  # Nondegenerate reports with an infinite or zero ratio
    reports: List[StabilityReport] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert summary to dictionary."""
        return asdict(self)


@dataclass
class StabilityOptions:
    """Options shared by the stability experiments.

    Args:
        side: Boundary part of the headline measurement: "plus" or "full".
        weighted: Weight the measurement by ν·v (only on "plus"). Default True.
        beta: Weight slope for the linearized observation-time check; None
            uses min |v|².
        hold_sigma_t: In σ_s experiments keep σ_t fixed across the pair
            (implicitly perturbing σ_a). Default True.
        admissibility_bound: Bound M for the attached admissibility reports;
            None skips them.
        forward: Solver options used for every run.

    """

    side: str = "plus"
    weighted: bool = True
    beta: Optional[float] = None
    hold_sigma_t: bool = True
    admissibility_bound: Optional[float] = None
    forward: ForwardOptions = field(default_factory=ForwardOptions)
