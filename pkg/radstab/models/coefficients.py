"""Models for coefficient fields, phase kernels, source factors and admissibility reports."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..exceptions import ConfigurationError, DomainError, ValidationError

CROSS_SECTION_LABELS = ("sigma_a", "sigma_s", "sigma_t")
FIELD_LABELS = CROSS_SECTION_LABELS + ("f", "other")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """A scalar field over (cell, ordinate).

    Cross-section labels (sigma_a, sigma_s, sigma_t) must be nonnegative.
    """

    values: np.ndarray  # (n_cells, n_ordinates)
    label: str = "other"

    def __post_init__(self):
        """Validate label, shape and sign."""
        if self.label not in FIELD_LABELS:
            raise ValidationError(f"Unknown coefficient label: {self.label}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValidationError(
                f"Coefficient field must be indexed (cell, ordinate), got shape {values.shape}"
            )
        if self.label in CROSS_SECTION_LABELS and np.any(values < 0):
            raise DomainError(f"{self.label} must be nonnegative everywhere")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        """Array shape (n_cells, n_ordinates)."""
        return self.values.shape

    @property
    def sup_norm(self) -> float:
        """Maximum absolute value."""
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def relabel(self, label: str) -> "CoefficientField":
        """Return the same values under another label."""
        return CoefficientField(self.values, label)

    def plus(self, other: "CoefficientField", label: Optional[str] = None) -> "CoefficientField":
        """Pointwise sum, labelled like self unless a label is given."""
        return CoefficientField(self.values + other.values, label or self.label)

    def scaled(self, alpha: float, label: Optional[str] = None) -> "CoefficientField":
        """Pointwise product with a scalar."""
        return CoefficientField(alpha * self.values, label or self.label)


@dataclass(frozen=True, eq=False)
class PhaseKernel:
    """Normalized scattering kernel p(x, v_out, v_in) on the ordinate grid.

    ``values`` has shape (n_cells, J, J) or (1, J, J); a leading axis of length
    one is an x-independent kernel broadcast over all cells.
    """

    values: np.ndarray
    weights: np.ndarray

    @property
    def x_independent(self) -> bool:
        """True when one kernel serves every cell."""
        return self.values.shape[0] == 1

    def row_sums(self) -> np.ndarray:
        """Quadrature sums Σ_j' p(i, j, j') w_j', shape (n_cells or 1, J)."""
        return np.einsum("cjk,k->cj", self.values, self.weights)


@dataclass(frozen=True)
class AdmissibilityBounds:
    """The uniform bound M of the admissible class."""

    M: float

    def __post_init__(self):
        """Validate the bound."""
        if not self.M > 0:
            raise ConfigurationError(f"Admissibility bound M must be positive, got {self.M}")


@dataclass(frozen=True, eq=False)
class SourceFactor:
    """The factor R(x, v, t) multiplying the unknown source f.

    ``values`` is (n_cells, J) for a time-constant factor or (n_cells, J, n_steps + 1).
    """

    values: np.ndarray

    def __post_init__(self):
        """Validate dimensionality."""
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (2, 3):
            raise ValidationError(
                f"Source factor must be (cell, ordinate[, step]), got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def time_constant(self) -> bool:
        """True when R does not depend on t."""
        return self.values.ndim == 2

    @property
    def initial(self) -> np.ndarray:
        """R(·, ·, 0)."""
        return self.values if self.time_constant else self.values[..., 0]

    def at_step(self, k: int) -> np.ndarray:
        """R(·, ·, t_k)."""
        return self.values if self.time_constant else self.values[..., k]


@dataclass
class AdmissibilityReport:
    """Discrete norms of a field and a verdict against the bound M."""

    kind: str  # "coefficient" or "density"
    bound: float
    sup_norm: float
    total_norm: float  # Quantity compared against M
    passed: bool
    l2_norm: Optional[float] = None
    dt_l2_norm: Optional[float] = None
    dtt_l2_norm: Optional[float] = None
    dt_sup_l2_norm: Optional[float] = None
    grad_l2_norm: Optional[float] = None
    dt_grad_l2_norm: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary."""
        return asdict(self)
