"""Models for transport problems and their discrete solutions."""

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

import numpy as np

from .coefficients import CoefficientField, PhaseKernel, SourceFactor


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Data of an initial/boundary value problem for the transport equation.

    ``inflow`` is indexed by inflow-boundary entry: shape (n_minus,) for data
    constant in time, (n_minus, n_steps + 1) for tabulated data, or None for
    zero inflow. ``source`` and ``source_factor`` add the right-hand side f·R.
    """

    initial: np.ndarray  # a(x, v), (n_cells, J)
    sigma_t: CoefficientField
    sigma_s: CoefficientField
    kernel: PhaseKernel
    horizon: float
    inflow: Optional[np.ndarray] = None
    source: Optional[CoefficientField] = None
    source_factor: Optional[SourceFactor] = None

    @property
    def has_source(self) -> bool:
        """True when a nonzero right-hand side f·R is present."""
        return self.source is not None and self.source_factor is not None

    def with_sigma_t(self, sigma_t: CoefficientField) -> "ProblemData":
        """Copy with another total attenuation."""
        return replace(self, sigma_t=sigma_t)

    def with_sigma_s(self, sigma_s: CoefficientField) -> "ProblemData":
        """Copy with another scattering coefficient."""
        return replace(self, sigma_s=sigma_s)


@dataclass
class ForwardOptions:
    """Options for the explicit transport solver.

    Args:
        cfl_factor: Upper bound for the upwind Courant number
            dt · max_j(|v_j1|/Δx1 + |v_j2|/Δx2). Must lie in (0, 1]. Default 0.9.
        collision: "exponential" integrates absorption exactly over a step
            (uⁿ⁺¹ = e^{-σ_t dt}(uⁿ - dt v·∇uⁿ) + φ₁(σ_s S(uⁿ) + f R));
            "euler" is the plain forward-Euler update. Default "exponential".
        positivity_tol: Largest negative value tolerated before a monotonicity
            warning is logged. Default 1e-12.

    """

    cfl_factor: float = 0.9
    collision: str = "exponential"
    positivity_tol: float = 1e-12


@dataclass(frozen=True, eq=False)
class AngularDensityField:
    """u(x_i, v_j, t_k) on the full grid plus the recorded boundary traces.

    ``trace_out`` is indexed (outflow entry, step) and holds the upwind cell
    value leaving through each face; ``trace_in`` is indexed (inflow entry,
    step) and holds the imposed inflow data.
    """

    values: np.ndarray  # (n_cells, J, n_steps + 1)
    dt: float
    trace_out: np.ndarray
    trace_in: np.ndarray

    @property
    def n_steps(self) -> int:
        """Number of time steps (intervals)."""
        return int(self.values.shape[-1] - 1)

    @property
    def horizon(self) -> float:
        """Final time T = n_steps · dt."""
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        """Time grid t_k = k · dt."""
        return np.arange(self.n_steps + 1) * self.dt

    def at_step(self, k: int) -> np.ndarray:
        """Slice u(·, ·, t_k)."""
        return self.values[..., k]

    def scaled(self, alpha: float) -> "AngularDensityField":
        """Field and traces multiplied by a scalar."""
        return AngularDensityField(
            alpha * self.values, self.dt, alpha * self.trace_out, alpha * self.trace_in
        )

    def minus(self, other: "AngularDensityField") -> "AngularDensityField":
        """Difference of two fields on the same grid."""
        return AngularDensityField(
            self.values - other.values,
            self.dt,
            self.trace_out - other.trace_out,
            self.trace_in - other.trace_in,
        )

    def describe(self) -> Dict[str, Any]:
        """Shape and timing metadata for sidecar files."""
        return {
            "shape": list(self.values.shape),
            "axes": ["cell", "ordinate", "step"],
            "dt": self.dt,
            "horizon": self.horizon,
            "units": {"t": "time", "x": "length", "u": "density"},
        }
