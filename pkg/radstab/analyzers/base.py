"""Base class for all radstab analyzers with shared validation and quadrature."""

from typing import Optional

import numpy as np

from ..exceptions import ValidationError
from ..models.geometry import BoundarySet, PhaseSpace


class Base:
    """Base class containing shared functionality for the phase-space analyzers.

    Every analyzer works on one PhaseSpace (mesh, velocity set, boundary
    partition). The quadrature helpers here are the single source of the
    discrete integrals so that solver traces, energy checks, weighted
    estimates and measurement norms integrate identically.
    """

    def __init__(self, phase_space: PhaseSpace):
        """Initialize the analyzer on a phase space."""
        self.phase_space = phase_space

    @property
    def mesh(self):
        """The spatial mesh."""
        return self.phase_space.mesh

    @property
    def vset(self):
        """The velocity set."""
        return self.phase_space.vset

    @property
    def partition(self):
        """The boundary partition."""
        return self.phase_space.partition

    def _validate_slice(self, values: np.ndarray, name: str = "field") -> np.ndarray:
        """Check that an array is indexed (cell, ordinate[, ...])."""
        values = np.asarray(values, dtype=float)
        expected = self.phase_space.shape
        if values.ndim < 2 or values.shape[:2] != expected:
            raise ValidationError(
                f"{name} must have leading shape {expected}, got {values.shape}"
            )
        return values

    def _phase_weights(self) -> np.ndarray:
        """Cell area times ordinate weight, shape (n_cells, J)."""
        return self.mesh.cell_volume * np.broadcast_to(
            self.vset.weights, self.phase_space.shape
        )

    def _integrate_phase(self, values: np.ndarray) -> np.ndarray:
        """∫_Ω∫_V values dv dx for every trailing index."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self._phase_weights(), values, axes=([0, 1], [0, 1]))

    def l2_norm(self, values: np.ndarray) -> float:
        """‖values‖ in L²(Ω × V)."""
        return float(np.sqrt(self._integrate_phase(np.square(values))))

    @staticmethod
    def _time_weights(n_steps: int, dt: float) -> np.ndarray:
        """Trapezoid weights on t_k = k·dt, k = 0..n_steps; they sum to n_steps·dt."""
        weights = np.full(n_steps + 1, dt)
        weights[0] = weights[-1] = 0.5 * dt
        if n_steps == 0:
            weights[:] = 0.0
        return weights

    def _entry_weights(self, entries: BoundarySet, flux: bool = False) -> np.ndarray:
        """dS · w_j per boundary entry, times ν·v when ``flux`` is set."""
        weights = self.mesh.face_areas[entries.faces] * self.vset.weights[entries.ordinates]
        if flux:
            weights = weights * entries.nu_dot_v
        return weights

    def _integrate_boundary(
        self,
        traces: np.ndarray,
        entries: BoundarySet,
        dt: float,
        flux: bool = False,
        time_weights: Optional[np.ndarray] = None,
    ) -> float:
        """∫_0^T Σ_entries dS w_j [ν·v] traces dt with trapezoid weights in t."""
        if len(entries) == 0:
            return 0.0
        if time_weights is None:
            time_weights = self._time_weights(traces.shape[-1] - 1, dt)
        return float(self._entry_weights(entries, flux) @ traces @ time_weights)
