"""Coefficient fields, the phase kernel and admissibility checks.

Cross sections are stored per (cell, ordinate) even when physically isotropic,
since σ(x, v) may depend on the velocity. The phase kernel is normalized with
respect to the ordinate quadrature, Σ_j' p(i, j, j') w_j' = 1, which is the
discrete form of ∫_V p(x, v, v') dv' = 1.
"""

import logging
from typing import Any, Dict, Optional, Union

import numpy as np

from ..exceptions import DegenerateKernelError, DomainError, ValidationError
from ..models.coefficients import (
    AdmissibilityBounds,
    AdmissibilityReport,
    CoefficientField,
    PhaseKernel,
)
from ..models.transport import AngularDensityField
from .base import Base
from .presets import Presets

logger = logging.getLogger(__name__)


class Coefficients(Base):
    """Builders and checks for σ_a, σ_s, σ_t, source factors and the phase kernel."""

    def __init__(self, phase_space, presets: Optional[Presets] = None):
        """Initialize on a phase space with an optional preset registry."""
        super().__init__(phase_space)
        self.presets = presets or Presets()

    def field(
        self, kind: str, params: Optional[Dict[str, Any]] = None, label: str = "other"
    ) -> CoefficientField:
        """Generate a coefficient field from a preset."""
        return CoefficientField(self.presets.generate(self.phase_space, kind, params), label)

    def constant(self, value: float, label: str = "other") -> CoefficientField:
        """A constant coefficient field."""
        return CoefficientField(np.full(self.phase_space.shape, float(value)), label)

    def total_attenuation(
        self, sigma_a: CoefficientField, sigma_s: CoefficientField
    ) -> CoefficientField:
        """σ_t = σ_a + σ_s."""
        self._validate_slice(sigma_a.values, "sigma_a")
        self._validate_slice(sigma_s.values, "sigma_s")
        return CoefficientField(sigma_a.values + sigma_s.values, "sigma_t")

    def normalize_phase(self, raw: np.ndarray) -> PhaseKernel:
        """Scale every kernel row to unit quadrature sum.

        Args:
            raw: Nonnegative array (J, J), (1, J, J) or (n_cells, J, J)
                indexed (cell, ordinate_out, ordinate_in).

        Returns:
            PhaseKernel with Σ_j' p(i, j, j') w_j' = 1 on every row.

        Raises:
            DomainError: If raw has negative entries.
            DegenerateKernelError: If a row has zero quadrature sum.

        """
        raw = np.asarray(raw, dtype=float)
        if raw.ndim == 2:
            raw = raw[None]
        n_ord = self.vset.n_ordinates
        if raw.ndim != 3 or raw.shape[1:] != (n_ord, n_ord) or raw.shape[0] not in (
            1,
            self.mesh.n_cells,
        ):
            raise ValidationError(f"Phase kernel has incompatible shape {raw.shape}")
        if np.any(raw < 0):
            raise DomainError("Phase kernel entries must be nonnegative")
        sums = np.einsum("cjk,k->cj", raw, self.vset.weights)
        if np.any(sums <= 0):
            cell, row = np.argwhere(sums <= 0)[0]
            raise DegenerateKernelError(
                f"Phase kernel row (cell={cell}, ordinate={row}) has zero quadrature sum"
            )
        return PhaseKernel(values=raw / sums[:, :, None], weights=self.vset.weights.copy())

    def isotropic_phase(self) -> PhaseKernel:
        """The kernel p ≡ 1/|V|."""
        n_ord = self.vset.n_ordinates
        values = np.full((1, n_ord, n_ord), 1.0 / self.vset.measure)
        return PhaseKernel(values=values, weights=self.vset.weights.copy())

    def check_admissibility(
        self,
        field: Union[CoefficientField, AngularDensityField],
        bounds: AdmissibilityBounds,
    ) -> AdmissibilityReport:
        """Report discrete norms of a field against the bound M.

        Coefficient fields are checked in L∞(Ω × V). Density fields are
        measured in H¹(0,T;L∞) ∩ H²(0,T;L²) plus H¹(0,T;L²) of the spatial
        gradient, with forward differences in t and centered differences in x
        (one-sided at the boundary). The report never raises on failure.
        """
        if isinstance(field, CoefficientField):
            sup = field.sup_norm
            return AdmissibilityReport(
                kind="coefficient",
                bound=bounds.M,
                sup_norm=sup,
                total_norm=sup,
                passed=sup <= bounds.M,
            )
        return self._density_admissibility(field, bounds)

    def _density_admissibility(
        self, field: AngularDensityField, bounds: AdmissibilityBounds
    ) -> AdmissibilityReport:
        u = self._validate_slice(field.values, "density")
        dt, n_steps = field.dt, field.n_steps
        tw = self._time_weights(n_steps, dt)

        sq_l2 = self._integrate_phase(u**2)  # per step
        sup_t = np.max(np.abs(u), axis=(0, 1))
        du = np.diff(u, axis=2) / dt
        ddu = np.diff(u, n=2, axis=2) / dt**2 if n_steps >= 2 else np.zeros(u.shape[:2] + (0,))

        l2 = float(np.sqrt(tw @ sq_l2))
        dt_l2 = float(np.sqrt(dt * np.sum(self._integrate_phase(du**2))))
        dtt_l2 = float(np.sqrt(dt * np.sum(self._integrate_phase(ddu**2))))
        dt_sup_l2 = float(np.sqrt(dt * np.sum(np.max(np.abs(du), axis=(0, 1)) ** 2)))
        h1_linf = float(np.sqrt(tw @ sup_t**2 + dt_sup_l2**2))
        h2_l2 = float(np.sqrt(l2**2 + dt_l2**2 + dtt_l2**2))

        grad_sq = self._gradient_energy(u)
        dgrad_sq = self._gradient_energy(du)
        grad_l2 = float(np.sqrt(tw @ grad_sq))
        dt_grad_l2 = float(np.sqrt(dt * np.sum(dgrad_sq)))

        total = h1_linf + h2_l2 + float(np.hypot(grad_l2, dt_grad_l2))
        logger.debug("Density admissibility: total norm %.6g against M=%.6g", total, bounds.M)
        return AdmissibilityReport(
            kind="density",
            bound=bounds.M,
            sup_norm=float(np.max(sup_t)),
            total_norm=total,
            passed=total <= bounds.M,
            l2_norm=l2,
            dt_l2_norm=dt_l2,
            dtt_l2_norm=dtt_l2,
            dt_sup_l2_norm=dt_sup_l2,
            grad_l2_norm=grad_l2,
            dt_grad_l2_norm=dt_grad_l2,
        )

    def _gradient_energy(self, values: np.ndarray) -> np.ndarray:
        """∫∫ |∇_x values|² for every trailing index."""
        if values.shape[-1] == 0:
            return np.zeros(0)
        nx, ny = self.mesh.shape
        grid = values.reshape((nx, ny) + values.shape[1:])
        grad_sq = np.zeros_like(grid)
        for axis, (count, h) in enumerate(zip((nx, ny), self.mesh.cell_size)):
            if count < 2:
                continue
            grad_sq += np.gradient(grid, h, axis=axis) ** 2
        return np.atleast_1d(self._integrate_phase(grad_sq.reshape(values.shape)))
