"""Energy of a transport solution and the a priori bounds built on it.

E(t) = ∫_Ω∫_V |u|² dv dx obeys

    E'(t) = -∫_∂Ω∫_V (ν·v)|u|² - 2∫∫σ_t u² + 2∫∫σ_s S(u) u + 2∫∫ f R u,

which gives the Gronwall bound E(t) ≤ C(E(0) + ∫∫_{Γ-}|ν·v||u|² + ‖fR‖²) and,
for the linearized problem, the outflow bound
∫∫_{Γ+}|∂_t u|² ≤ C‖f‖² + C∫∫_{Γ-}|∂_t u|².

All boundary integrals use the face-area × ordinate-weight quadrature of the
solver traces, and all time integrals the trapezoid rule.
"""

import logging
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..models.energy import EnergyTrace, IdentityResidual, InequalityReport
from ..models.geometry import BoundarySet
from ..models.transport import AngularDensityField, ProblemData
from .base import Base
from .transport import Transport

logger = logging.getLogger(__name__)


class Energy(Base):
    """Energy traces, inequality fits and the discrete energy balance."""

    def __init__(self, phase_space, transport: Optional[Transport] = None):
        """Initialize on a phase space, sharing a solver when one is given."""
        super().__init__(phase_space)
        self.transport = transport or Transport(phase_space)

    def _boundary_series(self, traces: np.ndarray, entries: BoundarySet, flux: bool) -> np.ndarray:
        """Σ_entries dS w_j [|ν·v|] traces² at every step."""
        if len(entries) == 0:
            return np.zeros(traces.shape[-1])
        weights = self._entry_weights(entries)
        if flux:
            weights = weights * np.abs(entries.nu_dot_v)
        return weights @ traces**2

    def _source_series(self, field: AngularDensityField, data: Optional[ProblemData]) -> np.ndarray:
        """∫∫ (f R)² at every step, zero without a source."""
        if data is None or not data.has_source:
            return np.zeros(field.n_steps + 1)
        f = data.source.values
        return np.array(
            [
                self._integrate_phase((f * data.source_factor.at_step(k)) ** 2)
                for k in range(field.n_steps + 1)
            ]
        )

    def sign_consistent(self) -> bool:
        """True when ν·v < 0 on every inflow entry and > 0 on every outflow entry."""
        return bool(
            np.all(self.partition.gamma_minus.nu_dot_v < 0)
            and np.all(self.partition.gamma_plus.nu_dot_v > 0)
        )

    def energy(self, field: AngularDensityField, data: Optional[ProblemData] = None) -> EnergyTrace:
        """Compute E(t_k) and the accumulated boundary and source integrals.

        Args:
            field: Solver output with recorded traces.
            data: Problem data; its source f·R enters ``source_norm``.

        Returns:
            EnergyTrace with midpoint quadrature over cells and ordinate weights.

        """
        u = self._validate_slice(field.values, "field")
        energy = np.atleast_1d(self._integrate_phase(u**2))
        tw = self._time_weights(field.n_steps, field.dt)
        return EnergyTrace(
            times=field.times,
            energy=energy,
            inflow_integral=float(
                self._boundary_series(field.trace_in, self.partition.gamma_minus, True) @ tw
            ),
            outflow_integral=float(
                self._boundary_series(field.trace_out, self.partition.gamma_plus, True) @ tw
            ),
            source_norm=float(self._source_series(field, data) @ tw),
            inflow_unweighted=float(
                self._boundary_series(field.trace_in, self.partition.gamma_minus, False) @ tw
            ),
        )

    def verify_gronwall_bound(
        self, field: AngularDensityField, data: Optional[ProblemData] = None
    ) -> InequalityReport:
        """Smallest C with E(t) ≤ C(E(0) + ∫∫_{Γ-}|ν·v||u|² + ∫‖fR‖²) for all t.

        Returns:
            InequalityReport "energy-gronwall"; not applicable when both sides
            vanish, flagged as a violation when E > 0 against a zero right side.

        """
        trace = self.energy(field, data)
        inflow = self._boundary_series(field.trace_in, self.partition.gamma_minus, True)
        source = self._source_series(field, data)
        inflow_cum = cumulative_trapezoid(inflow, dx=field.dt, initial=0.0)
        source_cum = cumulative_trapezoid(source, dx=field.dt, initial=0.0)
        rhs = trace.energy[0] + inflow_cum + source_cum
        lhs = trace.energy

        scale = max(float(np.max(lhs)), float(np.max(rhs)), 0.0)
        positive_rhs = rhs > 0
        violation = bool(np.any(~positive_rhs & (lhs > 1e-300)))
        report = InequalityReport(
            inequality_id="energy-gronwall",
            c_fit=None,
            lhs=float(np.max(lhs)),
            rhs_components={
                "initial_energy": float(trace.energy[0]),
                "inflow": float(inflow_cum[-1]),
                "source": float(source_cum[-1]),
            },
            sign_consistent=self.sign_consistent(),
        )
        if scale == 0.0:
            report.applicable = False
            return report
        if violation:
            report.violation = True
            logger.warning("Energy is positive where the Gronwall right-hand side vanishes")
            return report
        ratios = lhs[positive_rhs] / rhs[positive_rhs]
        k = int(np.argmax(ratios))
        report.c_fit = float(ratios[k])
        report.argmax_t = float(field.times[positive_rhs][k])
        logger.info("Gronwall constant %.6g attained at t=%.4g", report.c_fit, report.argmax_t)
        return report

    def verify_outflow_bound(self, field: AngularDensityField, f_norm: float) -> InequalityReport:
        """Smallest C with ∫∫_{Γ+}|∂_t u|² ≤ C(‖f‖² + ∫∫_{Γ-}|∂_t u|²).

        Args:
            field: Linearized run with recorded traces.
            f_norm: ‖f‖ in L²(Ω × V).

        Returns:
            InequalityReport "outflow-derivative".

        """
        plus = self.transport.time_derivative_trace(field, "plus")
        minus = self.transport.time_derivative_trace(field, "minus")
        lhs = self._integrate_boundary(plus.values**2, self.partition.gamma_plus, field.dt)
        inflow = self._integrate_boundary(minus.values**2, self.partition.gamma_minus, field.dt)
        source = float(f_norm) ** 2
        rhs = source + inflow
        report = InequalityReport(
            inequality_id="outflow-derivative",
            c_fit=None,
            lhs=lhs,
            rhs_components={"source": source, "inflow": inflow},
            sign_consistent=self.sign_consistent(),
        )
        if rhs == 0.0:
            report.applicable = lhs > 0.0
            report.violation = lhs > 0.0
            return report
        report.c_fit = lhs / rhs
        logger.info("Outflow-derivative constant %.6g", report.c_fit)
        return report

    def identity_residual(
        self, field: AngularDensityField, data: ProblemData
    ) -> IdentityResidual:
        """Per-step defect of the discrete energy balance.

        res_k = (E_{k+1} - E_k)/dt - [-∫_∂Ω∫_V (ν·v)u_k² - 2∫∫σ_t u_k²
        + 2∫∫σ_s S(u_k) u_k + 2∫∫ f R_k u_k], with S(u)(v) = ∫ p(x, v, v') u(v') dv'.
        The accumulated Σ|res_k| dt is first order in (h, dt).
        """
        u = self._validate_slice(field.values, "field")
        trace = self.energy(field, data)
        outflow = self.partition.gamma_plus
        inflow = self.partition.gamma_minus
        out_w = self._entry_weights(outflow, flux=True)
        in_w = self._entry_weights(inflow, flux=True)
        sigma_t = data.sigma_t.values
        sigma_s = data.sigma_s.values

        residuals = np.empty(field.n_steps)
        for k in range(field.n_steps):
            uk = u[..., k]
            flux = out_w @ field.trace_out[:, k] ** 2 + in_w @ field.trace_in[:, k] ** 2
            balance = -flux - 2.0 * self._integrate_phase(sigma_t * uk**2)
            scatter = self.transport.scattering_integral(uk, data.kernel)
            balance += 2.0 * self._integrate_phase(sigma_s * scatter * uk)
            if data.has_source:
                balance += 2.0 * self._integrate_phase(
                    data.source.values * data.source_factor.at_step(k) * uk
                )
            residuals[k] = (trace.energy[k + 1] - trace.energy[k]) / field.dt - balance
        accumulated = float(np.sum(np.abs(residuals)) * field.dt)
        logger.debug("Energy identity residual %.6g over %d steps", accumulated, field.n_steps)
        return IdentityResidual(residuals=residuals, accumulated=accumulated, dt=field.dt)
