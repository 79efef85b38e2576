"""Explicit upwind solver for the time-dependent transport equation.

The solver advances

    ∂_t u + v·∇u + σ_t u - σ_s ∫_V p(x, v, v') u(x, v', t) dv' = f R

with u(·, ·, 0) = a and u = g on the inflow boundary, using first-order
upwind differences per ordinate and one of two explicit collision updates:

- ``exponential`` (default):
  uⁿ⁺¹ = e^{-σ_t dt}(uⁿ - dt v·∇uⁿ) + φ₁(σ_s S(uⁿ) + f Rⁿ),
  φ₁ = (1 - e^{-σ_t dt}) / σ_t. Absorption is integrated exactly over a step,
  so a constant-σ_t run equals the free-streaming run times e^{-σ_t t} and
  u ≡ const is an exact fixed point whenever σ_a = 0.
- ``euler``: uⁿ⁺¹ = uⁿ - dt(v·∇uⁿ + σ_t uⁿ - σ_s S(uⁿ) - f Rⁿ).

Both are monotone, hence positivity preserving, when the upwind Courant
number dt · max_j(|v_j1|/Δx1 + |v_j2|/Δx2) is at most one (for ``euler`` the
collision term additionally needs dt σ_t ≤ 1 - Courant).

Each step reads only the previous slice and writes a fresh one; streaming and
absorption are independent per ordinate and the scattering integral is one
reduction over ordinates per cell.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from ..exceptions import (
    ConfigurationError,
    DivergenceError,
    IncompleteDataError,
    InsufficientDataError,
    StabilityError,
    ValidationError,
)
from ..models.coefficients import CoefficientField, PhaseKernel, SourceFactor
from ..models.geometry import BoundarySet, PhaseSpace
from ..models.stability import MeasurementTrace
from ..models.transport import AngularDensityField, ForwardOptions, ProblemData
from .base import Base

logger = logging.getLogger(__name__)

COLLISION_UPDATES = ("exponential", "euler")


def gradient_in_time(values: np.ndarray, dt: float) -> np.ndarray:
    """∂_t along the last axis: centered inside, one-sided at both ends."""
    if values.shape[-1] < 2:
        raise InsufficientDataError("Time derivative needs at least two time levels")
    if values.size == 0:
        return np.zeros_like(values)
    return np.gradient(values, dt, axis=-1, edge_order=1)


class Transport(Base):
    """Upwind streaming, scattering and time stepping on one phase space."""

    def __init__(self, phase_space: PhaseSpace):
        """Initialize the solver and precompute boundary lookups."""
        super().__init__(phase_space)
        mesh = self.mesh
        nx, ny = mesh.shape
        ordinates = self.vset.ordinates
        tol = self.partition.tol
        self._vx = ordinates[:, 0]
        self._vy = ordinates[:, 1]
        self._upwind_x = np.where(self._vx > tol, 1, np.where(self._vx < -tol, -1, 0))
        self._upwind_y = np.where(self._vy > tol, 1, np.where(self._vy < -tol, -1, 0))

        # Ghost-cell slots of every inflow entry: (side, position along side, ordinate).
        minus = self.partition.gamma_minus
        face_sides = np.array([f.side for f in mesh.boundary_faces])
        cells = mesh.face_cells[minus.faces]
        self._ghost_side = face_sides[minus.faces]
        self._ghost_pos = np.where(
            np.isin(self._ghost_side, ("left", "right")), cells % ny, cells // ny
        )
        self._ghost_ord = minus.ordinates
        self._grid_shape = (nx, ny)

        plus = self.partition.gamma_plus
        self._out_cells = mesh.face_cells[plus.faces]
        self._out_ords = plus.ordinates
        self._in_cells = cells

    # ------------------------------------------------------------------
    # Discrete operators
    # ------------------------------------------------------------------

    def courant_number(self, dt: float) -> float:
        """dt · max_j(|v_j1|/Δx1 + |v_j2|/Δx2)."""
        hx, hy = self.mesh.cell_size
        return float(dt * np.max(np.abs(self._vx) / hx + np.abs(self._vy) / hy))

    def stable_time_step(self, cfl_factor: float = 0.9) -> float:
        """Largest dt whose upwind Courant number equals cfl_factor."""
        return cfl_factor / self.courant_number(1.0)

    def inflow_from_initial(self, initial: np.ndarray) -> np.ndarray:
        """Time-constant inflow equal to the initial data on inflow entries."""
        initial = self._validate_slice(initial, "initial data")
        return initial[self._in_cells, self._ghost_ord].copy()

    def _ghosts(self, inflow: np.ndarray) -> Tuple[np.ndarray, ...]:
        nx, ny = self._grid_shape
        n_ord = self.vset.n_ordinates
        left, right = np.zeros((ny, n_ord)), np.zeros((ny, n_ord))
        bottom, top = np.zeros((nx, n_ord)), np.zeros((nx, n_ord))
        for name, ghost in (("left", left), ("right", right), ("bottom", bottom), ("top", top)):
            mask = self._ghost_side == name
            ghost[self._ghost_pos[mask], self._ghost_ord[mask]] = inflow[mask]
        return left, right, bottom, top

    def _check_inflow_slice(self, inflow: Optional[np.ndarray]) -> np.ndarray:
        n_minus = len(self.partition.gamma_minus)
        if inflow is None:
            raise IncompleteDataError(f"Inflow values missing for {n_minus} inflow entries")
        inflow = np.asarray(inflow, dtype=float)
        if inflow.shape != (n_minus,):
            raise IncompleteDataError(
                f"Inflow must supply one value per inflow entry ({n_minus}), "
                f"got shape {inflow.shape}"
            )
        if not np.all(np.isfinite(inflow)):
            raise IncompleteDataError("Inflow values contain missing (non-finite) entries")
        return inflow

    def apply_streaming(self, u: np.ndarray, inflow: Optional[np.ndarray]) -> np.ndarray:
        """Discrete v·∇u by first-order upwind differences.

        Args:
            u: Slice indexed (cell, ordinate).
            inflow: One value per inflow entry, used as ghost data across
                inflow faces. Outflow faces use interior one-sided differences.

        Returns:
            Array (cell, ordinate) of v·∇u.

        Raises:
            IncompleteDataError: If an inflow entry is missing.

        """
        u = self._validate_slice(u, "u")
        return self._streaming(u, self._check_inflow_slice(inflow))

    def _streaming(self, u: np.ndarray, inflow: np.ndarray) -> np.ndarray:
        nx, ny = self._grid_shape
        hx, hy = self.mesh.cell_size
        grid = u.reshape(nx, ny, -1)
        left, right, bottom, top = self._ghosts(inflow)

        padded = np.concatenate([left[None], grid, right[None]], axis=0)
        backward = (padded[1:-1] - padded[:-2]) / hx
        forward = (padded[2:] - padded[1:-1]) / hx
        dx = np.where(self._upwind_x > 0, backward, np.where(self._upwind_x < 0, forward, 0.0))

        padded = np.concatenate([bottom[:, None], grid, top[:, None]], axis=1)
        backward = (padded[:, 1:-1] - padded[:, :-2]) / hy
        forward = (padded[:, 2:] - padded[:, 1:-1]) / hy
        dy = np.where(self._upwind_y > 0, backward, np.where(self._upwind_y < 0, forward, 0.0))

        return (self._vx * dx + self._vy * dy).reshape(u.shape)

    def scattering_integral(self, u: np.ndarray, kernel: PhaseKernel) -> np.ndarray:
        """S(i, j) = Σ_j' p(i, j, j') u(i, j') w_j'."""
        u = self._validate_slice(u, "u")
        return self._scatter(u, kernel.values * kernel.weights)

    @staticmethod
    def _scatter(u: np.ndarray, weighted_kernel: np.ndarray) -> np.ndarray:
        if weighted_kernel.shape[0] == 1:
            return u @ weighted_kernel[0].T
        return np.einsum("cjk,ck->cj", weighted_kernel, u)

    # ------------------------------------------------------------------
    # Time stepping
    # ------------------------------------------------------------------

    def time_grid(self, horizon: float, dt: float) -> Tuple[int, float]:
        """Split [0, horizon] into n steps of equal length dt_eff ≤ dt."""
        if not horizon > 0:
            raise ConfigurationError(f"Horizon must be positive, got {horizon}")
        if not dt > 0:
            raise ConfigurationError(f"Time step must be positive, got {dt}")
        n_steps = max(1, int(math.ceil(horizon / dt - 1e-9)))
        if horizon / n_steps > dt * (1 + 1e-12):
            n_steps += 1
        return n_steps, horizon / n_steps

    def _resolve_inflow(self, inflow: Optional[np.ndarray], n_steps: int) -> np.ndarray:
        n_minus = len(self.partition.gamma_minus)
        if inflow is None:
            return np.zeros((n_minus, n_steps + 1))
        inflow = np.asarray(inflow, dtype=float)
        if inflow.shape == (n_minus,):
            inflow = np.repeat(inflow[:, None], n_steps + 1, axis=1)
        if inflow.shape != (n_minus, n_steps + 1):
            raise IncompleteDataError(
                f"Inflow must have shape ({n_minus},) or ({n_minus}, {n_steps + 1}), "
                f"got {inflow.shape}"
            )
        if not np.all(np.isfinite(inflow)):
            raise IncompleteDataError("Inflow values contain missing (non-finite) entries")
        return inflow

    def _resolve_source(self, data: ProblemData, n_steps: int):
        if not data.has_source:
            return None, None
        f = self._validate_slice(data.source.values, "source f")
        r = data.source_factor
        self._validate_slice(r.values, "source factor R")
        if not r.time_constant and r.values.shape[-1] != n_steps + 1:
            raise ValidationError(
                f"Source factor has {r.values.shape[-1]} time levels, solver needs {n_steps + 1}"
            )
        return f, r

    def solve_forward(
        self, data: ProblemData, dt: float, options: Optional[ForwardOptions] = None
    ) -> AngularDensityField:
        """Solve the initial/boundary value problem on [0, T].

        Args:
            data: Initial data, inflow, coefficients, kernel, horizon, source.
            dt: Requested time step; the horizon is split into equal steps
                no longer than dt.
            options: Courant bound and collision update.

        Returns:
            AngularDensityField with every time level and both boundary traces.

        Raises:
            StabilityError: If dt exceeds the upwind Courant bound.
            DivergenceError: If a non-finite value appears.

        """
        options = options or ForwardOptions()
        if options.collision not in COLLISION_UPDATES:
            raise ConfigurationError(
                f"Unknown collision update '{options.collision}', expected {COLLISION_UPDATES}"
            )
        if not 0 < options.cfl_factor <= 1:
            raise ConfigurationError(f"cfl_factor must lie in (0, 1], got {options.cfl_factor}")
        n_steps, dt_eff = self.time_grid(data.horizon, dt)
        courant = self.courant_number(dt_eff)
        if courant > options.cfl_factor * (1 + 1e-12):
            raise StabilityError(
                f"Upwind Courant number {courant:.4g} exceeds cfl_factor {options.cfl_factor}; "
                f"use dt ≤ {self.stable_time_step(options.cfl_factor):.6g}"
            )
        a = self._validate_slice(data.initial, "initial data")
        sigma_t = self._validate_slice(data.sigma_t.values, "sigma_t")
        sigma_s = self._validate_slice(data.sigma_s.values, "sigma_s")
        inflow = self._resolve_inflow(data.inflow, n_steps)
        f, r = self._resolve_source(data, n_steps)
        weighted_kernel = data.kernel.values * data.kernel.weights

        values = np.empty(a.shape + (n_steps + 1,))
        values[..., 0] = a
        decay = np.exp(-sigma_t * dt_eff)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi1 = np.where(sigma_t > 0, -np.expm1(-sigma_t * dt_eff) / sigma_t, dt_eff)
        exponential = options.collision == "exponential"

        logger.info(
            "Solving %d steps of dt=%.6g on %s cells x %d ordinates (%s collision update)",
            n_steps,
            dt_eff,
            self.mesh.shape,
            self.vset.n_ordinates,
            options.collision,
        )
        u = a
        for k in range(n_steps):
            stream = self._streaming(u, inflow[:, k])
            gain = sigma_s * self._scatter(u, weighted_kernel)
            if f is not None:
                gain = gain + f * r.at_step(k)
            if exponential:
                new = decay * (u - dt_eff * stream) + phi1 * gain
            else:
                new = u - dt_eff * (stream + sigma_t * u - gain)
            if not np.all(np.isfinite(new)):
                raise DivergenceError(f"Non-finite solution at step {k + 1}", step=k + 1)
            values[..., k + 1] = new
            u = new

        field = AngularDensityField(
            values=values,
            dt=dt_eff,
            trace_out=values[self._out_cells, self._out_ords, :],
            trace_in=inflow,
        )
        self._check_positivity(field, data, options)
        return field

    def _check_positivity(
        self, field: AngularDensityField, data: ProblemData, options: ForwardOptions
    ) -> None:
        nonnegative_data = np.all(data.initial >= 0) and np.all(field.trace_in >= 0)
        if data.has_source:
            nonnegative_data = nonnegative_data and np.all(data.source.values >= 0)
            nonnegative_data = nonnegative_data and np.all(data.source_factor.values >= 0)
        minimum = float(np.min(field.values))
        if nonnegative_data and minimum < -options.positivity_tol:
            logger.warning(
                "Nonnegative data produced a minimum of %.3g; the update is not monotone", minimum
            )

    def solve_linearized(
        self,
        f: CoefficientField,
        source_factor: SourceFactor,
        sigma_t: CoefficientField,
        sigma_s: CoefficientField,
        kernel: PhaseKernel,
        horizon: float,
        dt: float,
        inflow: Optional[np.ndarray] = None,
        options: Optional[ForwardOptions] = None,
    ) -> AngularDensityField:
        """Solve the source problem with zero initial data and right-hand side f·R."""
        data = ProblemData(
            initial=np.zeros(self.phase_space.shape),
            sigma_t=sigma_t,
            sigma_s=sigma_s,
            kernel=kernel,
            horizon=horizon,
            inflow=inflow,
            source=f,
            source_factor=source_factor,
        )
        return self.solve_forward(data, dt, options)

    def operator_residual(
        self,
        field: AngularDensityField,
        sigma_t: CoefficientField,
        sigma_s: Optional[CoefficientField] = None,
        kernel: Optional[PhaseKernel] = None,
    ) -> np.ndarray:
        """Forward-difference residual of the transport operator on a field.

        r^k = (u^{k+1} - u^k)/dt + v·∇u^k + σ_t u^k [- σ_s S(u^k)] for
        k = 0..n_steps-1, with the field's own inflow trace as ghost data and
        the same stencils as the solver. Scattering is subtracted only when
        both sigma_s and kernel are given.
        """
        u = self._validate_slice(field.values, "field")
        sigma_t_values = sigma_t.values
        weighted_kernel = None
        if sigma_s is not None and kernel is not None:
            weighted_kernel = kernel.values * kernel.weights
        residual = np.empty(u.shape[:2] + (field.n_steps,))
        for k in range(field.n_steps):
            uk = u[..., k]
            res = (u[..., k + 1] - uk) / field.dt
            res += self._streaming(uk, field.trace_in[:, k]) + sigma_t_values * uk
            if weighted_kernel is not None:
                res -= sigma_s.values * self._scatter(uk, weighted_kernel)
            residual[..., k] = res
        return residual

    # ------------------------------------------------------------------
    # Boundary measurements
    # ------------------------------------------------------------------

    def _trace_for(self, field: AngularDensityField, side: str):
        if side == "plus":
            return self.partition.gamma_plus, field.trace_out
        if side == "minus":
            return self.partition.gamma_minus, field.trace_in
        if side == "full":
            plus, minus = self.partition.gamma_plus, self.partition.gamma_minus
            entries = BoundarySet(
                faces=np.concatenate([plus.faces, minus.faces]),
                ordinates=np.concatenate([plus.ordinates, minus.ordinates]),
                nu_dot_v=np.concatenate([plus.nu_dot_v, minus.nu_dot_v]),
            )
            return entries, np.concatenate([field.trace_out, field.trace_in], axis=0)
        raise ValidationError(f"Unknown boundary side '{side}', expected plus, minus or full")

    def time_derivative_trace(
        self, field: AngularDensityField, side: str = "plus"
    ) -> MeasurementTrace:
        """∂_t of the recorded boundary trace on one side of the boundary.

        Args:
            field: Solver output with recorded traces.
            side: "plus" (outflow), "minus" (inflow) or "full" (both).

        Returns:
            MeasurementTrace with ν·v, face areas and ordinate weights per entry.

        Raises:
            InsufficientDataError: If the field has fewer than two time levels.

        """
        entries, traces = self._trace_for(field, side)
        return MeasurementTrace(
            faces=entries.faces,
            ordinates=entries.ordinates,
            nu_dot_v=entries.nu_dot_v,
            areas=self.mesh.face_areas[entries.faces],
            weights=self.vset.weights[entries.ordinates],
            values=gradient_in_time(traces, field.dt),
            dt=field.dt,
            side=side,
        )
