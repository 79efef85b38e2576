"""Exponential weights, the time cutoff and weighted-estimate evaluation.

The weight is e^{2sφ} with φ(x, v, t) = -βt + v·x, and

    B(v) = ∂_tφ + v·∇φ = |v|² - β > 0  whenever 0 < β < min |v|².

For a field u with u(·, ·, T) = 0 the streaming estimate compares

    s∫∫|u(0)|² e^{2sφ(0)} + s²∫∫∫|u|² e^{2sφ}
        against  ∫∫∫|Pu|² e^{2sφ} + s∫∫_{Γ+}(ν·v)|u|² e^{2sφ},

with Pu = ∂_t u + v·∇u + σ_t u; the scattering estimate replaces Pu by
Pu - σ_s S(u) and the boundary term by ∫∫_{Γ+}|u|² e^{2sφ}. Every term is
evaluated in log space after subtracting the common exponent max(2sφ), which
leaves the ratio C(s) unchanged.

Example:
    >>> from radstab.analyzers.carleman import weight_phi, weight_b
    >>> weight_phi((0.3, 0.0), (1.0, 0.0), 1.0, 0.5)
    -0.2
    >>> weight_b((2.0, 0.0), 0.5)
    3.5

"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import (
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    PreconditionError,
    ValidationError,
)
from ..models.carleman import CarlemanConfig, EstimatePoint, EstimateReport
from ..models.coefficients import CoefficientField, PhaseKernel
from ..models.transport import AngularDensityField
from .base import Base
from .geometry import Geometry, check_beta
from .transport import Transport, gradient_in_time

logger = logging.getLogger(__name__)

DEFAULT_S_POINTS = 8
S0_SEPARATION = 5.0  # s0 · (r_min - r0)
TERMINAL_TOL = 1e-10


def weight_phi(x, v, t, beta: float):
    """φ = -βt + v·x for points x and velocities v (last axis is the coordinate)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    value = np.sum(v * x, axis=-1) - beta * np.asarray(t, dtype=float)
    return float(value) if np.ndim(value) == 0 else value


def weight_b(v, beta: float):
    """B = |v|² - β, raising DomainError unless 0 < β < |v|²."""
    v = np.asarray(v, dtype=float)
    speed_sq = np.sum(v**2, axis=-1)
    check_beta(beta, float(np.min(speed_sq)))
    value = speed_sq - beta
    return float(value) if np.ndim(value) == 0 else value


def cutoff_chi(t, cfg: CarlemanConfig):
    """χ(t): 1 on [0, T - 2δ], 0 on [T - δ, T], quintic smoothstep in between.

    Raises:
        DomainError: If any t lies outside [0, T].

    """
    t = np.asarray(t, dtype=float)
    horizon, delta = cfg.horizon, cfg.delta
    slack = 1e-12 * horizon
    if np.any(t < -slack) or np.any(t > horizon + slack):
        raise DomainError(f"Cutoff is defined on [0, {horizon:.6g}] only")
    tau = np.clip((t - (horizon - 2.0 * delta)) / delta, 0.0, 1.0)
    chi = 1.0 - tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)
    chi = np.where(tau <= 0.0, 1.0, np.where(tau >= 1.0, 0.0, chi))
    return float(chi) if chi.ndim == 0 else chi


class Carleman(Base):
    """Weight constants, the auxiliary field z and both weighted estimates."""

    def __init__(self, phase_space, transport: Optional[Transport] = None):
        """Initialize on a phase space, sharing a solver when one is given."""
        super().__init__(phase_space)
        self.transport = transport or Transport(phase_space)
        self.geometry = Geometry()

    def make_config(
        self,
        horizon: float,
        beta: float,
        s_range: Optional[Tuple[float, float]] = None,
        n_s: int = DEFAULT_S_POINTS,
    ) -> CarlemanConfig:
        """Derive the level constants r0 < r1 and the cutoff width delta.

        r_min and r_max come from the domain corners. With
        gap = r_min - (r_max - βT), r0 and r1 sit at the tertiles of
        (r_max - βT, r_min) and
        delta = 0.9 · min((r_min - r1)/β, (r0 - r_max + βT)/(2β), T/3).

        Args:
            horizon: Final time T.
            beta: Weight slope, 0 < beta < min |v|².
            s_range: (s_low, s_high) of the parameter grid; defaults to
                (s0, 4·s0) with s0 · (r_min - r0) = 5.
            n_s: Number of logarithmically spaced s values.

        Raises:
            DomainError: If beta is out of range.
            ObservationTimeError: If T does not exceed (r_max - r_min)/beta.

        """
        mesh, vset = self.mesh, self.vset
        self.geometry.require_observation_time(mesh, vset, horizon, beta)
        r_min, r_max = self.geometry.projection_range(mesh, vset)
        floor = r_max - beta * horizon
        gap = r_min - floor
        r0 = floor + gap / 3.0
        r1 = floor + 2.0 * gap / 3.0
        delta = 0.9 * min((r_min - r1) / beta, (r0 - floor) / (2.0 * beta), horizon / 3.0)
        s0 = S0_SEPARATION / (r_min - r0)
        if n_s < 2:
            raise ConfigurationError(f"The s grid needs at least two points, got {n_s}")
        low, high = s_range if s_range is not None else (s0, 4.0 * s0)
        if not 0 < low < high:
            raise ConfigurationError(f"s range must satisfy 0 < s_low < s_high, got {(low, high)}")
        cfg = CarlemanConfig(
            beta=float(beta),
            horizon=float(horizon),
            s_grid=tuple(float(s) for s in np.geomspace(low, high, n_s)),
            r_min=r_min,
            r_max=r_max,
            r0=r0,
            r1=r1,
            delta=delta,
            mu=r1 - r0,
            s0=float(low),
        )
        self._check_config(cfg)
        logger.info(
            "Weight levels r0=%.6g r1=%.6g delta=%.6g, s in [%.4g, %.4g]",
            r0,
            r1,
            delta,
            low,
            high,
        )
        return cfg

    @staticmethod
    def _check_config(cfg: CarlemanConfig) -> None:
        floor = cfg.r_max - cfg.beta * cfg.horizon
        failures = []
        if not floor < cfg.r0 < cfg.r1 < cfg.r_min:
            failures.append("r_max - beta*T < r0 < r1 < r_min")
        if not (0 < cfg.delta and 2 * cfg.delta < cfg.horizon):
            failures.append("0 < 2*delta < T")
        if not cfg.r_min - cfg.beta * cfg.delta > cfg.r1:
            failures.append("r_min - beta*delta > r1")
        if not cfg.r_max - cfg.beta * (cfg.horizon - 2 * cfg.delta) < cfg.r0:
            failures.append("r_max - beta*(T - 2*delta) < r0")
        if failures:
            raise ConfigurationError(f"Weight constants violate {', '.join(failures)}")

    def _sample_points(self) -> np.ndarray:
        """Cell centers, boundary face centers and corners of the closed domain."""
        mesh = self.mesh
        return np.vstack([mesh.cell_centers, mesh.face_centers, mesh.corners])

    def check_weight_levels(self, cfg: CarlemanConfig, times: Sequence[float]) -> Dict[str, float]:
        """Scan φ on the grid against the levels r1 (early times) and r0 (late times).

        Returns:
            Dict with the minimum of φ over t ≤ δ, the maximum over
            t ≥ T - 2δ and whether each lies strictly beyond its level.

        """
        times = np.asarray(times, dtype=float)
        projections = self._sample_points() @ self.vset.ordinates.T
        early = times[times <= cfg.delta]
        late = times[times >= cfg.horizon - 2.0 * cfg.delta]
        early = np.append(early, cfg.delta)
        late = np.append(late, cfg.horizon)
        early_min = float(np.min(projections) - cfg.beta * np.max(early))
        late_max = float(np.max(projections) - cfg.beta * np.min(late))
        return {
            "early_min": early_min,
            "late_max": late_max,
            "early_above_r1": early_min > cfg.r1,
            "late_below_r0": late_max < cfg.r0,
        }

    def auxiliary_z(self, field: AngularDensityField, cfg: CarlemanConfig) -> AngularDensityField:
        """z = χ(t) ∂_t u, applied to the field and its boundary traces.

        Raises:
            InsufficientDataError: If the field has fewer than three steps.
            ValidationError: If the field's horizon differs from cfg.horizon.

        """
        if field.n_steps < 3:
            raise InsufficientDataError(
                f"Auxiliary field needs at least three time steps, got {field.n_steps}"
            )
        if not np.isclose(field.horizon, cfg.horizon, rtol=1e-9, atol=0.0):
            raise ValidationError(
                f"Field horizon {field.horizon:.6g} differs from "
                f"the weight horizon {cfg.horizon:.6g}"
            )
        chi = cutoff_chi(np.minimum(field.times, cfg.horizon), cfg)
        return AngularDensityField(
            values=gradient_in_time(field.values, field.dt) * chi,
            dt=field.dt,
            trace_out=gradient_in_time(field.trace_out, field.dt) * chi,
            trace_in=gradient_in_time(field.trace_in, field.dt) * chi,
        )

    def evaluate_streaming_estimate(
        self, field: AngularDensityField, cfg: CarlemanConfig, sigma_t: CoefficientField
    ) -> EstimateReport:
        """Evaluate both sides of the streaming estimate on every s of the grid."""
        return self._evaluate("streaming", field, cfg, sigma_t)

    def evaluate_scattering_estimate(
        self,
        field: AngularDensityField,
        cfg: CarlemanConfig,
        sigma_t: CoefficientField,
        sigma_s: CoefficientField,
        kernel: PhaseKernel,
    ) -> EstimateReport:
        """Evaluate both sides of the scattering estimate on every s of the grid."""
        return self._evaluate("scattering", field, cfg, sigma_t, sigma_s, kernel)

    def evaluate_both(
        self,
        field: AngularDensityField,
        cfg: CarlemanConfig,
        sigma_t: CoefficientField,
        sigma_s: CoefficientField,
        kernel: PhaseKernel,
    ) -> Dict[str, EstimateReport]:
        """Streaming and scattering estimates of the same field."""
        return {
            "streaming": self.evaluate_streaming_estimate(field, cfg, sigma_t),
            "scattering": self.evaluate_scattering_estimate(field, cfg, sigma_t, sigma_s, kernel),
        }

    def _evaluate(
        self,
        estimate_id: str,
        field: AngularDensityField,
        cfg: CarlemanConfig,
        sigma_t: CoefficientField,
        sigma_s: Optional[CoefficientField] = None,
        kernel: Optional[PhaseKernel] = None,
    ) -> EstimateReport:
        u = self._validate_slice(field.values, "field")
        terminal = float(np.max(np.abs(u[..., -1])))
        if terminal > TERMINAL_TOL:
            raise PreconditionError(
                f"Weighted estimates need u(T) = 0, got sup |u(T)| = {terminal:.3g}"
            )
        report = EstimateReport(estimate_id=estimate_id)
        if not np.any(u) and not np.any(field.trace_out):
            report.applicable = False
            report.points = [
                EstimatePoint(s=s, lhs_terms={}, rhs_terms={}, c=None, log_shift=0.0)
                for s in cfg.s_grid
            ]
            return report

        residual = self.transport.operator_residual(field, sigma_t, sigma_s, kernel)
        times = field.times
        cell_phi = self.mesh.cell_centers @ self.vset.ordinates.T  # (C, J)
        outflow = self.partition.gamma_plus
        face_phi = np.einsum(
            "ed,ed->e",
            self.mesh.face_centers[outflow.faces],
            self.vset.ordinates[outflow.ordinates],
        )
        phase_w = self._phase_weights()
        boundary_w = self._entry_weights(outflow, flux=estimate_id == "streaming")
        tw = self._time_weights(field.n_steps, field.dt)

        u_sq = u**2
        r_sq = residual**2
        out_sq = field.trace_out**2
        for s in cfg.s_grid:
            shift = 2.0 * s * max(float(np.max(cell_phi)), float(np.max(face_phi, initial=-np.inf)))
            time_factor = np.exp(-2.0 * s * cfg.beta * times)  # (K+1,)
            cell_w = phase_w * np.exp(2.0 * s * cell_phi - shift)
            bulk = np.einsum("cj,cjk->k", cell_w, u_sq) * time_factor
            lhs = {
                "initial": float(s * bulk[0]),
                "bulk": float(s**2 * (bulk @ tw)),
            }
            source = np.einsum("cj,cjk->k", cell_w, r_sq) * time_factor[:-1]
            boundary = 0.0
            if len(outflow):
                entry_w = boundary_w * np.exp(2.0 * s * face_phi - shift)
                boundary = float((entry_w @ out_sq * time_factor) @ tw)
            if estimate_id == "streaming":
                boundary *= s
            rhs = {"source": float(np.sum(source) * field.dt), "boundary": boundary}
            numerator, denominator = sum(lhs.values()), sum(rhs.values())
            c = numerator / denominator if denominator > 0 else None
            report.points.append(
                EstimatePoint(s=float(s), lhs_terms=lhs, rhs_terms=rhs, c=c, log_shift=shift)
            )
        logger.info(
            "%s estimate: C(s) from %s to %s",
            estimate_id,
            _fmt(min(report.constants, key=_key)),
            _fmt(max(report.constants, key=_key)),
        )
        return report


def _key(value: Optional[float]) -> float:
    return np.inf if value is None else value


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4g}"
