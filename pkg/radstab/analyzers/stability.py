"""Stability experiments for the coefficient and source problems.

Every experiment produces a coefficient-side norm (‖σ¹ - σ²‖ or ‖f‖ in
L²(Ω × V)), a boundary measurement norm of ∂_t u and their ratio ρ. A
both-sided estimate C⁻¹ ≤ ρ ≤ C over an ensemble shows up as a bounded
spread ρ_max/ρ_min.

Nonlinear experiments reduce to the source problem with f = σ¹ - σ² and a
source factor R built from the second solution: R = -u² when σ_t is
perturbed, R = S(u²) when σ_s is perturbed with σ_t held fixed. Each report
records min |R(·, ·, 0)|, the quantity that must stay away from zero.

Example:
    >>> from radstab.analyzers.stability import Stability
    >>> stability = Stability(phase_space)
    >>> report = stability.run_linearized_experiment(
    ...     f, R, sigma_t, sigma_s, kernel, horizon=4.4, dt=0.02
    ... )
    >>> report.ratio > 0
    True

"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from ..exceptions import (
    ConfigurationError,
    HypothesisError,
    InsufficientDataError,
    SignError,
    ValidationError,
)
from ..models.coefficients import (
    AdmissibilityBounds,
    CoefficientField,
    PhaseKernel,
    SourceFactor,
)
from ..models.stability import (
    EnsembleSummary,
    HolderFit,
    MeasurementTrace,
    StabilityOptions,
    StabilityReport,
)
from ..models.transport import AngularDensityField, ProblemData
from .base import Base
from .coefficients import Coefficients
from .geometry import Geometry
from .presets import gaussian_preset
from .stats import Stats
from .transport import Transport

logger = logging.getLogger(__name__)

HOLDER_TOLERANCE = 0.05
MIN_HOLDER_REPORTS = 4
MIN_HOLDER_DECADES = 2.0
MIN_ENSEMBLE_REPORTS = 5
DEFAULT_SPREAD_THRESHOLD = 50.0


def measurement_norm(trace: MeasurementTrace, weighted: bool = True) -> float:
    """(∫_0^T Σ dS w_j [ν·v] |∂_t u|² dt)^{1/2} over the trace's entries.

    Args:
        trace: ∂_t u on boundary entries.
        weighted: Multiply by ν·v; defined on the outflow side only.

    Returns:
        Nonnegative norm.

    Raises:
        SignError: If a weighted norm is requested on "minus" or "full".

    """
    if weighted and trace.side != "plus":
        raise SignError(
            f"Weighted measurement norm needs ν·v > 0; side '{trace.side}' includes ν·v < 0"
        )
    if trace.values.shape[0] == 0:
        return 0.0
    weights = trace.areas * trace.weights
    if weighted:
        weights = weights * trace.nu_dot_v
    time_weights = Base._time_weights(trace.n_steps, trace.dt)
    return float(np.sqrt(max(weights @ trace.values**2 @ time_weights, 0.0)))


class Stability(Base):
    """σ_t, σ_s and source experiments, ensembles and their summaries."""

    def __init__(
        self,
        phase_space,
        transport: Optional[Transport] = None,
        coefficients: Optional[Coefficients] = None,
        stats: Optional[Stats] = None,
    ):
        """Initialize on a phase space, sharing collaborators when given."""
        super().__init__(phase_space)
        self.transport = transport or Transport(phase_space)
        self.coefficients = coefficients or Coefficients(phase_space)
        self.stats = stats or Stats()
        self.geometry = Geometry()

    # ------------------------------------------------------------------
    # Measurements
    # ------------------------------------------------------------------

    def measurement_norms(self, difference: AngularDensityField) -> dict:
        """Γ+-weighted, Γ+ and full-boundary norms of ∂_t of a trace difference."""
        plus = self.transport.time_derivative_trace(difference, "plus")
        full = self.transport.time_derivative_trace(difference, "full")
        return {
            "plus_weighted": measurement_norm(plus, weighted=True),
            "plus": measurement_norm(plus, weighted=False),
            "full": measurement_norm(full, weighted=False),
        }

    @staticmethod
    def _headline(norms: dict, options: StabilityOptions) -> float:
        if options.side == "plus":
            return norms["plus_weighted"] if options.weighted else norms["plus"]
        if options.side == "full":
            if options.weighted:
                raise SignError("Weighted measurement norm is defined on the outflow side only")
            return norms["full"]
        raise ConfigurationError(f"Measurement side must be 'plus' or 'full', got '{options.side}'")

    def _report(
        self,
        experiment_id: str,
        kind: str,
        diff_norm: float,
        norms: dict,
        options: StabilityOptions,
        **extra,
    ) -> StabilityReport:
        measured = self._headline(norms, options)
        degenerate = diff_norm == 0.0
        if degenerate:
            ratio = None
        elif measured == 0.0:
            ratio = float("inf")
        else:
            ratio = diff_norm / measured
        report = StabilityReport(
            experiment_id=experiment_id,
            kind=kind,
            coefficient_diff_norm=diff_norm,
            measurement_norm=measured,
            ratio=ratio,
            degenerate=degenerate,
            side=options.side,
            weighted=options.weighted,
            measurement_norms=norms,
            **extra,
        )
        if degenerate:
            logger.info("%s: degenerate pair (zero difference), no ratio", experiment_id)
        else:
            logger.debug(
                "%s: diff %.6g, measurement %.6g, ratio %.6g",
                experiment_id,
                diff_norm,
                measured,
                ratio,
            )
        return report

    def _admissibility(self, options: StabilityOptions, **fields) -> dict:
        if options.admissibility_bound is None:
            return {}
        bounds = AdmissibilityBounds(options.admissibility_bound)
        return {
            name: self.coefficients.check_admissibility(value, bounds).to_dict()
            for name, value in fields.items()
        }

    # ------------------------------------------------------------------
    # Coefficient experiments
    # ------------------------------------------------------------------

    def _check_coefficient_hypotheses(self, base: ProblemData) -> np.ndarray:
        initial = self._validate_slice(base.initial, "initial data")
        if np.any(initial <= 0):
            raise HypothesisError(
                f"Initial data must be positive everywhere, minimum is {initial.min():.3g}",
                condition="positive-initial-data",
            )
        self.geometry.require_observation_time(self.mesh, self.vset, base.horizon)
        return initial

    def _with_default_inflow(self, base: ProblemData) -> ProblemData:
        if base.inflow is not None:
            return base
        return ProblemData(
            initial=base.initial,
            sigma_t=base.sigma_t,
            sigma_s=base.sigma_s,
            kernel=base.kernel,
            horizon=base.horizon,
            inflow=self.transport.inflow_from_initial(base.initial),
            source=base.source,
            source_factor=base.source_factor,
        )

    def run_sigma_t_experiment(
        self,
        base: ProblemData,
        perturbation: CoefficientField,
        dt: float,
        options: Optional[StabilityOptions] = None,
        experiment_id: str = "sigma_t",
        amplitude: Optional[float] = None,
        seed: Optional[int] = None,
    ) -> StabilityReport:
        """Compare solutions for σ_t and σ_t + perturbation with all other data shared.

        Raises:
            HypothesisError: If the initial data is not positive everywhere.
            ObservationTimeError: If T does not exceed the minimal observation time.
            DomainError: If σ_t + perturbation is negative somewhere.

        """
        options = options or StabilityOptions()
        initial = self._check_coefficient_hypotheses(base)
        base = self._with_default_inflow(base)
        sigma_t2 = base.sigma_t.plus(perturbation, "sigma_t")

        first = self.transport.solve_forward(base, dt, options.forward)
        second = self.transport.solve_forward(base.with_sigma_t(sigma_t2), dt, options.forward)
        norms = self.measurement_norms(first.minus(second))
        return self._report(
            experiment_id,
            "sigma_t",
            self.l2_norm(perturbation.values),
            norms,
            options,
            amplitude=amplitude,
            seed=seed,
            source_factor_floor=float(np.min(initial**2)),
            admissibility=self._admissibility(
                options,
                sigma_t_first=base.sigma_t,
                sigma_t_second=sigma_t2,
                u_first=first,
                u_second=second,
            ),
        )

    def run_sigma_s_experiment(
        self,
        base: ProblemData,
        perturbation: CoefficientField,
        dt: float,
        options: Optional[StabilityOptions] = None,
        experiment_id: str = "sigma_s",
        amplitude: Optional[float] = None,
        seed: Optional[int] = None,
    ) -> StabilityReport:
        """Compare solutions for σ_s and σ_s + perturbation.

        With ``hold_sigma_t`` the total attenuation stays common to both runs,
        so the absorption σ_t - σ_s changes instead; a negative implied σ_a is
        logged as a warning.
        """
        options = options or StabilityOptions()
        initial = self._check_coefficient_hypotheses(base)
        base = self._with_default_inflow(base)
        sigma_s2 = base.sigma_s.plus(perturbation, "sigma_s")
        if options.hold_sigma_t:
            second_data = base.with_sigma_s(sigma_s2)
            implied = base.sigma_t.values - sigma_s2.values
            if np.any(implied < 0):
                logger.warning(
                    "%s: implied absorption σ_t - σ_s reaches %.3g", experiment_id, implied.min()
                )
        else:
            sigma_t2 = base.sigma_t.plus(perturbation, "sigma_t")
            second_data = base.with_sigma_s(sigma_s2).with_sigma_t(sigma_t2)

        first = self.transport.solve_forward(base, dt, options.forward)
        second = self.transport.solve_forward(second_data, dt, options.forward)
        norms = self.measurement_norms(first.minus(second))

        gain = self.transport.scattering_integral(initial, base.kernel)
        factor = gain if options.hold_sigma_t else gain - initial
        return self._report(
            experiment_id,
            "sigma_s",
            self.l2_norm(perturbation.values),
            norms,
            options,
            amplitude=amplitude,
            seed=seed,
            source_factor_floor=float(np.min(np.abs(factor))),
            admissibility=self._admissibility(
                options,
                sigma_s_first=base.sigma_s,
                sigma_s_second=sigma_s2,
                u_first=first,
                u_second=second,
            ),
        )

    # ------------------------------------------------------------------
    # Source experiments
    # ------------------------------------------------------------------

    def run_linearized_experiment(
        self,
        f: CoefficientField,
        source_factor: SourceFactor,
        sigma_t: CoefficientField,
        sigma_s: CoefficientField,
        kernel: PhaseKernel,
        horizon: float,
        dt: float,
        inflow: Optional[np.ndarray] = None,
        options: Optional[StabilityOptions] = None,
        experiment_id: str = "linearized",
        amplitude: Optional[float] = None,
        seed: Optional[int] = None,
    ) -> StabilityReport:
        """Solve the source problem for f and compare ‖f‖ with its boundary measurement.

        Raises:
            HypothesisError: If R(·, ·, 0) is not positive everywhere.
            ConfigurationError: If nonzero inflow is combined with the
                Γ+-weighted measurement.
            ObservationTimeError: If T does not exceed the minimal
                observation time for the configured beta.

        """
        options = options or StabilityOptions()
        initial_factor = self._validate_slice(source_factor.initial, "source factor R")
        if np.any(initial_factor <= 0):
            raise HypothesisError(
                f"R(·, ·, 0) must be positive everywhere, minimum is {initial_factor.min():.3g}",
                condition="positive-source-factor",
            )
        if options.side == "plus" and options.weighted and inflow is not None and np.any(inflow):
            raise ConfigurationError(
                "The Γ+-weighted source experiment needs zero inflow on Γ-"
            )
        self.geometry.require_observation_time(self.mesh, self.vset, horizon, options.beta)

        field = self.transport.solve_linearized(
            f, source_factor, sigma_t, sigma_s, kernel, horizon, dt, inflow, options.forward
        )
        norms = self.measurement_norms(field)
        return self._report(
            experiment_id,
            "linearized",
            self.l2_norm(f.values),
            norms,
            options,
            amplitude=amplitude,
            seed=seed,
            source_factor_floor=float(np.min(np.abs(initial_factor))),
            admissibility=self._admissibility(options, source=f, u=field),
        )

    # ------------------------------------------------------------------
    # Ensembles
    # ------------------------------------------------------------------

    def random_bump(
        self, rng: np.random.Generator, amplitude: float, signed: bool = False
    ) -> CoefficientField:
        """A Gaussian bump with random center, width and (optionally) sign."""
        mesh = self.mesh
        center = mesh.origin + rng.uniform(0.25, 0.75, size=2) * mesh.extents
        width = float(rng.uniform(0.08, 0.2) * np.min(mesh.extents))
        sign = rng.choice([-1.0, 1.0]) if signed else 1.0
        values = gaussian_preset(
            self.phase_space,
            {"amplitude": sign * amplitude, "center": center, "width": width},
        )
        return CoefficientField(values, "other")

    @staticmethod
    def run_jobs(jobs: Sequence[Callable[[], Any]], threads: int = 1) -> List[Any]:
        """Run independent experiments, returning results in submission order."""
        if threads <= 1 or len(jobs) <= 1:
            return [job() for job in jobs]
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(job) for job in jobs]
            return [future.result() for future in futures]

    def coefficient_ensemble(
        self,
        kind: str,
        base: ProblemData,
        count: int,
        amplitude: float,
        seed: int,
        dt: float,
        options: Optional[StabilityOptions] = None,
        threads: int = 1,
    ) -> List[StabilityReport]:
        """Run ``count`` σ_t or σ_s experiments with random nonnegative bumps."""
        runners = {"sigma_t": self.run_sigma_t_experiment, "sigma_s": self.run_sigma_s_experiment}
        if kind not in runners:
            raise ConfigurationError(f"Unknown coefficient ensemble '{kind}'")
        rng = np.random.default_rng(seed)
        perturbations = [self.random_bump(rng, amplitude) for _ in range(count)]
        runner = runners[kind]
        jobs = [
            lambda p=p, i=i: runner(
                base, p, dt, options, f"{kind}-{i:03d}", amplitude=amplitude, seed=seed
            )
            for i, p in enumerate(perturbations)
        ]
        logger.info("Running %d %s experiments on %d thread(s)", count, kind, max(threads, 1))
        return self.run_jobs(jobs, threads)

    def linearized_ensemble(
        self,
        count: int,
        amplitude: float,
        seed: int,
        source_factor: SourceFactor,
        sigma_t: CoefficientField,
        sigma_s: CoefficientField,
        kernel: PhaseKernel,
        horizon: float,
        dt: float,
        options: Optional[StabilityOptions] = None,
        threads: int = 1,
    ) -> List[StabilityReport]:
        """Run ``count`` source experiments with random signed bumps f."""
        rng = np.random.default_rng(seed)
        sources = [self.random_bump(rng, amplitude, signed=True) for _ in range(count)]
        jobs = [
            lambda f=f, i=i: self.run_linearized_experiment(
                f,
                source_factor,
                sigma_t,
                sigma_s,
                kernel,
                horizon,
                dt,
                options=options,
                experiment_id=f"linearized-{i:03d}",
                amplitude=amplitude,
                seed=seed,
            )
            for i, f in enumerate(sources)
        ]
        logger.info("Running %d source experiments on %d thread(s)", count, max(threads, 1))
        return self.run_jobs(jobs, threads)

    # ------------------------------------------------------------------
    # Summaries
    # ------------------------------------------------------------------

    def fit_holder_exponent(self, reports: Sequence[StabilityReport]) -> HolderFit:
        """Least-squares θ in log‖f‖² ≈ θ·log(measurement²) + c.

        Args:
            reports: Experiments at ≥ 4 distinct amplitudes whose measurement
                norms span ≥ 2 decades.

        Returns:
            HolderFit with θ, intercept, RMS residual and slope standard error.

        Raises:
            ValidationError: If a report is degenerate or has a zero measurement.
            InsufficientDataError: If there are too few amplitudes or decades.

        """
        for report in reports:
            if report.degenerate or report.ratio is None or report.measurement_norm <= 0:
                raise ValidationError(
                    f"Report {report.experiment_id} is degenerate and cannot enter a Hölder fit"
                )
        amplitudes = {
            r.amplitude if r.amplitude is not None else r.coefficient_diff_norm for r in reports
        }
        if len(reports) < MIN_HOLDER_REPORTS or len(amplitudes) < MIN_HOLDER_REPORTS:
            raise InsufficientDataError(
                f"Hölder fit needs {MIN_HOLDER_REPORTS} distinct amplitudes, got {len(amplitudes)}"
            )
        measurements = [r.measurement_norm for r in reports]
        decades = self.stats.decades(measurements)
        if decades < MIN_HOLDER_DECADES:
            raise InsufficientDataError(
                f"Measurement norms span {decades:.2f} decades, need {MIN_HOLDER_DECADES}"
            )
        fit = self.stats.log_log_fit(
            np.square(measurements), np.square([r.coefficient_diff_norm for r in reports])
        )
        theta = fit["slope"]
        in_range = 0.0 < theta <= 1.0 + HOLDER_TOLERANCE
        if not in_range:
            logger.warning("Fitted Hölder exponent %.4g lies outside (0, 1]", theta)
        logger.info("Hölder exponent %.4g (residual %.3g)", theta, fit["residual"])
        return HolderFit(
            theta=theta,
            intercept=fit["intercept"],
            residual=fit["residual"],
            stderr=fit["stderr"],
            n_points=len(reports),
            in_range=in_range,
        )

    def verify_both_sided(
        self, reports: Sequence[StabilityReport], threshold: float = DEFAULT_SPREAD_THRESHOLD
    ) -> EnsembleSummary:
        """Summarize an ensemble of one experiment kind against a spread threshold.

        A nondegenerate report whose ratio is infinite or zero (a nonzero
        difference against a vanishing or unbounded measurement) breaks the
        estimate: it is counted in ``n_unbounded``, makes the spread infinite
        and fails the verdict.

        Raises:
            ValidationError: If the ensemble mixes experiment kinds.
            InsufficientDataError: If fewer than five nondegenerate reports remain.

        """
        kinds = sorted({r.kind for r in reports})
        if len(kinds) > 1:
            raise ValidationError(f"Ensemble mixes incomparable experiment kinds {kinds}")
        usable = [r for r in reports if not r.degenerate and r.ratio is not None]
        if len(usable) < MIN_ENSEMBLE_REPORTS:
            raise InsufficientDataError(
                f"Both-sided check needs {MIN_ENSEMBLE_REPORTS} nondegenerate reports, "
                f"got {len(usable)}"
            )
        bounded = [r.ratio for r in usable if np.isfinite(r.ratio) and r.ratio > 0]
        unbounded = [r for r in usable if not (np.isfinite(r.ratio) and r.ratio > 0)]
        if bounded:
            summary = self.stats.ratio_spread(bounded)
        else:
            summary = {"rho_min": np.nan, "rho_max": np.nan, "geometric_mean": np.nan}
        if unbounded:
            ratios = [r.ratio for r in unbounded]
            if any(ratio <= 0 for ratio in ratios):
                summary["rho_min"] = 0.0
            if any(not np.isfinite(ratio) for ratio in ratios):
                summary["rho_max"] = float("inf")
            summary["spread"] = summary["log_spread"] = float("inf")
            logger.warning(
                "%d report(s) with unbounded ratio: %s",
                len(unbounded),
                ", ".join(r.experiment_id for r in unbounded),
            )
        passed = not unbounded and summary["spread"] <= threshold
        logger.info(
            "%s ensemble of %d: spread %.4g (threshold %.4g) %s",
            kinds[0],
            len(usable),
            summary["spread"],
            threshold,
            "passed" if passed else "failed",
        )
        return EnsembleSummary(
            kind=kinds[0],
            count=len(usable),
            threshold=float(threshold),
            passed=passed,
            n_unbounded=len(unbounded),
            reports=list(reports),
            **summary,
        )
