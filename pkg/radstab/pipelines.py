"""Experiment pipelines: one class per command-line subcommand.

Each pipeline turns a validated ``RunConfig`` into a ``RunSetup`` (phase
space, coefficients, kernel, data, horizon and step), runs the analyzers the
subcommand needs and collects tables, reports and optional field dumps into a
``PipelineOutput``. Nothing here touches the filesystem; ``ResultWriter``
does that.

Example:
    >>> from radstab.pipelines import ForwardPipeline
    >>> from radstab.config import parse_config
    >>> config = parse_config({"mesh": {"cells": [16, 16]}}, subcommand="forward")
    >>> output = ForwardPipeline().execute(config)
    >>> sorted(output.tables)
    ['energy', 'partition', 'traces']

"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .analyzers.carleman import Carleman
from .analyzers.coefficients import Coefficients
from .analyzers.energy import Energy
from .analyzers.geometry import Geometry
from .analyzers.stability import Stability
from .analyzers.transport import Transport
from .config import RunConfig, problem_kind, uses_weight_slope
from .exceptions import ConfigurationError, ObservationTimeError
from .models.carleman import EstimateReport
from .models.coefficients import PhaseKernel, SourceFactor
from .models.geometry import MeshSpec, PhaseSpace
from .models.pipeline import PipelineOutput, RunSetup
from .models.stability import StabilityOptions, StabilityReport
from .models.transport import AngularDensityField, ForwardOptions, ProblemData

logger = logging.getLogger(__name__)


def partition_table(phase_space: PhaseSpace) -> pd.DataFrame:
    """Inflow and outflow entries as rows (face_id, ordinate_id, nu_dot_v, side)."""
    frames = []
    for side in ("plus", "minus"):
        entries = phase_space.partition.side(side)
        frames.append(
            pd.DataFrame(
                {
                    "face_id": entries.faces,
                    "ordinate_id": entries.ordinates,
                    "nu_dot_v": entries.nu_dot_v,
                    "side": side,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def trace_table(phase_space: PhaseSpace, field: AngularDensityField) -> pd.DataFrame:
    """Boundary traces in long form (face_id, ordinate_id, side, t, u, nu_dot_v)."""
    frames = []
    for side, traces in (("plus", field.trace_out), ("minus", field.trace_in)):
        entries = phase_space.partition.side(side)
        n_entries, n_levels = traces.shape
        frames.append(
            pd.DataFrame(
                {
                    "face_id": np.repeat(entries.faces, n_levels),
                    "ordinate_id": np.repeat(entries.ordinates, n_levels),
                    "side": side,
                    "t": np.tile(field.times, n_entries),
                    "u": traces.ravel(),
                    "nu_dot_v": np.repeat(entries.nu_dot_v, n_levels),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def ensemble_table(reports: List[StabilityReport]) -> pd.DataFrame:
    """One row per experiment with the headline and the three measurement norms."""
    rows = [
        {
            "experiment_id": r.experiment_id,
            "kind": r.kind,
            "amplitude": r.amplitude,
            "coeff_norm": r.coefficient_diff_norm,
            "meas_norm": r.measurement_norm,
            "ratio": r.ratio,
            "meas_plus_weighted": r.measurement_norms.get("plus_weighted"),
            "meas_plus": r.measurement_norms.get("plus"),
            "meas_full": r.measurement_norms.get("full"),
            "source_factor_floor": r.source_factor_floor,
        }
        for r in reports
    ]
    columns = [
        "experiment_id",
        "kind",
        "amplitude",
        "coeff_norm",
        "meas_norm",
        "ratio",
        "meas_plus_weighted",
        "meas_plus",
        "meas_full",
        "source_factor_floor",
    ]
    return pd.DataFrame(rows, columns=columns)


class Pipeline:
    """Shared setup for every subcommand.

    Subclasses set ``subcommand`` and implement ``run(setup, config)``.
    """

    subcommand = ""

    def __init__(self):
        """Initialize the pipeline with a geometry builder."""
        self.geometry = Geometry()

    def execute(self, config: RunConfig) -> PipelineOutput:
        """Build the discrete problem and run the subcommand on it."""
        setup = self.build_setup(config)
        logger.info(
            "%s: T=%.6g, dt=%.6g on %s cells x %d ordinates",
            self.subcommand,
            setup.horizon,
            setup.dt,
            setup.phase_space.mesh.shape,
            setup.phase_space.vset.n_ordinates,
        )
        output = self.run(setup, config)
        output.summary.setdefault("setup", setup.describe())
        output.summary.setdefault("weight_constants", self.weight_constants(setup, config))
        return output

    def weight_constants(self, setup: RunSetup, config: RunConfig) -> Dict[str, Any]:
        """Weight levels for the run's horizon, or why the horizon admits none.

        Runs without a weight slope use ``carleman.beta``; their horizon is
        measured with min |v|² and may be too short for that beta.
        """
        beta = setup.beta if setup.beta is not None else config.carleman.beta
        try:
            cfg = Carleman(setup.phase_space).make_config(setup.horizon, beta)
        except (ConfigurationError, ObservationTimeError) as exc:
            logger.debug("No weight constants for T=%.6g, beta=%.6g: %s", setup.horizon, beta, exc)
            return {"beta": float(beta), "horizon": float(setup.horizon), "unavailable": str(exc)}
        return cfg.to_dict()

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Run the subcommand on a prepared setup."""
        raise NotImplementedError

    def build_setup(self, config: RunConfig) -> RunSetup:
        """Assemble phase space, coefficients, data, horizon and step from a config.

        A missing horizon is ``horizon_margin`` times the minimal observation
        time (measured with beta when the subcommand uses the weight slope);
        a missing dt is the largest step allowed by ``cfl_factor``.
        """
        mesh_cfg, velocity = config.mesh, config.velocity
        phase_space = self.geometry.phase_space(
            MeshSpec(mesh_cfg.origin, mesh_cfg.extents, mesh_cfg.cells),
            velocity.v0,
            velocity.v1,
            velocity.n_angles,
            velocity.n_speeds,
        )
        coefficients = Coefficients(phase_space)
        spec = config.coefficients
        sigma_a = coefficients.field(spec.sigma_a.kind, spec.sigma_a.params, "sigma_a")
        sigma_s = coefficients.field(spec.sigma_s.kind, spec.sigma_s.params, "sigma_s")
        sigma_t = coefficients.total_attenuation(sigma_a, sigma_s)
        kernel = self.build_kernel(coefficients, spec.phase.kind, spec.phase.concentration)
        initial = coefficients.presets.generate(
            phase_space, config.initial.kind, config.initial.params
        )

        transport = Transport(phase_space)
        inflow = None
        if config.inflow.mode == "initial":
            inflow = transport.inflow_from_initial(initial)
        elif config.inflow.mode == "constant":
            inflow = np.full(len(phase_space.partition.gamma_minus), config.inflow.value)

        beta = config.carleman.beta if uses_weight_slope(config) else None
        min_time = self.geometry.min_observation_time(phase_space.mesh, phase_space.vset, beta)
        time = config.time
        horizon = time.horizon if time.horizon is not None else time.horizon_margin * min_time
        dt = time.dt if time.dt is not None else transport.stable_time_step(time.cfl_factor)

        forward = ForwardOptions(cfl_factor=time.cfl_factor, collision=time.collision)
        ensemble = config.ensemble
        options = StabilityOptions(
            side=ensemble.side,
            weighted=ensemble.weighted,
            beta=beta,
            hold_sigma_t=ensemble.hold_sigma_t,
            admissibility_bound=config.admissibility.M,
            forward=forward,
        )
        source = coefficients.field(config.source.f.kind, config.source.f.params, "f")
        factor = SourceFactor(
            coefficients.presets.generate(
                phase_space, config.source.factor.kind, config.source.factor.params
            )
        )
        return RunSetup(
            phase_space=phase_space,
            problem=ProblemData(
                initial=initial,
                sigma_t=sigma_t,
                sigma_s=sigma_s,
                kernel=kernel,
                horizon=float(horizon),
                inflow=inflow,
            ),
            sigma_a=sigma_a,
            source=source,
            source_factor=factor,
            dt=float(dt),
            min_time=float(min_time),
            beta=beta,
            options=options,
        )

    @staticmethod
    def build_kernel(
        coefficients: Coefficients, kind: str, concentration: float = 0.0
    ) -> PhaseKernel:
        """Isotropic kernel, or p ∝ exp(κ cos(θ - θ')) in the ordinate angles."""
        if kind == "isotropic":
            return coefficients.isotropic_phase()
        ordinates = coefficients.vset.ordinates
        angles = np.arctan2(ordinates[:, 1], ordinates[:, 0])
        raw = np.exp(concentration * np.cos(angles[:, None] - angles[None, :]))
        return coefficients.normalize_phase(raw)

    @staticmethod
    def energy_table(energy: Energy, field: AngularDensityField, data=None) -> pd.DataFrame:
        """E(t) at every step as a (t, energy) table."""
        trace = energy.energy(field, data)
        return pd.DataFrame({"t": trace.times, "energy": trace.energy})

    @staticmethod
    def field_dump(field: AngularDensityField):
        """Full field with its sidecar metadata."""
        return field.values, field.describe()

    def linearized_field(
        self, setup: RunSetup, transport: Transport, source=None
    ) -> AngularDensityField:
        """Solve the source problem for f (the configured source by default)."""
        problem = setup.problem
        return transport.solve_linearized(
            setup.source if source is None else source,
            setup.source_factor,
            problem.sigma_t,
            problem.sigma_s,
            problem.kernel,
            setup.horizon,
            setup.dt,
            options=setup.options.forward,
        )


class ForwardPipeline(Pipeline):
    """``forward``: solve the configured problem and emit energy and traces."""

    subcommand = "forward"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Solve once and tabulate E(t), the partition and both boundary traces."""
        transport = Transport(setup.phase_space)
        energy = Energy(setup.phase_space, transport)
        field = transport.solve_forward(setup.problem, setup.dt, setup.options.forward)
        output = PipelineOutput(
            subcommand=self.subcommand,
            tables={
                "energy": self.energy_table(energy, field, setup.problem),
                "partition": partition_table(setup.phase_space),
                "traces": trace_table(setup.phase_space, field),
            },
            summary={
                "steps": field.n_steps,
                "dt_effective": field.dt,
                "min_value": float(np.min(field.values)),
                "max_value": float(np.max(field.values)),
            },
        )
        if config.output.dump_fields:
            output.arrays["field"] = self.field_dump(field)
        return output


class LinearizedPipeline(Pipeline):
    """``linearized``: the source problem with zero initial and inflow data."""

    subcommand = "linearized"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Solve for the configured f and R, then report measurements and the outflow bound."""
        transport = Transport(setup.phase_space)
        energy = Energy(setup.phase_space, transport)
        stability = Stability(setup.phase_space, transport)
        field = self.linearized_field(setup, transport)

        f_norm = stability.l2_norm(setup.source.values)
        norms = stability.measurement_norms(field)
        floor = float(np.min(setup.source_factor.initial))
        bound = energy.verify_outflow_bound(field, f_norm)
        output = PipelineOutput(
            subcommand=self.subcommand,
            tables={
                "energy": self.energy_table(energy, field),
                "traces": trace_table(setup.phase_space, field),
            },
            reports={
                "measurement": {
                    "source_norm": f_norm,
                    "measurement_norms": norms,
                    "ratio": f_norm / norms["plus_weighted"] if norms["plus_weighted"] else None,
                    "source_factor_floor": floor,
                },
                "outflow_bound": bound.to_dict(),
            },
            summary={"steps": field.n_steps, "outflow_constant": bound.c_fit},
            hypothesis_violation=bound.violation,
        )
        if config.output.dump_fields:
            output.arrays["field"] = self.field_dump(field)
        return output


class EnergyCheckPipeline(Pipeline):
    """``energy-check``: Gronwall bound, energy identity and outflow bound."""

    subcommand = "energy-check"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Check the forward run against the energy bounds and the linearized run."""
        transport = Transport(setup.phase_space)
        energy = Energy(setup.phase_space, transport)
        field = transport.solve_forward(setup.problem, setup.dt, setup.options.forward)
        gronwall = energy.verify_gronwall_bound(field, setup.problem)
        identity = energy.identity_residual(field, setup.problem)

        linearized = self.linearized_field(setup, transport)
        outflow = energy.verify_outflow_bound(linearized, energy.l2_norm(setup.source.values))

        residuals = pd.DataFrame(
            {
                "step": np.arange(identity.residuals.size),
                "t": field.times[:-1],
                "residual": identity.residuals,
            }
        )
        violation = gronwall.violation or outflow.violation or not gronwall.sign_consistent
        return PipelineOutput(
            subcommand=self.subcommand,
            tables={
                "energy": self.energy_table(energy, field, setup.problem),
                "identity": residuals,
            },
            reports={
                "gronwall_bound": gronwall.to_dict(),
                "outflow_bound": outflow.to_dict(),
                "energy_identity": identity.to_dict(),
            },
            summary={
                "gronwall_constant": gronwall.c_fit,
                "outflow_constant": outflow.c_fit,
                "identity_residual": identity.accumulated,
            },
            hypothesis_violation=violation,
        )


class CarlemanCheckPipeline(Pipeline):
    """``carleman-check``: both weighted estimates on z = χ ∂_t u of seeded source runs."""

    subcommand = "carleman-check"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Evaluate C(s) on the s grid for ``carleman.runs`` random sources."""
        section = config.carleman
        transport = Transport(setup.phase_space)
        carleman = Carleman(setup.phase_space, transport)
        stability = Stability(setup.phase_space, transport)
        problem = setup.problem
        cfg = carleman.make_config(setup.horizon, setup.beta, section.s_range, section.n_s)

        rng = np.random.default_rng(config.ensemble.seed)
        sources = [
            stability.random_bump(rng, config.ensemble.amplitude, signed=True)
            for _ in range(section.runs)
        ]

        def evaluate(source) -> Dict[str, EstimateReport]:
            z = carleman.auxiliary_z(self.linearized_field(setup, transport, source), cfg)
            return carleman.evaluate_both(z, cfg, problem.sigma_t, problem.sigma_s, problem.kernel)

        results = Stability.run_jobs(
            [lambda s=s: evaluate(s) for s in sources], config.ensemble.threads
        )
        n_steps, dt_eff = transport.time_grid(setup.horizon, setup.dt)
        levels = carleman.check_weight_levels(cfg, np.arange(n_steps + 1) * dt_eff)

        rows = []
        spreads: Dict[str, List[Optional[float]]] = {"streaming": [], "scattering": []}
        for run, reports in enumerate(results):
            for estimate_id, report in reports.items():
                spreads[estimate_id].append(report.c_spread)
                for point in report.points:
                    rows.append(
                        {
                            "run": run,
                            "estimate": estimate_id,
                            "s": point.s,
                            "c": point.c,
                            "lhs_initial": point.lhs_terms.get("initial"),
                            "lhs_bulk": point.lhs_terms.get("bulk"),
                            "rhs_source": point.rhs_terms.get("source"),
                            "rhs_boundary": point.rhs_terms.get("boundary"),
                            "log_shift": point.log_shift,
                        }
                    )
        return PipelineOutput(
            subcommand=self.subcommand,
            tables={"carleman": pd.DataFrame(rows)},
            reports={
                "weight_config": cfg.to_dict(),
                "weight_levels": levels,
                **{
                    f"estimates-run{run:03d}": {k: r.to_dict() for k, r in reports.items()}
                    for run, reports in enumerate(results)
                },
            },
            summary={
                "weight_constants": cfg.to_dict(),
                "weight_levels": levels,
                "c_spread": spreads,
            },
            hypothesis_violation=not (levels["early_above_r1"] and levels["late_below_r0"]),
        )


class StabilityEnsemblePipeline(Pipeline):
    """``stability-ensemble``: random-perturbation ensemble and its both-sided check."""

    subcommand = "stability-ensemble"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Run the ensemble, tabulate every ratio and summarize the spread."""
        ensemble = config.ensemble
        stability = Stability(setup.phase_space)
        problem = setup.problem
        if ensemble.kind == "linearized":
            reports = stability.linearized_ensemble(
                ensemble.count,
                ensemble.amplitude,
                ensemble.seed,
                setup.source_factor,
                problem.sigma_t,
                problem.sigma_s,
                problem.kernel,
                setup.horizon,
                setup.dt,
                setup.options,
                ensemble.threads,
            )
        else:
            reports = stability.coefficient_ensemble(
                ensemble.kind,
                problem,
                ensemble.count,
                ensemble.amplitude,
                ensemble.seed,
                setup.dt,
                setup.options,
                ensemble.threads,
            )
        summary = stability.verify_both_sided(reports, ensemble.threshold)
        summary_dict = summary.to_dict()
        summary_dict.pop("reports")
        return PipelineOutput(
            subcommand=self.subcommand,
            tables={"ensemble": ensemble_table(reports)},
            reports={
                "ensemble_summary": summary_dict,
                **{f"experiment-{r.experiment_id}": r.to_dict() for r in reports},
            },
            summary=summary_dict,
        )


class HolderSweepPipeline(Pipeline):
    """``holder-sweep``: one seeded perturbation shape at increasing amplitudes."""

    subcommand = "holder-sweep"

    def run(self, setup: RunSetup, config: RunConfig) -> PipelineOutput:
        """Run the amplitude sweep and fit the Hölder exponent."""
        kind = problem_kind(config)
        stability = Stability(setup.phase_space)
        problem = setup.problem
        rng = np.random.default_rng(config.ensemble.seed)
        shape = stability.random_bump(rng, 1.0, signed=False)
        seed = config.ensemble.seed

        def job(index: int, amplitude: float):
            perturbation = shape.scaled(amplitude)
            experiment_id = f"{kind}-a{index:02d}"
            if kind == "linearized":
                return stability.run_linearized_experiment(
                    perturbation.relabel("f"),
                    setup.source_factor,
                    problem.sigma_t,
                    problem.sigma_s,
                    problem.kernel,
                    setup.horizon,
                    setup.dt,
                    options=setup.options,
                    experiment_id=experiment_id,
                    amplitude=amplitude,
                    seed=seed,
                )
            return stability.run_sigma_t_experiment(
                problem, perturbation, setup.dt, setup.options, experiment_id, amplitude, seed
            )

        amplitudes = sorted(config.holder.amplitudes)
        reports = Stability.run_jobs(
            [lambda i=i, a=a: job(i, a) for i, a in enumerate(amplitudes)],
            config.ensemble.threads,
        )
        fit = stability.fit_holder_exponent(reports)
        return PipelineOutput(
            subcommand=self.subcommand,
            tables={"holder": ensemble_table(reports)},
            reports={"holder_fit": fit.to_dict()},
            summary={"problem": kind, **fit.to_dict()},
        )


PIPELINES = {
    pipeline.subcommand: pipeline
    for pipeline in (
        ForwardPipeline,
        LinearizedPipeline,
        EnergyCheckPipeline,
        CarlemanCheckPipeline,
        StabilityEnsemblePipeline,
        HolderSweepPipeline,
    )
}
