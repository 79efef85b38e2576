"""Experiment engine for transport stability checks.

This module provides the main `Radstab` class, the primary interface for
running the six experiment pipelines (forward solve, linearized source
problem, energy bounds, weighted estimates, stability ensembles and Hölder
sweeps) and for writing their results with a manifest.

Key Features:
    - Upwind discrete-ordinates solver for the time-dependent transport equation
    - Numerical checks of the energy bounds and the two weighted estimates
    - Seeded random-perturbation ensembles for the both-sided stability ratio
    - Deterministic CSV/JSON output with a manifest listing every artifact

Example:
    Run a linearized ensemble and inspect the ratio spread:

    >>> from radstab import Radstab
    >>> from radstab.config import parse_config
    >>>
    >>> engine = Radstab()
    >>> config = parse_config(
    ...     {"mesh": {"cells": [16, 16]}, "ensemble": {"count": 8, "seed": 3}},
    ...     subcommand="stability-ensemble",
    ... )
    >>> output = engine.stability_ensemble(config)
    >>> print(f"Spread: {output.summary['spread']:.2f}")
    >>>
    >>> # Or write every artifact plus manifest.json:
    >>> engine.run(config, out="results/ensemble")

Notes:
    Configurations are validated by ``parse_config`` before any solve starts,
    so every method here assumes a valid ``RunConfig``.

See Also:
    - pipelines: One pipeline class per subcommand
    - io: Result writers and the manifest
    - config: The YAML schema

"""

import logging
import time
from pathlib import Path
from typing import Optional, Union

from .config import RunConfig
from .exceptions import RadstabError
from .io import ResultWriter
from .models.pipeline import PipelineOutput
from .pipelines import (
    PIPELINES,
    CarlemanCheckPipeline,
    EnergyCheckPipeline,
    ForwardPipeline,
    HolderSweepPipeline,
    LinearizedPipeline,
    StabilityEnsemblePipeline,
)

logger = logging.getLogger(__name__)

STOCHASTIC_SUBCOMMANDS = ("carleman-check", "stability-ensemble", "holder-sweep")


class Radstab:
    """Facade over the experiment pipelines.

    Each method runs one subcommand on a validated configuration and returns
    its in-memory ``PipelineOutput``; ``run`` dispatches on
    ``config.subcommand`` and also writes the artifacts.

    Example:
        >>> engine = Radstab()
        >>> output = engine.forward(parse_config("forward.yaml"))
        >>> output.tables["energy"].head()

    """

    def forward(self, config: RunConfig) -> PipelineOutput:
        """Solve the configured forward problem.

        Returns:
            PipelineOutput with the tables ``energy`` (t, energy), ``partition``
            (face_id, ordinate_id, nu_dot_v, side) and ``traces`` (face_id,
            ordinate_id, side, t, u, nu_dot_v), plus the full field when
            ``output.dump_fields`` is set.

        """
        return ForwardPipeline().execute(config)

    def linearized(self, config: RunConfig) -> PipelineOutput:
        """Solve the source problem for the configured f and R."""
        return LinearizedPipeline().execute(config)

    def energy_check(self, config: RunConfig) -> PipelineOutput:
        """Fit the Gronwall and outflow constants and the energy identity residual."""
        return EnergyCheckPipeline().execute(config)

    def carleman_check(self, config: RunConfig) -> PipelineOutput:
        """Evaluate both weighted estimates on seeded source runs."""
        return CarlemanCheckPipeline().execute(config)

    def stability_ensemble(self, config: RunConfig) -> PipelineOutput:
        """Run a perturbation ensemble and check the ratio spread.

        Raises:
            InsufficientDataError: If fewer than five nondegenerate experiments ran.

        """
        return StabilityEnsemblePipeline().execute(config)

    def holder_sweep(self, config: RunConfig) -> PipelineOutput:
        """Sweep perturbation amplitudes and fit the Hölder exponent."""
        return HolderSweepPipeline().execute(config)

    def run(
        self, config: RunConfig, out: Optional[Union[str, Path]] = None
    ) -> PipelineOutput:
        """Run the configured subcommand and write its artifacts and manifest.

        Args:
            config: Validated run configuration.
            out: Output directory; defaults to ``config.output.directory``.

        Returns:
            The pipeline output that was written.

        Raises:
            RadstabError: Any pipeline error, after a manifest flagged
                ``incomplete`` has been written.

        """
        writer = ResultWriter(out if out is not None else config.output.directory)
        seeds = {}
        if config.subcommand in STOCHASTIC_SUBCOMMANDS:
            seeds["ensemble.seed"] = config.ensemble.seed
        started = time.perf_counter()
        logger.info("Running %s into %s", config.subcommand, writer.directory)
        try:
            output = PIPELINES[config.subcommand]().execute(config)
            writer.write_output(output)
        except RadstabError as exc:
            writer.write_manifest(
                config.to_dict(),
                seeds,
                time.perf_counter() - started,
                incomplete=True,
                error=f"{type(exc).__name__}: {exc}",
            )
            raise
        writer.write_manifest(
            config.to_dict(), seeds, time.perf_counter() - started, summary=output.summary
        )
        logger.info(
            "%s finished with %d artifacts", config.subcommand, len(writer.artifacts)
        )
        return output
