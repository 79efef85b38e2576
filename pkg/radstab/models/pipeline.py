"""Models for pipeline inputs and results before they are written to disk."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .coefficients import CoefficientField, SourceFactor
from .geometry import PhaseSpace
from .stability import StabilityOptions
from .transport import ProblemData


@dataclass(frozen=True, eq=False)
class RunSetup:
    """Discrete problem assembled from a run configuration.

    ``problem`` carries the initial data, inflow, cross sections, kernel and
    horizon; ``source`` and ``source_factor`` are the f and R of the
    linearized problem. ``min_time`` is the observation time the horizon was
    checked against.
    """

    phase_space: PhaseSpace
    problem: ProblemData
    sigma_a: CoefficientField
    source: CoefficientField
    source_factor: SourceFactor
    dt: float
    min_time: float
    beta: Optional[float]
    options: StabilityOptions

    @property
    def horizon(self) -> float:
        """Final time T."""
        return self.problem.horizon

    def describe(self) -> Dict[str, Any]:
        """Grid and timing summary for the manifest."""
        mesh, vset = self.phase_space.mesh, self.phase_space.vset
        partition = self.phase_space.partition
        return {
            "cells": list(mesh.shape),
            "ordinates": vset.n_ordinates,
            "horizon": self.horizon,
            "dt": self.dt,
            "min_observation_time": self.min_time,
            "beta": self.beta,
            "gamma_plus": len(partition.gamma_plus),
            "gamma_minus": len(partition.gamma_minus),
            "tangential": partition.n_tangential,
        }


@dataclass
class PipelineOutput:
    """Everything one subcommand produced.

    ``tables`` become CSV files, ``reports`` JSON files and ``arrays`` binary
    dumps with a JSON sidecar. ``summary`` is echoed into the manifest.
    """

    subcommand: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    reports: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    arrays: Dict[str, Tuple[np.ndarray, Dict[str, Any]]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    hypothesis_violation: bool = False
