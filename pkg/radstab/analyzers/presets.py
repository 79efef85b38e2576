"""Preset generators for coefficient fields and initial data.

This module handles the named presets (constant, Gaussian bump, checkerboard,
CSV table) and user-registered generators in a centralized way.
"""

from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd

from ..exceptions import ConfigurationError, IncompleteDataError
from ..models.geometry import PhaseSpace

PresetGenerator = Callable[[PhaseSpace, Dict[str, Any]], np.ndarray]


def constant_preset(phase_space: PhaseSpace, params: Dict[str, Any]) -> np.ndarray:
    """Same value on every (cell, ordinate).

    Args:
        phase_space: Target grid
        params: ``value`` (default 0.0)

    Returns:
        Array of shape (n_cells, J)

    """
    return np.full(phase_space.shape, float(params.get("value", 0.0)))


def gaussian_preset(phase_space: PhaseSpace, params: Dict[str, Any]) -> np.ndarray:
    """Isotropic Gaussian bump ``value + amplitude·exp(-|x - center|²/(2 width²))``.

    Args:
        phase_space: Target grid
        params: ``amplitude`` (1.0), ``center`` (domain midpoint), ``width`` (0.1),
            ``value`` background (0.0)

    Returns:
        Array of shape (n_cells, J), constant across ordinates

    """
    mesh = phase_space.mesh
    center = params.get("center")
    if center is None:
        center = mesh.origin + 0.5 * mesh.extents
    center = np.asarray(center, dtype=float)
    width = float(params.get("width", 0.1))
    if not width > 0:
        raise ConfigurationError(f"Gaussian width must be positive, got {width}")
    dist_sq = np.sum((mesh.cell_centers - center) ** 2, axis=1)
    bump = float(params.get("amplitude", 1.0)) * np.exp(-dist_sq / (2.0 * width**2))
    bump = bump + float(params.get("value", 0.0))
    return np.repeat(bump[:, None], phase_space.vset.n_ordinates, axis=1)


def checkerboard_preset(phase_space: PhaseSpace, params: Dict[str, Any]) -> np.ndarray:
    """Alternating ``low``/``high`` blocks of ``block`` × ``block`` cells.

    Args:
        phase_space: Target grid
        params: ``low`` (0.0), ``high`` (1.0), ``block`` (1)

    Returns:
        Array of shape (n_cells, J), constant across ordinates

    """
    nx, ny = phase_space.mesh.shape
    block = int(params.get("block", 1))
    if block < 1:
        raise ConfigurationError(f"Checkerboard block must be ≥ 1, got {block}")
    ix, iy = np.meshgrid(np.arange(nx) // block, np.arange(ny) // block, indexing="ij")
    pattern = ((ix + iy) % 2).ravel()
    low, high = float(params.get("low", 0.0)), float(params.get("high", 1.0))
    values = np.where(pattern == 1, high, low)
    return np.repeat(values[:, None], phase_space.vset.n_ordinates, axis=1)


def csv_preset(phase_space: PhaseSpace, params: Dict[str, Any]) -> np.ndarray:
    """Values read from a CSV table with columns cell_id, ordinate_id, value.

    Args:
        phase_space: Target grid
        params: ``path`` of the table

    Returns:
        Array of shape (n_cells, J)

    """
    path = params.get("path")
    if not path:
        raise ConfigurationError("CSV preset requires a path")
    table = pd.read_csv(path)
    missing = {"cell_id", "ordinate_id", "value"} - set(table.columns)
    if missing:
        raise ConfigurationError(f"CSV table {path} lacks columns {sorted(missing)}")
    values = np.full(phase_space.shape, np.nan)
    cells = table["cell_id"].to_numpy(dtype=int)
    ordinates = table["ordinate_id"].to_numpy(dtype=int)
    n_cells, n_ord = phase_space.shape
    if cells.min(initial=0) < 0 or cells.max(initial=0) >= n_cells:
        raise ConfigurationError(f"CSV table {path} has cell ids outside [0, {n_cells})")
    if ordinates.min(initial=0) < 0 or ordinates.max(initial=0) >= n_ord:
        raise ConfigurationError(f"CSV table {path} has ordinate ids outside [0, {n_ord})")
    values[cells, ordinates] = table["value"].to_numpy(dtype=float)
    if np.isnan(values).any():
        raise IncompleteDataError(f"CSV table {path} does not cover every (cell, ordinate)")
    return values


class Presets:
    """Registry of named field generators.

    Built-in kinds are ``constant``, ``gaussian``, ``checkerboard`` and ``csv``;
    custom generators can be registered under new names.
    """

    def __init__(self):
        """Initialize the registry with the built-in presets."""
        self.generators: Dict[str, PresetGenerator] = {
            "constant": constant_preset,
            "gaussian": gaussian_preset,
            "checkerboard": checkerboard_preset,
            "csv": csv_preset,
        }

    def add_custom_preset(self, kind: str, generator: PresetGenerator) -> None:
        """Register a generator under a name.

        Args:
            kind: Preset name used in configuration files
            generator: Function (phase_space, params) -> (n_cells, J) array

        """
        self.generators[kind] = generator

    def kinds(self):
        """Names of all registered presets."""
        return sorted(self.generators)

    def generate(
        self, phase_space: PhaseSpace, kind: str, params: Optional[Dict[str, Any]] = None
    ) -> np.ndarray:
        """Evaluate a preset on the grid.

        Args:
            phase_space: Target grid
            kind: Registered preset name
            params: Preset parameters

        Returns:
            Array of shape (n_cells, J)

        """
        if kind not in self.generators:
            raise ConfigurationError(f"Unknown preset '{kind}', expected one of {self.kinds()}")
        values = np.asarray(self.generators[kind](phase_space, params or {}), dtype=float)
        if values.shape != phase_space.shape:
            raise ConfigurationError(
                f"Preset '{kind}' returned shape {values.shape}, expected {phase_space.shape}"
            )
        return values
