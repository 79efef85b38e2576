"""Pytest configuration and fixtures for radstab tests."""

import numpy as np
import pytest

from radstab.analyzers.coefficients import Coefficients
from radstab.analyzers.geometry import Geometry
from radstab.analyzers.presets import gaussian_preset
from radstab.models.coefficients import CoefficientField
from radstab.models.geometry import MeshSpec, PhaseSpace
from radstab.models.transport import ProblemData


def make_phase_space(cells: int = 16, n_angles: int = 8, v0: float = 1.0, v1: float = 1.0):
    """Unit square with ``cells`` × ``cells`` cells and a ring or annulus of ordinates.

    Args:
        cells: Cells per axis.
        n_angles: Number of directions.
        v0: Smallest speed.
        v1: Largest speed.

    Returns:
        PhaseSpace on [0, 1]².

    """
    return Geometry().phase_space(
        MeshSpec(extents=(1.0, 1.0), cells_per_axis=(cells, cells)), v0, v1, n_angles
    )


def constant_field(phase_space: PhaseSpace, value: float, label: str = "other"):
    """Constant coefficient field on a phase space."""
    return CoefficientField(np.full(phase_space.shape, float(value)), label)


def gaussian_data(phase_space: PhaseSpace, width: float = 0.1, amplitude: float = 1.0):
    """Centered Gaussian bump, the same on every ordinate."""
    return gaussian_preset(phase_space, {"width": width, "amplitude": amplitude})


def make_problem(
    phase_space: PhaseSpace,
    initial: np.ndarray,
    sigma_a: float = 0.0,
    sigma_s: float = 0.0,
    horizon: float = 0.2,
    inflow=None,
) -> ProblemData:
    """Problem with constant cross sections and an isotropic kernel."""
    coefficients = Coefficients(phase_space)
    sigma_s_field = constant_field(phase_space, sigma_s, "sigma_s")
    sigma_t = coefficients.total_attenuation(
        constant_field(phase_space, sigma_a, "sigma_a"), sigma_s_field
    )
    return ProblemData(
        initial=initial,
        sigma_t=sigma_t,
        sigma_s=sigma_s_field,
        kernel=coefficients.isotropic_phase(),
        horizon=horizon,
        inflow=inflow,
    )


@pytest.fixture
def phase_space() -> PhaseSpace:
    """16 × 16 unit square with 8 unit-speed ordinates.

    Returns:
        PhaseSpace whose minimal observation time is 2√2.

    """
    return make_phase_space(16, 8)


@pytest.fixture
def axis_phase_space() -> PhaseSpace:
    """8 × 8 unit square with the 4 axis ordinates.

    Returns:
        PhaseSpace with r_min = -1 and r_max = 1.

    """
    return make_phase_space(8, 4)


@pytest.fixture
def small_phase_space() -> PhaseSpace:
    """8 × 8 unit square with 8 unit-speed ordinates for fast solver runs."""
    return make_phase_space(8, 8)


@pytest.fixture
def minimal_config() -> dict:
    """Small forward configuration mapping.

    Returns:
        Dictionary accepted by ``parse_config``.

    """
    return {
        "mesh": {"cells": [8, 8]},
        "velocity": {"v0": 1.0, "v1": 1.0, "n_angles": 8},
        "initial": {"kind": "gaussian", "params": {"width": 0.15, "value": 0.1}},
        "time": {"horizon": 0.5},
    }


@pytest.fixture
def phase_space_factory():
    """Builder of unit-square phase spaces (cells, n_angles, v0, v1)."""
    return make_phase_space


@pytest.fixture
def problem_factory():
    """Builder of constant-coefficient problems with an isotropic kernel."""
    return make_problem


@pytest.fixture
def field_factory():
    """Builders of constant and Gaussian fields, as (constant_field, gaussian_data)."""
    return constant_field, gaussian_data
