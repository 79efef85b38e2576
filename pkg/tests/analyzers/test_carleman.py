"""Unit tests for the exponential weight, the cutoff and the Carleman class.

This module tests the geometric level constants on the axis-ordinate setup,
the level scan of the weight, the cutoff profile and the evaluation of both
weighted estimates on a cut-off time derivative.
"""

import math

import numpy as np
import pytest

from radstab.analyzers.carleman import Carleman, cutoff_chi, weight_b, weight_phi
from radstab.analyzers.coefficients import Coefficients
from radstab.analyzers.transport import Transport
from radstab.exceptions import (
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    ObservationTimeError,
    PreconditionError,
    ValidationError,
)
from radstab.models.coefficients import CoefficientField, SourceFactor
from radstab.models.transport import AngularDensityField


class TestWeightFunctions:
    """Test cases for φ and B."""

    def test_phi(self):
        """Test φ = -βt + v·x."""
        assert weight_phi((0.3, 0.4), (1.0, 2.0), 2.0, 0.25) == pytest.approx(0.6)

    def test_phi_broadcasts(self):
        """Test that arrays of points give arrays of values."""
        values = weight_phi(np.array([[0.0, 0.0], [1.0, 1.0]]), (1.0, 0.0), 0.0, 0.5)

        np.testing.assert_allclose(values, [0.0, 1.0])

    def test_b(self):
        """Test B = |v|² - β."""
        assert weight_b((0.0, 2.0), 1.0) == pytest.approx(3.0)

    @pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
    def test_b_out_of_range(self, beta):
        """Test that β outside (0, |v|²) is a domain error."""
        with pytest.raises(DomainError):
            weight_b((1.0, 0.0), beta)


class TestMakeConfig:
    """Test cases for the level constants on the unit square with axis ordinates."""

    def test_axis_constants(self, axis_phase_space):
        """Test r0, r1, delta and s0 for β = 0.5 and T = 6."""
        cfg = Carleman(axis_phase_space).make_config(6.0, 0.5)

        assert cfg.r_min == pytest.approx(-1.0)
        assert cfg.r_max == pytest.approx(1.0)
        assert cfg.r0 == pytest.approx(-5.0 / 3.0)
        assert cfg.r1 == pytest.approx(-4.0 / 3.0)
        assert cfg.delta == pytest.approx(0.3)
        assert cfg.mu == pytest.approx(1.0 / 3.0)
        assert cfg.s0 == pytest.approx(7.5)
        assert len(cfg.s_grid) == 8
        assert cfg.s_grid[-1] == pytest.approx(30.0)

    def test_short_horizon(self, axis_phase_space):
        """Test that T = 3.9 is below the minimal time 4."""
        with pytest.raises(ObservationTimeError):
            Carleman(axis_phase_space).make_config(3.9, 0.5)

    def test_beta_out_of_range(self, axis_phase_space):
        """Test that β ≥ min |v|² is rejected."""
        with pytest.raises(DomainError):
            Carleman(axis_phase_space).make_config(6.0, 1.0)

    def test_custom_s_range(self, axis_phase_space):
        """Test that an explicit s range is spaced geometrically."""
        cfg = Carleman(axis_phase_space).make_config(6.0, 0.5, s_range=(1.0, 100.0), n_s=3)

        np.testing.assert_allclose(cfg.s_grid, [1.0, 10.0, 100.0])
        assert cfg.to_dict()["s_grid"] == list(cfg.s_grid)

    @pytest.mark.parametrize("s_range,n_s", [((5.0, 1.0), 4), ((0.0, 1.0), 4), ((1.0, 2.0), 1)])
    def test_invalid_s_grid(self, axis_phase_space, s_range, n_s):
        """Test that empty or non-positive s ranges are rejected."""
        with pytest.raises(ConfigurationError):
            Carleman(axis_phase_space).make_config(6.0, 0.5, s_range=s_range, n_s=n_s)


class TestWeightLevels:
    """Test cases for the level scan of φ."""

    def test_axis_scan(self, axis_phase_space):
        """Test the early minimum -1.15 and the late maximum -1.7."""
        carleman = Carleman(axis_phase_space)
        cfg = carleman.make_config(6.0, 0.5)
        times = [0.0, cfg.delta, cfg.horizon - 2 * cfg.delta, cfg.horizon]

        levels = carleman.check_weight_levels(cfg, times)

        assert levels["early_min"] == pytest.approx(-1.15)
        assert levels["late_max"] == pytest.approx(-1.7)
        assert levels["early_above_r1"]
        assert levels["late_below_r0"]


class TestCutoff:
    """Test cases for the smooth cutoff χ."""

    @pytest.fixture(autouse=True)
    def axis_config(self, axis_phase_space):
        """Weight constants for the axis ordinates, beta = 0.5 and T = 6."""
        self.cfg = Carleman(axis_phase_space).make_config(6.0, 0.5)

    def test_plateaus(self):
        """Test χ = 1 before T - 2δ and χ = 0 after T - δ."""
        horizon, delta = self.cfg.horizon, self.cfg.delta

        assert cutoff_chi(0.0, self.cfg) == 1.0
        assert cutoff_chi(horizon - 2 * delta, self.cfg) == 1.0
        assert cutoff_chi(horizon - delta, self.cfg) == pytest.approx(0.0, abs=1e-12)
        assert cutoff_chi(horizon, self.cfg) == 0.0

    def test_monotone_transition(self):
        """Test that χ decreases strictly across the transition."""
        horizon, delta = self.cfg.horizon, self.cfg.delta
        times = np.linspace(horizon - 2 * delta, horizon - delta, 21)[1:-1]

        chi = cutoff_chi(times, self.cfg)

        assert np.all(np.diff(chi) < 0)
        assert np.all((chi > 0) & (chi < 1))
        assert cutoff_chi(horizon - 1.5 * delta, self.cfg) == pytest.approx(0.5)

    def test_outside_interval(self):
        """Test that χ is undefined outside [0, T]."""
        with pytest.raises(DomainError):
            cutoff_chi(-0.1, self.cfg)
        with pytest.raises(DomainError):
            cutoff_chi(self.cfg.horizon + 0.1, self.cfg)


class TestEstimates:
    """Test cases for the weighted-estimate evaluation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.beta = 0.5
        self.horizon = 6.5

    def _source_run(self, phase_space, gaussian_data):
        transport = Transport(phase_space)
        coefficients = Coefficients(phase_space)
        sigma_t = coefficients.constant(0.5, "sigma_t")
        sigma_s = coefficients.constant(0.0, "sigma_s")
        field = transport.solve_linearized(
            CoefficientField(gaussian_data(phase_space, width=0.15), "f"),
            SourceFactor(np.ones(phase_space.shape)),
            sigma_t,
            sigma_s,
            coefficients.isotropic_phase(),
            self.horizon,
            transport.stable_time_step(),
        )
        return transport, field, sigma_t, sigma_s, coefficients.isotropic_phase()

    def test_streaming_constants(self, small_phase_space, field_factory):
        """Test that C(s) is finite and positive on the whole s grid."""
        _, gaussian_data = field_factory
        transport, field, sigma_t, _, _ = self._source_run(small_phase_space, gaussian_data)
        carleman = Carleman(small_phase_space, transport)
        cfg = carleman.make_config(self.horizon, self.beta)
        z = carleman.auxiliary_z(field, cfg)

        report = carleman.evaluate_streaming_estimate(z, cfg, sigma_t)

        assert report.applicable
        assert len(report.points) == len(cfg.s_grid)
        assert all(c is not None and math.isfinite(c) and c > 0 for c in report.constants)
        assert report.c_spread is not None

    def test_scattering_shares_bulk_terms(self, small_phase_space, field_factory):
        """Test that without scattering both estimates see the same bulk and source terms."""
        _, gaussian_data = field_factory
        transport, field, sigma_t, sigma_s, kernel = self._source_run(
            small_phase_space, gaussian_data
        )
        carleman = Carleman(small_phase_space, transport)
        cfg = carleman.make_config(self.horizon, self.beta)
        z = carleman.auxiliary_z(field, cfg)

        scattering = carleman.evaluate_scattering_estimate(z, cfg, sigma_t, sigma_s, kernel)
        streaming = carleman.evaluate_streaming_estimate(z, cfg, sigma_t)

        assert scattering.estimate_id == "scattering"
        assert scattering.applicable
        for ours, theirs in zip(scattering.points, streaming.points):
            assert ours.s == theirs.s
            assert ours.lhs_terms == pytest.approx(theirs.lhs_terms, rel=1e-12)
            assert ours.rhs_terms["source"] == pytest.approx(theirs.rhs_terms["source"], rel=1e-12)
            assert ours.c is not None and ours.c > 0

    def test_constants_are_scale_invariant(self, small_phase_space, field_factory):
        """Test that doubling z leaves every C(s) unchanged."""
        _, gaussian_data = field_factory
        transport, field, sigma_t, sigma_s, kernel = self._source_run(
            small_phase_space, gaussian_data
        )
        carleman = Carleman(small_phase_space, transport)
        cfg = carleman.make_config(self.horizon, self.beta)
        z = carleman.auxiliary_z(field, cfg)

        single = carleman.evaluate_both(z, cfg, sigma_t, sigma_s, kernel)
        double = carleman.evaluate_both(z.scaled(2.0), cfg, sigma_t, sigma_s, kernel)

        for estimate_id in ("streaming", "scattering"):
            np.testing.assert_allclose(
                double[estimate_id].constants, single[estimate_id].constants, rtol=1e-12
            )

    def test_nonzero_terminal_value_rejected(self, small_phase_space, field_factory):
        """Test that a field with u(T) ≠ 0 is not a valid input."""
        _, gaussian_data = field_factory
        transport, field, sigma_t, _, _ = self._source_run(small_phase_space, gaussian_data)
        carleman = Carleman(small_phase_space, transport)
        cfg = carleman.make_config(self.horizon, self.beta)

        with pytest.raises(PreconditionError, match="u\\(T\\) = 0"):
            carleman.evaluate_streaming_estimate(field, cfg, sigma_t)

    def test_zero_field_not_applicable(self, small_phase_space):
        """Test that a vanishing field reports C = None on every s."""
        carleman = Carleman(small_phase_space)
        cfg = carleman.make_config(self.horizon, self.beta)
        partition = small_phase_space.partition
        field = AngularDensityField(
            np.zeros(small_phase_space.shape + (5,)),
            self.horizon / 4,
            np.zeros((len(partition.gamma_plus), 5)),
            np.zeros((len(partition.gamma_minus), 5)),
        )

        report = carleman.evaluate_streaming_estimate(
            field, cfg, Coefficients(small_phase_space).constant(0.0, "sigma_t")
        )

        assert not report.applicable
        assert report.constants == [None] * len(cfg.s_grid)
        assert report.c_spread is None

    def test_auxiliary_needs_three_steps(self, small_phase_space):
        """Test that z is not formed from fewer than three steps."""
        carleman = Carleman(small_phase_space)
        cfg = carleman.make_config(self.horizon, self.beta)
        values = np.zeros(small_phase_space.shape + (3,))
        field = AngularDensityField(values, self.horizon / 2, np.zeros((1, 3)), np.zeros((1, 3)))

        with pytest.raises(InsufficientDataError):
            carleman.auxiliary_z(field, cfg)

    def test_auxiliary_horizon_mismatch(self, small_phase_space):
        """Test that z needs a field on the weight horizon."""
        carleman = Carleman(small_phase_space)
        cfg = carleman.make_config(self.horizon, self.beta)
        field = AngularDensityField(
            np.zeros(small_phase_space.shape + (11,)), 0.1, np.zeros((1, 11)), np.zeros((1, 11))
        )

        with pytest.raises(ValidationError, match="horizon"):
            carleman.auxiliary_z(field, cfg)

