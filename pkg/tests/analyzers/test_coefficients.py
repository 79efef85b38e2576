"""Unit tests for the Coefficients class."""

import math

import numpy as np
import pytest

from radstab.analyzers.coefficients import Coefficients
from radstab.exceptions import DegenerateKernelError, DomainError, ValidationError
from radstab.models.coefficients import AdmissibilityBounds, CoefficientField
from radstab.models.transport import AngularDensityField
from radstab.pipelines import Pipeline


class TestPhaseKernel:
    """Test cases for kernel normalization."""

    def setup_method(self):
        """Set up test fixtures."""
        self.n_ordinates = 8

    def test_isotropic_rows_sum_to_one(self, small_phase_space):
        """Test that p ≡ 1/|V| integrates to one over V."""
        kernel = Coefficients(small_phase_space).isotropic_phase()

        np.testing.assert_allclose(kernel.row_sums(), 1.0, atol=1e-12)
        assert kernel.x_independent

    def test_von_mises_rows_sum_to_one(self, small_phase_space):
        """Test that a forward-peaked kernel is normalized row by row."""
        coefficients = Coefficients(small_phase_space)

        kernel = Pipeline.build_kernel(coefficients, "von_mises", concentration=3.0)

        np.testing.assert_allclose(kernel.row_sums(), 1.0, atol=1e-10)
        # Forward peak: p(v, v) is the largest entry of each row.
        values = kernel.values[0]
        assert np.all(np.argmax(values, axis=1) == np.arange(self.n_ordinates))

    def test_normalization_is_idempotent(self, small_phase_space):
        """Test that normalizing a normalized kernel changes nothing."""
        coefficients = Coefficients(small_phase_space)
        kernel = Pipeline.build_kernel(coefficients, "von_mises", concentration=1.5)

        again = coefficients.normalize_phase(kernel.values)

        assert np.max(np.abs(again.values - kernel.values)) < 1e-14

    def test_cell_dependent_kernel(self, small_phase_space):
        """Test that one kernel per cell is accepted and normalized per cell."""
        coefficients = Coefficients(small_phase_space)
        rng = np.random.default_rng(3)
        raw = rng.uniform(0.1, 1.0, size=(64, self.n_ordinates, self.n_ordinates))

        kernel = coefficients.normalize_phase(raw)

        assert not kernel.x_independent
        np.testing.assert_allclose(kernel.row_sums(), 1.0, atol=1e-12)

    def test_negative_entries_rejected(self, small_phase_space):
        """Test that a kernel with negative entries is a domain error."""
        raw = np.ones((self.n_ordinates, self.n_ordinates))
        raw[2, 5] = -0.1

        with pytest.raises(DomainError):
            Coefficients(small_phase_space).normalize_phase(raw)

    def test_zero_row_rejected(self, small_phase_space):
        """Test that a row without mass cannot be normalized."""
        raw = np.ones((self.n_ordinates, self.n_ordinates))
        raw[4] = 0.0

        with pytest.raises(DegenerateKernelError, match="ordinate=4"):
            Coefficients(small_phase_space).normalize_phase(raw)

    def test_wrong_shape_rejected(self, small_phase_space):
        """Test that a kernel sized for another ordinate set is rejected."""
        with pytest.raises(ValidationError):
            Coefficients(small_phase_space).normalize_phase(np.ones((4, 4)))


class TestCoefficientFields:
    """Test cases for cross sections and presets."""

    def test_total_attenuation(self, small_phase_space):
        """Test that σ_t = σ_a + σ_s carries the sigma_t label."""
        coefficients = Coefficients(small_phase_space)

        sigma_t = coefficients.total_attenuation(
            coefficients.constant(0.5, "sigma_a"), coefficients.constant(1.25, "sigma_s")
        )

        assert sigma_t.label == "sigma_t"
        np.testing.assert_allclose(sigma_t.values, 1.75)

    def test_negative_cross_section_rejected(self, small_phase_space):
        """Test that cross sections must be nonnegative."""
        with pytest.raises(DomainError, match="sigma_s"):
            CoefficientField(np.full(small_phase_space.shape, -1.0), "sigma_s")

    def test_signed_source_accepted(self, small_phase_space):
        """Test that the source f may change sign."""
        field = CoefficientField(np.full(small_phase_space.shape, -1.0), "f")

        assert field.sup_norm == 1.0

    def test_field_from_preset(self, small_phase_space):
        """Test that fields can be generated from named presets."""
        field = Coefficients(small_phase_space).field("constant", {"value": 0.4}, "sigma_a")

        assert field.label == "sigma_a"
        np.testing.assert_allclose(field.values, 0.4)


class TestAdmissibility:
    """Test cases for admissibility reports."""

    def test_coefficient_within_bound(self, small_phase_space):
        """Test that the sup norm is compared against M."""
        coefficients = Coefficients(small_phase_space)

        report = coefficients.check_admissibility(
            coefficients.constant(0.8, "sigma_t"), AdmissibilityBounds(M=1.0)
        )

        assert report.passed
        assert report.sup_norm == pytest.approx(0.8)

    def test_coefficient_above_bound_reports(self, small_phase_space):
        """Test that a failing field is reported, not raised."""
        coefficients = Coefficients(small_phase_space)

        report = coefficients.check_admissibility(
            coefficients.constant(2.0, "sigma_t"), AdmissibilityBounds(M=1.0)
        )

        assert not report.passed
        assert report.to_dict()["kind"] == "coefficient"

    def test_constant_density_norms(self, small_phase_space):
        """Test the norms of u ≡ 1 on [0, 1]: only the L² and sup parts survive."""
        values = np.ones(small_phase_space.shape + (11,))
        field = AngularDensityField(values, 0.1, np.zeros((1, 11)), np.zeros((1, 11)))
        coefficients = Coefficients(small_phase_space)

        report = coefficients.check_admissibility(field, AdmissibilityBounds(M=4.0))

        assert report.kind == "density"
        assert report.l2_norm == pytest.approx(math.sqrt(2 * math.pi))
        assert report.dt_l2_norm == 0.0
        assert report.grad_l2_norm == pytest.approx(0.0, abs=1e-12)
        assert report.total_norm == pytest.approx(1.0 + math.sqrt(2 * math.pi))
        assert report.passed

    def test_density_above_bound(self, small_phase_space):
        """Test that a density larger than M fails the check."""
        values = np.ones(small_phase_space.shape + (11,))
        field = AngularDensityField(values, 0.1, np.zeros((1, 11)), np.zeros((1, 11)))

        report = Coefficients(small_phase_space).check_admissibility(
            field, AdmissibilityBounds(M=3.0)
        )

        assert not report.passed
