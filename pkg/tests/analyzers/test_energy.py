"""Unit tests for the Energy class."""

import math

import numpy as np
import pytest

from radstab.analyzers.coefficients import Coefficients
from radstab.analyzers.energy import Energy
from radstab.analyzers.transport import Transport
from radstab.models.coefficients import CoefficientField, SourceFactor
from radstab.models.transport import AngularDensityField


class TestEnergyTrace:
    """Test cases for E(t) and the boundary integrals."""

    def test_energy_of_fixed_point(self, small_phase_space, problem_factory):
        """Test that u ≡ 1 has E = 2π at every step and balanced boundary fluxes."""
        transport = Transport(small_phase_space)
        ones = np.ones(small_phase_space.shape)
        problem = problem_factory(
            small_phase_space, ones, inflow=transport.inflow_from_initial(ones)
        )
        field = transport.solve_forward(problem, 0.05)

        trace = Energy(small_phase_space, transport).energy(field, problem)

        np.testing.assert_allclose(trace.energy, 2 * math.pi)
        assert trace.inflow_integral == pytest.approx(trace.outflow_integral)
        assert trace.source_norm == 0.0
        assert trace.to_dict()["energy"][0] == pytest.approx(2 * math.pi)

    def test_sign_consistent(self, small_phase_space):
        """Test that the partition signs agree with the flux convention."""
        assert Energy(small_phase_space).sign_consistent()


class TestGronwallBound:
    """Test cases for the fitted Gronwall constant."""

    def setup_method(self):
        """Set up test fixtures."""
        self.dt = 0.05

    def test_zero_inflow_constant_is_one(self, small_phase_space, problem_factory, field_factory):
        """Test that E(t) ≤ E(0) with zero inflow, so the constant is attained at t = 0."""
        _, gaussian_data = field_factory
        transport = Transport(small_phase_space)
        problem = problem_factory(
            small_phase_space, gaussian_data(small_phase_space), sigma_a=0.5, sigma_s=1.0
        )
        field = transport.solve_forward(problem, self.dt)

        report = Energy(small_phase_space, transport).verify_gronwall_bound(field, problem)

        assert report.applicable
        assert not report.violation
        assert report.c_fit <= 1.0 + 1e-8
        assert report.c_fit >= 1.0 - 1e-12

    def test_constant_is_scale_invariant(self, small_phase_space, problem_factory, field_factory):
        """Test that doubling the solution leaves C unchanged."""
        _, gaussian_data = field_factory
        transport = Transport(small_phase_space)
        initial = gaussian_data(small_phase_space)
        problem = problem_factory(
            small_phase_space, initial, inflow=transport.inflow_from_initial(initial)
        )
        field = transport.solve_forward(problem, self.dt)
        energy = Energy(small_phase_space, transport)

        single = energy.verify_gronwall_bound(field)
        double = energy.verify_gronwall_bound(field.scaled(2.0))

        assert double.c_fit == pytest.approx(single.c_fit, rel=1e-14)

    def test_constant_stable_under_refinement(self, phase_space_factory, problem_factory):
        """Test that C of a scattering run fed by unit inflow is stable from 16² to 32²."""
        constants = []
        for cells in (16, 32):
            phase_space = phase_space_factory(cells, 8)
            transport = Transport(phase_space)
            problem = problem_factory(
                phase_space,
                np.zeros(phase_space.shape),
                sigma_a=0.2,
                sigma_s=0.5,
                horizon=0.5,
                inflow=np.ones(len(phase_space.partition.gamma_minus)),
            )
            field = transport.solve_forward(problem, transport.stable_time_step(0.9))

            report = Energy(phase_space, transport).verify_gronwall_bound(field, problem)

            assert not report.violation
            constants.append(report.c_fit)

        assert all(c is not None and math.isfinite(c) and c > 0 for c in constants)
        assert 0.5 < constants[1] / constants[0] < 2.0

    def test_zero_field_not_applicable(self, small_phase_space):
        """Test that both sides vanishing makes the check not applicable."""
        partition = small_phase_space.partition
        field = AngularDensityField(
            np.zeros(small_phase_space.shape + (5,)),
            0.1,
            np.zeros((len(partition.gamma_plus), 5)),
            np.zeros((len(partition.gamma_minus), 5)),
        )

        report = Energy(small_phase_space).verify_gronwall_bound(field)

        assert not report.applicable
        assert report.c_fit is None


class TestOutflowBound:
    """Test cases for the outflow-derivative constant."""

    def setup_method(self):
        """Set up test fixtures."""
        self.horizon = 0.5

    def test_source_run_has_positive_constant(self, small_phase_space, field_factory):
        """Test that a compactly concentrated source yields a finite positive C."""
        constant_field, gaussian_data = field_factory
        transport = Transport(small_phase_space)
        f = CoefficientField(gaussian_data(small_phase_space, width=0.2), "f")
        field = transport.solve_linearized(
            f,
            SourceFactor(np.ones(small_phase_space.shape)),
            constant_field(small_phase_space, 0.5, "sigma_t"),
            constant_field(small_phase_space, 0.0, "sigma_s"),
            Coefficients(small_phase_space).isotropic_phase(),
            self.horizon,
            0.05,
        )
        energy = Energy(small_phase_space, transport)
        f_norm = energy.l2_norm(f.values)

        report = energy.verify_outflow_bound(field, f_norm)
        doubled = energy.verify_outflow_bound(field.scaled(2.0), 2.0 * f_norm)

        assert report.applicable
        assert report.c_fit > 0
        assert math.isfinite(report.c_fit)
        assert report.rhs_components["inflow"] == 0.0
        # Both sides are quadratic in (u, f).
        assert doubled.c_fit == pytest.approx(report.c_fit, rel=1e-12)

    def test_zero_run_not_applicable(self, small_phase_space):
        """Test that a zero field with zero source is not applicable."""
        partition = small_phase_space.partition
        field = AngularDensityField(
            np.zeros(small_phase_space.shape + (5,)),
            0.1,
            np.zeros((len(partition.gamma_plus), 5)),
            np.zeros((len(partition.gamma_minus), 5)),
        )

        report = Energy(small_phase_space).verify_outflow_bound(field, 0.0)

        assert not report.applicable
        assert not report.violation


class TestIdentityResidual:
    """Test cases for the discrete energy balance."""

    def test_fixed_point_balances(self, small_phase_space, problem_factory):
        """Test that the stationary solution satisfies the balance step by step."""
        transport = Transport(small_phase_space)
        ones = np.ones(small_phase_space.shape)
        problem = problem_factory(
            small_phase_space, ones, sigma_s=1.0, inflow=transport.inflow_from_initial(ones)
        )
        field = transport.solve_forward(problem, 0.05)

        residual = Energy(small_phase_space, transport).identity_residual(field, problem)

        assert residual.residuals.shape == (field.n_steps,)
        assert residual.accumulated < 1e-9
        assert residual.to_dict()["steps"] == field.n_steps

