"""Unit tests for the inner boundary-integral solver and the u0 table."""

import math

import numpy as np
import pytest

from rotating_trap.core.models import InnerSolverParams
from rotating_trap.core.quadrature import radial_integral
from rotating_trap.core.transition_regime import (
    FluxTableBuilder,
    adjoint_green,
    flux_from_density,
    inner_constant_u0,
    interpolate_u0,
    interpolate_u0_prime,
    kress_weights,
    mass_transition,
    mass_transition_gradient,
    optimal_radius_transition,
    outer_field,
    reconstruct_mu,
    small_s0_u0,
    solve_boundary_density,
    u0_derivative,
)
from rotating_trap.utils.errors import (
    ConventionError,
    DomainError,
    SingularPointError,
    TableRangeError,
)


def _params(n_nodes=64):
    return InnerSolverParams(n_nodes=n_nodes, s0_grid=(1.0,), nodes_per_s0=8.0)


class TestAdjointGreen:
    """Test cases for the free-space kernel."""

    def test_reflection_symmetry(self):
        left = adjoint_green((0.7, 0.3), (0.2, -0.4), 1.5)
        right = adjoint_green((-0.7, 0.3), (-0.2, -0.4), 1.5)
        assert left == pytest.approx(right, rel=1e-14)

    def test_pde_residual(self):
        """Delta G - s0 G_eta vanishes away from the source."""
        s0, h = 1.0, 1e-3
        x, y = 2.0, 1.0

        def g(dx, dy):
            return adjoint_green((x + dx, y + dy), (0.0, 0.0), s0)

        laplacian = (
            g(h, 0) + g(-h, 0) + g(0, h) + g(0, -h) - 4 * g(0, 0)
        ) / h**2
        g_eta = (g(0, h) - g(0, -h)) / (2 * h)
        assert abs(laplacian - s0 * g_eta) < 1e-6

    def test_decays_across_stream(self):
        assert abs(adjoint_green((60.0, 0.0), (0.0, 0.0), 1.0)) < 1e-10

    def test_rejects_source(self):
        with pytest.raises(SingularPointError):
            adjoint_green((0.5, 0.5), (0.5, 0.5), 1.0)
        with pytest.raises(DomainError):
            adjoint_green((1.0, 0.0), (0.0, 0.0), 0.0)


class TestKressWeights:
    """Test cases for the log-kernel quadrature weights."""

    def test_constant_integrand(self):
        weights = kress_weights(32)
        assert np.allclose(weights.sum(axis=1), 0.0, atol=1e-13)

    def test_cosine_integrand(self):
        """Integral of log(4 sin^2((t - s)/2)) cos(s) ds is -2 pi cos(t)."""
        nodes = 2 * math.pi * np.arange(32) / 32
        weights = kress_weights(32)
        assert np.allclose(weights @ np.cos(nodes), -2 * math.pi * np.cos(nodes))

    def test_circulant(self):
        weights = kress_weights(16)
        assert np.allclose(np.roll(weights[0], 3), weights[3])

    def test_rejects_odd(self):
        with pytest.raises(DomainError):
            kress_weights(33)


class TestBoundaryDensity:
    """Test cases for the Nystrom solve."""

    def test_reflection_symmetry(self):
        """The drift is along eta, so sigma(pi - t) = sigma(t)."""
        sigma = solve_boundary_density(1.0, _params())
        n = sigma.size
        mirror = (n // 2 - np.arange(n)) % n
        assert np.allclose(sigma, sigma[mirror], atol=1e-8)

    def test_flux_is_negative(self):
        sigma = solve_boundary_density(1.0, _params())
        flux = flux_from_density(sigma)
        assert flux < 0
        assert inner_constant_u0(1.0, _params()) * flux == pytest.approx(
            -math.pi, rel=1e-12
        )

    def test_node_doubling(self):
        coarse = inner_constant_u0(1.0, _params(64))
        fine = inner_constant_u0(1.0, _params(128))
        assert abs(coarse - fine) < 1e-4

    def test_positive_and_decreasing(self):
        values = [inner_constant_u0(s0, _params()) for s0 in (0.1, 1.0, 10.0)]
        assert values[0] > values[1] > values[2] > 0

    def test_small_drift_asymptote(self):
        assert inner_constant_u0(1e-3, _params()) == pytest.approx(
            small_s0_u0(1e-3), abs=1e-2
        )

    def test_wrong_orientation_aborts(self, mocker):
        mocker.patch(
            "rotating_trap.core.transition_regime.flux_from_density",
            return_value=1.0,
        )
        with pytest.raises(ConventionError):
            inner_constant_u0(1.0, _params())

    def test_far_field_decays(self):
        sigma = solve_boundary_density(1.0, _params())
        mu = reconstruct_mu([(50.0, 0.0), (-50.0, 0.0)], 1.0, sigma)
        assert np.all(np.abs(mu) < 1e-3)

    def test_reconstruct_rejects_inside(self):
        sigma = solve_boundary_density(1.0, _params())
        with pytest.raises(DomainError):
            reconstruct_mu([(0.5, 0.0)], 1.0, sigma)

    def test_rejects_nonpositive_drift(self):
        with pytest.raises(DomainError):
            solve_boundary_density(0.0, _params())
        with pytest.raises(DomainError):
            small_s0_u0(-1.0)


class TestDerivative:
    """Test cases for u0_derivative."""

    def test_exact_for_log_profile(self):
        s0 = np.geomspace(1e-2, 10.0, 30)
        derivative = u0_derivative(s0, small_s0_u0(s0))
        assert np.allclose(derivative, -0.5 / s0, rtol=1e-10)

    def test_coarse_grid_warns(self, mocker):
        warning = mocker.patch("rotating_trap.core.transition_regime.logger.warning")
        s0 = np.geomspace(1e-2, 10.0, 6)
        u0_derivative(s0, np.sin(3 * np.log(s0)))
        warning.assert_called_once()

    def test_rejects_short_table(self):
        with pytest.raises(DomainError):
            u0_derivative(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0]))


class TestFluxTable:
    """Test cases for the tabulated u0(s0)."""

    def test_monotone(self, flux_table):
        assert np.all(flux_table.u0 > 0)
        assert np.all(np.diff(flux_table.u0) < 0)
        assert np.all(flux_table.u0_prime < 0)

    def test_immutable(self, flux_table):
        with pytest.raises(ValueError):
            flux_table.u0[0] = 1.0

    def test_interpolation_hits_nodes(self, flux_table):
        index = 10
        assert interpolate_u0(flux_table, flux_table.s0[index]) == pytest.approx(
            flux_table.u0[index], rel=1e-12
        )

    def test_derivative_consistent_with_values(self, flux_table):
        s0, h = 2.0, 1e-3
        slope = (
            interpolate_u0(flux_table, s0 + h) - interpolate_u0(flux_table, s0 - h)
        ) / (2 * h)
        assert interpolate_u0_prime(flux_table, s0) == pytest.approx(slope, rel=1e-2)

    @pytest.mark.parametrize("s0", [1e-4, 100.0])
    def test_out_of_range(self, flux_table, s0):
        with pytest.raises(TableRangeError):
            interpolate_u0(flux_table, s0)

    def test_threads_agree(self, small_inner_params):
        params = small_inner_params.model_copy(
            update={"s0_grid": small_inner_params.s0_grid[:8]}
        )
        serial = FluxTableBuilder(params, threads=1).build()
        parallel = FluxTableBuilder(params, threads=3).build()
        assert np.allclose(serial.u0, parallel.u0, rtol=1e-14)


class TestOuterProblem:
    """Test cases for the transition-regime mass and optimum."""

    def test_outer_field_on_ring(self, flux_table):
        value = outer_field(0.5, 0.5, 4.0, flux_table)
        assert value == pytest.approx(interpolate_u0(flux_table, 2.0))

    def test_mass_is_field_integral(self, flux_table):
        r0, omega0 = 0.6, 4.0
        total = radial_integral(
            lambda r: outer_field(r, r0, omega0, flux_table), splits=(r0,)
        )
        assert total == pytest.approx(mass_transition(r0, omega0, flux_table), abs=1e-8)

    def test_rejects_bad_radius(self, flux_table):
        with pytest.raises(DomainError):
            mass_transition(1.0, 4.0, flux_table)
        with pytest.raises(DomainError):
            outer_field(1.5, 0.5, 4.0, flux_table)

    def test_gradient_matches_difference(self, flux_table):
        r0, omega0, h = 0.3, 4.0, 1e-4
        slope = (
            mass_transition(r0 + h, omega0, flux_table)
            - mass_transition(r0 - h, omega0, flux_table)
        ) / (2 * h)
        gradient = mass_transition_gradient(r0, omega0, flux_table)
        assert gradient == pytest.approx(slope, rel=1e-2)

    def test_interior_optimum(self, flux_table):
        r_opt = optimal_radius_transition(4.0, flux_table)
        assert 0.5 < r_opt < 1.0

    def test_root_is_scan_argmin(self, flux_table):
        omega0 = 4.0
        r_opt = optimal_radius_transition(omega0, flux_table)
        grid = np.linspace(0.05, 0.99, 2000)
        masses = [mass_transition(r, omega0, flux_table) for r in grid]
        assert abs(grid[int(np.argmin(masses))] - r_opt) < 1e-3

    def test_fast_drift_limit(self, flux_table):
        r_opt = optimal_radius_transition(50.0, flux_table)
        assert abs(r_opt - 1 / math.sqrt(2)) < 0.05

    def test_rejects_nonpositive_omega0(self, flux_table):
        with pytest.raises(DomainError):
            optimal_radius_transition(0.0, flux_table)
