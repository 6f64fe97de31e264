"""Unit tests for regime dispatch and optimal radii."""

import math

import numpy as np
import pytest

from rotating_trap.core.models import MassCurve, OptimumResult, RegimeTag, TrapConfig
from rotating_trap.core.optimizer import (
    composite_mass,
    exchange_points,
    golden_section_search,
    local_minima,
    mass,
    mass_curve,
    optimal_radius,
    optimal_radius_curve,
    optimal_radius_vs_speed,
)
from rotating_trap.core.reference_solutions import (
    fast_regime_mass,
    fast_regime_optimal_radius,
    static_mass,
)
from rotating_trap.core.series_regime import mass_series
from rotating_trap.core.transition_regime import mass_transition
from rotating_trap.utils.config import config_manager
from rotating_trap.utils.errors import NoValidRegimeError, UsageError


@pytest.fixture
def coarse_scan():
    """Short single-threaded scans keep the series-regime tests quick."""
    config_manager.apply_overrides(
        {"dispatch.scan_points": 40, "runtime.threads": 1}
    )


class TestGoldenSection:
    """Test cases for golden_section_search."""

    def test_quadratic(self):
        x, fx = golden_section_search(lambda r: (r - 0.3) ** 2, 0.0, 1.0, tol=1e-6)
        assert x == pytest.approx(0.3, abs=2e-6)
        assert fx == pytest.approx(0.0, abs=1e-11)

    def test_reversed_bracket(self):
        x, _ = golden_section_search(lambda r: abs(r - 0.7), 1.0, 0.0, tol=1e-6)
        assert x == pytest.approx(0.7, abs=2e-6)

    def test_narrow_bracket(self):
        x, fx = golden_section_search(lambda r: r, 0.5, 0.5 + 1e-7, tol=1e-5)
        assert x == pytest.approx(0.5 + 5e-8)
        assert fx == x


class TestLocalMinima:
    """Test cases for local_minima."""

    def test_interior(self):
        values = np.array([3.0, 1.0, 2.0, 0.5, 1.0])
        assert local_minima(np.arange(5.0), values) == [1, 3]

    def test_endpoints(self):
        assert local_minima(np.arange(3.0), np.array([1.0, 2.0, 3.0])) == [0]
        assert local_minima(np.arange(3.0), np.array([3.0, 2.0, 1.0])) == [2]

    def test_two_competing(self):
        values = np.array([1.0, 2.0, 1.5, 3.0, 0.8])
        assert local_minima(np.arange(5.0), values) == [0, 2, 4]

    def test_single_sample(self):
        assert local_minima(np.array([0.5]), np.array([1.0])) == [0]


class TestDispatch:
    """Test cases for mass()."""

    def test_centre_is_static(self):
        cfg = TrapConfig(r0=0.0, eps=0.01, omega=50.0)
        value, tag = mass(cfg)
        assert tag is RegimeTag.SERIES
        assert value == static_mass(0.0, 0.01)

    def test_series(self, slow_trap):
        value, tag = mass(slow_trap)
        assert tag is RegimeTag.SERIES
        assert value == pytest.approx(mass_series(slow_trap))

    def test_composite(self, flux_table):
        cfg = TrapConfig(r0=0.5, eps=0.01, omega=100.0)
        value, tag = mass(cfg, flux_table)
        assert tag is RegimeTag.COMPOSITE
        assert value == pytest.approx(composite_mass(cfg, flux_table))

    def test_transition(self, flux_table):
        cfg = TrapConfig(r0=0.5, eps=0.01, omega=1000.0)
        value, tag = mass(cfg, flux_table)
        assert tag is RegimeTag.TRANSITION
        assert value == pytest.approx(mass_transition(0.5, 10.0, flux_table))

    def test_fast(self):
        cfg = TrapConfig(r0=0.5, eps=0.01, omega=1e4)
        value, tag = mass(cfg)
        assert tag is RegimeTag.FAST
        assert value == fast_regime_mass(cfg)

    def test_transition_scale_invariance(self, flux_table):
        """At fixed eps * omega the transition mass does not depend on eps."""
        omega0 = 4.0
        first, _ = mass(TrapConfig(r0=0.6, eps=1e-3, omega=omega0 / 1e-3), flux_table)
        second, _ = mass(TrapConfig(r0=0.6, eps=5e-3, omega=omega0 / 5e-3), flux_table)
        assert first == pytest.approx(second, rel=1e-12)

    def test_every_tag_is_dispatched(self, flux_table):
        """Each tag names a regime that can supply the mass."""
        tags = {
            mass(TrapConfig(r0=0.5, eps=0.01, omega=omega), flux_table)[1]
            for omega in (1.0, 100.0, 1000.0, 1e4)
        }
        assert tags == set(RegimeTag)

    def test_no_valid_regime(self):
        with pytest.raises(NoValidRegimeError):
            mass(TrapConfig(r0=0.5, eps=0.3, omega=1.0))

    def test_overlap_is_reported(self, mocker):
        info = mocker.patch("rotating_trap.core.optimizer.logger.info")
        mass(TrapConfig(r0=0.5, eps=1e-5, omega=1000.0))
        assert any(
            call.args[0] == "Series and large-omega overlap"
            for call in info.call_args_list
        )

    def test_composite_ramp_below_table(self, flux_table):
        """Below the tabulated drift the composite reduces to the series mass."""
        cfg = TrapConfig(r0=1e-4, eps=0.01, omega=50.0)
        value, tag = mass(cfg, flux_table)
        assert tag is RegimeTag.COMPOSITE
        assert value == pytest.approx(mass_series(cfg), rel=1e-3)


class TestMassCurve:
    """Test cases for mass_curve."""

    def test_explicit_grid(self):
        cfg = TrapConfig(r0=0.5, eps=1e-3, omega=1e6)
        grid = np.linspace(0.3, 0.95, 27)
        curve = mass_curve(cfg, r0_grid=grid)
        assert isinstance(curve, MassCurve)
        assert curve.regime_tag is RegimeTag.FAST
        assert np.array_equal(curve.r0_samples, grid)
        assert len(curve.local_minima) == 1
        r_min, m_min = curve.local_minima[0]
        assert abs(r_min - 1 / math.sqrt(2)) < 0.03
        assert m_min == curve.mass_values.min()

    def test_threads_do_not_change_values(self):
        cfg = TrapConfig(r0=0.5, eps=1e-3, omega=1e6)
        config_manager.apply_overrides({"runtime.threads": 1})
        serial = mass_curve(cfg).mass_values
        config_manager.apply_overrides({"runtime.threads": 4})
        parallel = mass_curve(cfg).mass_values
        assert np.array_equal(serial, parallel)

    def test_default_grid_stays_inside(self):
        cfg = TrapConfig(r0=0.5, eps=0.01, omega=1e4)
        curve = mass_curve(cfg)
        assert curve.r0_samples[0] > 0
        assert curve.r0_samples[-1] < 1 - cfg.eps


class TestOptimalRadius:
    """Test cases for optimal_radius and its curves."""

    def test_fast_regime(self):
        result = optimal_radius(1e9, 1e-3)
        assert isinstance(result, OptimumResult)
        assert result.regime_tag is RegimeTag.FAST
        assert result.r0_opt == pytest.approx(fast_regime_optimal_radius(1e-3))
        assert result.r0_opt == pytest.approx(1 / math.sqrt(2) - 2.5e-4, abs=1e-5)
        assert result.omega == 1e9 and result.eps == 1e-3

    def test_static_centre(self, coarse_scan):
        result = optimal_radius(1e-6, 0.01)
        assert result.regime_tag is RegimeTag.SERIES
        assert result.r0_opt == 0.0

    def test_centre_loses_above_critical(self, coarse_scan):
        result = optimal_radius(5.0, 1e-3)
        assert result.regime_tag is RegimeTag.SERIES
        assert result.r0_opt > 0.05
        assert all(result.mass_at_opt <= m for _, m in result.competing_minima)

    def test_centre_optimal_below_critical(self, coarse_scan):
        result = optimal_radius(2.0, 1e-3)
        assert result.r0_opt == 0.0

    def test_ring_optimal_just_above_critical(self, coarse_scan):
        result = optimal_radius(3.5, 1e-3)
        assert result.regime_tag is RegimeTag.SERIES
        assert result.r0_opt > 0.2

    def test_failure_is_logged(self, mocker):
        exception = mocker.patch("rotating_trap.core.optimizer.logger.exception")
        with pytest.raises(NoValidRegimeError):
            optimal_radius(1.0, 0.5)
        exception.assert_called_once()

    def test_curve_rejects_bad_grid(self):
        with pytest.raises(UsageError):
            optimal_radius_curve([2.0, 1.0], 0.01)
        with pytest.raises(UsageError):
            optimal_radius_curve([0.0, 1.0], 0.01)

    def test_curve_in_fast_regime(self):
        results = optimal_radius_curve([1e8, 1e9], 1e-3)
        assert [r.regime_tag for r in results] == [RegimeTag.FAST] * 2
        assert exchange_points(results) == []

    def test_speed_curve_fast(self):
        results = optimal_radius_vs_speed([1e6], 1e-3)
        assert results[0].speed == 1e6
        assert results[0].regime_tag is RegimeTag.FAST
        assert results[0].r0_opt == pytest.approx(1 / math.sqrt(2), abs=1e-3)

    def test_speed_curve_rejects_nonpositive(self):
        with pytest.raises(UsageError):
            optimal_radius_vs_speed([-1.0], 1e-3)


@pytest.mark.slow
class TestBranchExchange:
    """Global minimum switching between competing branches at eps = 1e-3."""

    def test_near_wall_branch_loses_between_unit_and_three_halves(self):
        results = optimal_radius_curve([1000.0, 1250.0, 1500.0], 1e-3)
        assert results[0].r0_opt > 0.95
        assert results[-1].r0_opt < 0.92
        assert results[-1].competing_minima
        assert exchange_points(results, jump=0.05) == [(1250.0, 1500.0)]

    def test_scale_invariance(self):
        first = optimal_radius(4000.0, 1e-3)
        second = optimal_radius(800.0, 5e-3)
        assert first.regime_tag is RegimeTag.TRANSITION
        assert second.regime_tag is RegimeTag.TRANSITION
        assert abs(first.r0_opt - second.r0_opt) < 1e-3

    def test_speed_maximum_and_jump(self):
        results = optimal_radius_vs_speed([38.0, 39.0, 40.0], 1e-3)
        radii = [r.r0_opt for r in results]
        assert max(radii) == pytest.approx(0.85, abs=0.03)
        assert radii[1] - radii[2] > 0.1
        assert exchange_points(results) == [(39.0, 40.0)]


class TestExchangePoints:
    """Test cases for exchange_points."""

    @staticmethod
    def _result(omega, r0, speed=None):
        return OptimumResult(
            r0_opt=r0,
            mass_at_opt=1.0,
            regime_tag=RegimeTag.SERIES,
            omega=omega,
            speed=speed,
        )

    def test_jump_detected(self):
        results = [self._result(w, r) for w, r in [(1, 0.0), (2, 0.02), (3, 0.6)]]
        assert exchange_points(results) == [(2.0, 3.0)]

    def test_speed_keys(self):
        results = [self._result(None, 0.2, 5.0), self._result(None, 0.7, 6.0)]
        assert exchange_points(results) == [(5.0, 6.0)]

    def test_smooth_curve(self):
        results = [self._result(w, 0.01 * w) for w in range(1, 6)]
        assert exchange_points(results) == []
