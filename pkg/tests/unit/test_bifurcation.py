"""Unit tests for the small-r0 expansion and the critical angular velocity."""

import math

import numpy as np
import pytest

from rotating_trap.core.bifurcation import (
    a2,
    critical_omega,
    small_r0_curvature,
    small_r0_mass_coefficient_series,
    small_r0_mode_terms,
)
from rotating_trap.core.models import TrapConfig
from rotating_trap.core.series_regime import mass_series
from rotating_trap.utils.errors import DomainError, NoSignChangeError


class TestQuadraticCoefficient:
    """Test cases for a2(omega)."""

    def test_positive_below_critical(self):
        assert a2(2.0) > 0

    def test_negative_above_critical(self):
        assert a2(3.5) < 0

    def test_static_limit(self):
        """a2 -> 1 as omega -> 0, the static Neumann value."""
        assert a2(1e-6) == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("r0", [1e-3, 0.05, 0.3])
    def test_log_argument_does_not_matter(self, r0):
        """c1^2 is purely imaginary, so log(r0) drops out of the real part."""
        assert a2(2.5, r0) == pytest.approx(a2(2.5), abs=1e-12)

    def test_rejects_nonpositive_omega(self):
        with pytest.raises(DomainError):
            a2(0.0)


class TestCriticalOmega:
    """Test cases for the root of a2."""

    def test_value(self):
        assert critical_omega() == pytest.approx(3.026, abs=5e-3)

    def test_root(self):
        assert abs(a2(critical_omega())) < 1e-8

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            critical_omega(bracket=(0.5, 1.0))


class TestModeTerms:
    """Test cases for the O(r0^2) mode expansion."""

    def test_only_first_mode_is_real(self):
        terms = small_r0_mode_terms(0.05, 3.0, m_max=30)
        assert terms[0].real != 0.0
        assert np.all(terms[1:].real == 0.0)

    def test_series_reproduces_a2(self):
        r0 = 0.02
        value = small_r0_mass_coefficient_series(r0, 2.0)
        assert value == pytest.approx(a2(2.0) * r0**2, rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            small_r0_mode_terms(0.1, 1.0, m_max=0)
        with pytest.raises(DomainError):
            small_r0_mass_coefficient_series(0.0, 1.0)


class TestCurvature:
    """Test cases comparing the expansion with the full mode sum."""

    @pytest.mark.parametrize("omega", [2.0, 3.5])
    def test_fit_matches_expansion(self, omega):
        curvature = small_r0_curvature(omega, eps=0.01)
        expected = math.pi * a2(omega)
        assert np.sign(curvature) == np.sign(expected)
        assert curvature == pytest.approx(expected, rel=0.1)

    def test_mass_difference(self):
        """M(r0) - M(0) is pi a2 r0^2 to leading order."""
        omega, eps, r0 = 2.0, 0.01, 0.02
        centre = mass_series(TrapConfig(r0=0.0, eps=eps, omega=omega))
        ring = mass_series(TrapConfig(r0=r0, eps=eps, omega=omega))
        assert (ring - centre) / (math.pi * r0**2) == pytest.approx(a2(omega), rel=0.05)
