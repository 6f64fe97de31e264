"""
Small-r0 behaviour of the series-regime mass.

Near the centre the mass behaves like const + pi a2(omega) r0^2. The centre
stops being the optimum when a2 changes sign, at the critical angular
velocity omega_c.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from rotating_trap.core.models import SeriesTruncation, TrapConfig
from rotating_trap.core.series_regime import c_m, mass_series
from rotating_trap.core.special_functions import EULER_GAMMA, scaled_prime_pair
from rotating_trap.utils.errors import DomainError, NoSignChangeError
from rotating_trap.utils.logger import get_logger

logger = get_logger("bifurcation", {"component": "bifurcation"})


def _first_mode_bracket(omega: float, log_arg: complex) -> complex:
    c1 = c_m(omega, 1)
    ip_e, kp_e = scaled_prime_pair(1, c1)
    ratio = complex(kp_e / ip_e) * np.exp(-c1 - abs(c1.real))
    return (c1 * c1 / 8.0) * (
        -0.25 - np.log(log_arg) + ratio + 0.5 * (1.0 - 2.0 * EULER_GAMMA)
    )


def a2(omega: float, r0: Optional[float] = None) -> float:
    """Quadratic coefficient of the small-r0 expansion of pi R + 3/8.

    Passing r0 keeps log(c1 r0 / 2) in the bracket; the result is the same
    because c1^2 is purely imaginary.
    """
    if omega <= 0:
        raise DomainError("a2 needs omega > 0")
    c1 = c_m(omega, 1)
    log_arg = c1 / 2.0 if r0 is None else c1 * r0 / 2.0
    return 0.5 - 2.0 * _first_mode_bracket(omega, log_arg).real


def critical_omega(
    bracket: Tuple[float, float] = (2.0, 4.0), tol: float = 1e-10
) -> float:
    """Root of a2 on the bracket by bisection."""
    lo, hi = bracket
    f_lo, f_hi = a2(lo), a2(hi)
    if f_lo * f_hi > 0:
        raise NoSignChangeError(
            f"a2 does not change sign on [{lo}, {hi}]: a2 = {f_lo:.4g}, {f_hi:.4g}"
        )
    root = optimize.bisect(a2, lo, hi, xtol=tol)
    logger.info("Critical angular velocity found", omega_c=root, bracket=bracket)
    return float(root)


def small_r0_mode_terms(r0: float, omega: float, m_max: int = 50) -> np.ndarray:
    """O(r0^2) parts of pi (R_m(r0) - 1/(4 pi m)) for m = 1..m_max.

    Only the first entry has a nonzero real part.
    """
    if m_max < 1:
        raise DomainError("m_max must be at least 1")
    terms = np.empty(m_max, dtype=complex)
    c1 = c_m(omega, 1)
    terms[0] = -(r0**2) * _first_mode_bracket(omega, c1 * r0 / 2.0)
    orders = np.arange(2, m_max + 1)
    c_sq = -1j * omega * orders
    terms[1:] = -c_sq * r0**2 / (8.0 * orders * (orders**2 - 1.0))
    return terms


def small_r0_mass_coefficient_series(
    r0: float, omega: float, m_max: int = 50
) -> float:
    """S = pi R + 3/8 from the small-r0 mode expansion, approximately a2 r0^2."""
    if r0 <= 0:
        raise DomainError("r0 must be positive")
    terms = small_r0_mode_terms(r0, omega, m_max)
    return r0**2 / 2.0 + 2.0 * float(np.sum(terms).real)


def small_r0_curvature(
    omega: float,
    eps: float,
    r0_values: Optional[Sequence[float]] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> float:
    """Coefficient of r0^2 in a quadratic fit of mass_series near the centre."""
    if r0_values is None:
        r0_values = np.linspace(1e-3, 5e-2, 12)
    r0_values = np.asarray(r0_values, dtype=float)
    masses = np.array(
        [mass_series(TrapConfig(r0=r, eps=eps, omega=omega), trunc) for r in r0_values]
    )
    coefficients = np.polyfit(r0_values, masses, 2)
    curvature = float(coefficients[0])
    logger.debug(
        "Small-r0 curvature",
        omega=omega,
        eps=eps,
        curvature=curvature,
        expected=math.pi * a2(omega),
    )
    return curvature
