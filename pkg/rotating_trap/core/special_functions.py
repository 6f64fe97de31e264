"""
Modified Bessel functions of integer order and complex argument.

Production values come from the AMOS routines wrapped by scipy.special.
Large-order mode sums use the uniform (Debye) asymptotic expansions in
logarithmic form so that products like K_m(z1) I_m(z2) never overflow.
The ascending series are kept as an independent verification path.
"""

import math
from typing import Tuple, Union

import numpy as np
from scipy import special

from rotating_trap.utils.errors import (
    BesselOverflowError,
    BranchAmbiguityError,
    DomainError,
)

EULER_GAMMA = float(np.euler_gamma)

ArrayLike = Union[complex, float, np.ndarray]


def _check_order(order) -> np.ndarray:
    orders = np.asarray(order)
    if not np.issubdtype(orders.dtype, np.integer):
        if np.any(orders != np.round(orders)):
            raise DomainError(f"order must be an integer, got {order!r}")
        orders = orders.astype(np.int64)
    if np.any(orders < 0):
        raise DomainError(f"order must be nonnegative, got {order!r}")
    return orders


def _check_argument(z) -> np.ndarray:
    values = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise DomainError("Bessel argument must be finite")
    return values


def _finish(values: np.ndarray, name: str, order, z) -> ArrayLike:
    if not np.all(np.isfinite(values)):
        raise BesselOverflowError(
            f"{name}({order!r}, {z!r}) is outside the representable range; "
            "use the scaled variants"
        )
    if values.ndim == 0:
        return complex(values)
    return values


def _check_k_argument(z) -> np.ndarray:
    values = _check_argument(z)
    if np.any(values == 0):
        raise DomainError("K_m is singular at z = 0")
    if np.any(values.real < 0):
        raise BranchAmbiguityError("K_m requested with Re z < 0")
    return values


def bessel_i(order, z) -> ArrayLike:
    """I_order(z) for integer order >= 0."""
    orders = _check_order(order)
    values = _check_argument(z)
    return _finish(special.iv(orders, values), "I", order, z)


def bessel_k(order, z) -> ArrayLike:
    """K_order(z) on the principal branch, Re z >= 0, z != 0."""
    orders = _check_order(order)
    values = _check_k_argument(z)
    return _finish(special.kv(orders, values), "K", order, z)


def bessel_ie(order, z) -> ArrayLike:
    """Scaled I: I_order(z) exp(-|Re z|)."""
    orders = _check_order(order)
    values = _check_argument(z)
    return _finish(special.ive(orders, values), "Ie", order, z)


def bessel_ke(order, z) -> ArrayLike:
    """Scaled K: K_order(z) exp(z)."""
    orders = _check_order(order)
    values = _check_k_argument(z)
    return _finish(special.kve(orders, values), "Ke", order, z)


def bessel_prime_pair(order, z) -> Tuple[ArrayLike, ArrayLike]:
    """(I'_order(z), K'_order(z)) from the two-term recurrences.

    I'_m = (I_{m-1} + I_{m+1}) / 2 and K'_m = -(K_{m-1} + K_{m+1}) / 2 with
    I_{-1} = I_1, K_{-1} = K_1, which gives I'_0 = I_1 and K'_0 = -K_1.
    """
    orders = _check_order(order)
    lower = np.abs(orders - 1)
    upper = orders + 1
    values = _check_k_argument(z)
    i_prime = 0.5 * (special.iv(lower, values) + special.iv(upper, values))
    k_prime = -0.5 * (special.kv(lower, values) + special.kv(upper, values))
    return (
        _finish(np.asarray(i_prime), "I'", order, z),
        _finish(np.asarray(k_prime), "K'", order, z),
    )


def scaled_prime_pair(order, z) -> Tuple[np.ndarray, np.ndarray]:
    """Scaled derivatives: I'_m(z) exp(-|Re z|) and K'_m(z) exp(z)."""
    orders = _check_order(order)
    lower = np.abs(orders - 1)
    upper = orders + 1
    values = _check_k_argument(z)
    i_prime = 0.5 * (special.ive(lower, values) + special.ive(upper, values))
    k_prime = -0.5 * (special.kve(lower, values) + special.kve(upper, values))
    return i_prime, k_prime


def digamma_integer(n: int) -> float:
    """psi(n) for a positive integer n; psi(1) = -gamma."""
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"digamma_integer needs an integer, got {n!r}")
    if n < 1:
        raise DomainError(f"digamma_integer needs n >= 1, got {n}")
    return float(special.digamma(int(n)))


def bessel_i_series(order: int, z: complex, max_terms: int = 400) -> complex:
    """Ascending series for I_order(z); accurate for moderate |z|."""
    _check_order(order)
    z = complex(z)
    half = z / 2
    term = half**order / math.factorial(order)
    total = term
    quarter = half * half
    for k in range(1, max_terms):
        term *= quarter / (k * (k + order))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def bessel_k_series(order: int, z: complex, max_terms: int = 400) -> complex:
    """Ascending series for K_order(z), integer order, principal log.

    Uses the standard integer-order form with digamma coefficients.
    Cancellation limits it to |z| of order ten.
    """
    _check_order(order)
    z = complex(z)
    if z == 0:
        raise DomainError("K_m is singular at z = 0")
    half = z / 2
    quarter = half * half

    finite_part = 0j
    if order > 0:
        for k in range(order):
            finite_part += (
                math.factorial(order - k - 1) / math.factorial(k) * (-quarter) ** k
            )
        finite_part *= 0.5 * half ** (-order)

    log_part = (-1) ** (order + 1) * np.log(half) * bessel_i_series(order, z)

    term = half**order / math.factorial(order)
    series = term * (digamma_integer(1) + digamma_integer(order + 1))
    for k in range(1, max_terms):
        term *= quarter / (k * (k + order))
        contribution = term * (
            digamma_integer(k + 1) + digamma_integer(order + k + 1)
        )
        series += contribution
        if abs(contribution) <= 1e-17 * abs(series):
            break
    return finite_part + log_part + (-1) ** order * 0.5 * series


def _debye_u(p: np.ndarray) -> Tuple[np.ndarray, ...]:
    p2 = p * p
    u1 = p * (3.0 - 5.0 * p2) / 24.0
    u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0
    u3 = (
        p**3
        * (30375.0 - 369603.0 * p2 + 765765.0 * p2**2 - 425425.0 * p2**3)
        / 414720.0
    )
    u4 = (
        p2**2
        * (
            4465125.0
            - 94121676.0 * p2
            + 349922430.0 * p2**2
            - 446185740.0 * p2**3
            + 185910725.0 * p2**4
        )
        / 39813120.0
    )
    return u1, u2, u3, u4


def _debye_v(p: np.ndarray) -> Tuple[np.ndarray, ...]:
    p2 = p * p
    v1 = p * (-9.0 + 7.0 * p2) / 24.0
    v2 = p2 * (-135.0 + 594.0 * p2 - 455.0 * p2 * p2) / 1152.0
    v3 = (
        p**3
        * (-118125.0 + 1063611.0 * p2 - 1961559.0 * p2**2 + 1012725.0 * p2**3)
        / 414720.0
    )
    return v1, v2, v3


def log_bessel_uniform(
    order, z
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Complex logarithms of I_m(z), K_m(z), I'_m(z), K'_m(z) for large m.

    Uniform large-order expansions, valid for |arg z| < pi/2. Relative
    accuracy is O(m**-5) for I and K and O(m**-4) for the derivatives.
    Only the real parts and the values modulo 2*pi*i are meaningful.
    """
    nu = np.asarray(order, dtype=float)
    if np.any(nu < 1):
        raise DomainError("uniform expansions need order >= 1")
    values = np.asarray(z, dtype=complex)
    if np.any(values.real <= 0):
        raise BranchAmbiguityError("uniform expansions need Re z > 0")

    w = values / nu
    root = np.sqrt(1.0 + w * w)
    eta = root + np.log(w / (1.0 + root))
    p = 1.0 / root

    u1, u2, u3, u4 = _debye_u(p)
    v1, v2, v3 = _debye_v(p)
    inv = 1.0 / nu
    sum_i = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)))
    sum_k = 1.0 + inv * (-u1 + inv * (u2 + inv * (-u3 + inv * u4)))
    sum_ip = 1.0 + inv * (v1 + inv * (v2 + inv * v3))
    sum_kp = 1.0 + inv * (-v1 + inv * (v2 - inv * v3))

    log_root = np.log(root)
    log_w = np.log(w)
    growth = nu * eta
    log_pref_i = -0.5 * np.log(2.0 * np.pi * nu)
    log_pref_k = 0.5 * np.log(np.pi / (2.0 * nu))

    log_i = growth + log_pref_i - 0.5 * log_root + np.log(sum_i)
    log_k = -growth + log_pref_k - 0.5 * log_root + np.log(sum_k)
    log_ip = growth + log_pref_i + 0.5 * log_root - log_w + np.log(sum_ip)
    log_kp = -growth + log_pref_k + 0.5 * log_root - log_w + np.log(-sum_kp)
    return log_i, log_k, log_ip, log_kp
