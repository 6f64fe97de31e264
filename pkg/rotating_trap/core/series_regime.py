"""
Fourier-Bessel solution for omega = O(1).

The rotating-frame Neumann Green's function of the unit disk is expanded in
angular modes e^{i m theta} R_m(r). Each radial mode is a combination of
I_m and K_m at the complex argument c_m r, evaluated as exponentially
scaled products (or through the uniform large-order expansions) so that
nothing overflows for large sqrt(omega m).

Mode sums stop adaptively. On the trap ring the coefficients decay only
algebraically, so the known large-m behaviour of the coefficients is
subtracted before testing for convergence and resummed in closed form.
"""

import math
import time
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from rotating_trap.core.models import SeriesTruncation, TrapConfig
from rotating_trap.core.reference_solutions import static_green_regular
from rotating_trap.core.special_functions import log_bessel_uniform, scaled_prime_pair
from rotating_trap.utils.config import get_config
from rotating_trap.utils.errors import DomainError, SingularPointError
from rotating_trap.utils.logger import get_logger, get_performance_logger

logger = get_logger("series_regime", {"component": "series_regime"})
performance = get_performance_logger("series_regime")

TWO_PI = 2.0 * math.pi
BLOCK_MODES = 32
EPS_OMEGA_WARN = 0.1


def truncation_from_config() -> SeriesTruncation:
    """Series truncation from the ``series`` configuration section."""
    return SeriesTruncation(**get_config().series.model_dump())


def c_m(omega: float, m: int) -> complex:
    """Mode argument c_m = -i sqrt(i omega m) = e^{-i pi/4} sqrt(omega m).

    The principal square root gives Re c_m > 0, so K_m(c_m r) decays.
    omega = 0 is the degenerate (static) mode and returns 0.
    """
    if m < 1:
        raise DomainError(f"mode index must be >= 1, got {m}")
    if omega < 0:
        raise DomainError("omega must be nonnegative")
    if omega == 0:
        logger.debug("Degenerate mode argument", m=m)
        return 0j
    return -1j * np.sqrt(1j * omega * m)


def _mode_arguments(omega: float, orders: np.ndarray) -> np.ndarray:
    return -1j * np.sqrt(1j * omega * orders.astype(float))


def _debye_modes(
    orders: np.ndarray, c: np.ndarray, r_g: float, r_l: float
) -> np.ndarray:
    log_i_l, _, _, _ = log_bessel_uniform(orders, c * r_l)
    log_i_g, log_k_g, _, _ = log_bessel_uniform(orders, c * r_g)
    _, _, log_ip, log_kp = log_bessel_uniform(orders, c)
    direct = np.exp(log_k_g + log_i_l)
    reflected = np.exp(log_kp - log_ip + log_i_g + log_i_l)
    return (direct - reflected) / TWO_PI


def radial_modes(
    orders, r: float, r0: float, omega: float, debye_order: int = 150
) -> np.ndarray:
    """R_m(r) for an array of orders m >= 1.

    R_m(r) = [K_m(c r_>) - K'_m(c)/I'_m(c) I_m(c r_>)] I_m(c r_<) / (2 pi)
    with r_> = max(r, r0) and r_< = min(r, r0).
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=np.int64))
    if np.any(orders < 1):
        raise DomainError("radial_modes needs orders >= 1")
    if omega <= 0:
        raise DomainError("radial_modes needs omega > 0")
    r_g, r_l = max(r, r0), min(r, r0)
    out = np.zeros(orders.shape, dtype=complex)
    if r_l == 0.0:
        return out

    c = _mode_arguments(omega, orders)
    a = c.real
    low = orders < debye_order
    if np.any(low):
        m, cl, al = orders[low], c[low], a[low]
        with np.errstate(all="ignore"):
            ke_g = special.kve(m, cl * r_g)
            ie_g = special.ive(m, cl * r_g)
            ie_l = special.ive(m, cl * r_l)
            ip_e, kp_e = scaled_prime_pair(m, cl)
            direct = ke_g * ie_l * np.exp(-cl * r_g + al * r_l)
            reflected = (
                (kp_e / ip_e) * ie_g * ie_l * np.exp(-cl - al + al * (r_g + r_l))
            )
            values = (direct - reflected) / TWO_PI
        # Underflowed I or overflowed K at small arguments and large m.
        bad = ~np.isfinite(values) | (ie_l == 0) | (ip_e == 0)
        if np.any(bad):
            values[bad] = _debye_modes(m[bad], cl[bad], r_g, r_l)
        out[low] = values
    high = ~low
    if np.any(high):
        out[high] = _debye_modes(orders[high], c[high], r_g, r_l)
    return out


def radial_mode(r: float, r0: float, omega: float, m: int) -> complex:
    """Radial mode R_m(r) of the Green's function, m >= 0."""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got {r}")
    if not 0.0 < r0 < 1.0:
        raise DomainError(f"r0 must lie in (0, 1), got {r0}")
    if m < 0:
        raise DomainError("mode index must be nonnegative")
    if m == 0:
        return complex(_zero_mode(r, r0))
    return complex(radial_modes([m], r, r0, omega)[0])


def _zero_mode(r, r0: float):
    r = np.asarray(r, dtype=float)
    a0 = (2.0 * r0**2 - 3.0) / (8.0 * math.pi)
    with np.errstate(divide="ignore"):
        log_term = np.log(np.maximum(r, r0))
    return r**2 / (4.0 * math.pi) + a0 - log_term / TWO_PI


def _ring_tail_terms(orders: np.ndarray, beta: float) -> np.ndarray:
    """Large-m real part of R_m(r0) - 1/(4 pi m), beta = omega r0^2."""
    m = orders.astype(float)
    return (
        -(3.0 * beta**2 / 8.0) / m**3
        + (35.0 * beta**4 / 128.0 - 15.0 * beta**2 / 8.0) / m**5
    ) / (4.0 * math.pi)


def _ring_tail_remainder(last: int, beta: float) -> float:
    """Closed-form sum of the ring tail terms over m > last."""
    z3 = special.zeta(3.0, last + 1.0)
    z5 = special.zeta(5.0, last + 1.0)
    cubic = -(3.0 * beta**2 / 8.0) * z3
    quintic = (35.0 * beta**4 / 128.0 - 15.0 * beta**2 / 8.0) * z5
    return float((cubic + quintic) / (4.0 * math.pi))


def _mode_coefficients(
    r: float,
    r0: float,
    omega: float,
    trunc: SeriesTruncation,
    real_only: bool = False,
) -> Tuple[np.ndarray, float, bool]:
    """Coefficients d_m = R_m(r) - q^m / (4 pi m) for m = 1..M.

    Returns the coefficients, the closed-form remainder of the real ring
    tail beyond M (zero off the ring), and whether the adaptive stop fired.
    With real_only the stop looks at Re d_m alone, which is all that the
    theta = 0 sum needs.
    """
    on_ring = r == r0
    q = min(r, r0) / max(r, r0)
    beta = omega * r0**2
    coefficients = []
    scale = 1.0
    partial = 0.0
    run = 0
    start = 1
    converged = False
    while start <= trunc.m_max and not converged:
        stop = min(start + BLOCK_MODES, trunc.m_max + 1)
        orders = np.arange(start, stop, dtype=np.int64)
        block = radial_modes(orders, r, r0, omega, trunc.debye_order)
        block = block - q**orders / (4.0 * math.pi * orders)
        tail = _ring_tail_terms(orders, beta) if on_ring else np.zeros(orders.size)
        for index, (value, expected) in enumerate(zip(block, tail)):
            partial += 2.0 * value.real
            scale = max(1.0, abs(partial))
            size = abs(value.real - expected)
            if not real_only:
                size += abs(value.imag)
            if size < trunc.tail_tol * scale:
                run += 1
            else:
                run = 0
            if run >= trunc.consecutive_small:
                coefficients.append(block[: index + 1])
                converged = True
                break
        else:
            coefficients.append(block)
        start = stop

    coeffs = np.concatenate(coefficients) if coefficients else np.zeros(0, complex)
    last = coeffs.size
    if not converged:
        # Off the theta = 0 axis the ring coefficients decay like 1/m^2 in
        # their imaginary part; that is expected and logged quietly.
        log = logger.warning if real_only or not on_ring else logger.debug
        log(
            "Mode sum not converged at m_max; continuing with uniform expansions",
            m_max=trunc.m_max,
            r=r,
            r0=r0,
            omega=omega,
        )
        if on_ring:
            n_tail = int(min(trunc.tail_modes, max(8.0 * beta, 4.0 * trunc.m_max)))
            if n_tail > last:
                orders = np.arange(last + 1, n_tail + 1, dtype=np.int64)
                extra = radial_modes(orders, r, r0, omega, trunc.debye_order)
                coeffs = np.concatenate(
                    [coeffs, extra - 1.0 / (4.0 * math.pi * orders)]
                )
                last = coeffs.size
    remainder = 2.0 * _ring_tail_remainder(last, beta) if on_ring else 0.0
    return coeffs, remainder, converged


def regular_part(
    r0: float, omega: float, trunc: Optional[SeriesTruncation] = None
) -> float:
    """Regular part R(x0; x0) of the rotating Green's function at the trap."""
    trunc = trunc or truncation_from_config()
    if not 0.0 <= r0 < 1.0:
        raise DomainError(f"r0 must lie in [0, 1), got {r0}")
    if omega < 0:
        raise DomainError("omega must be nonnegative")
    if r0 == 0.0 or omega == 0.0:
        # A centred or stationary trap sees the static Neumann function.
        return static_green_regular(r0)

    started = time.perf_counter()
    coeffs, remainder, converged = _mode_coefficients(
        r0, r0, omega, trunc, real_only=True
    )
    value = (
        r0**2 / TWO_PI
        - 3.0 / (8.0 * math.pi)
        + 2.0 * float(np.sum(coeffs.real))
        + remainder
    )
    performance.log_solver_summary(
        "regular_part",
        size=int(coeffs.size),
        residual=abs(remainder),
        converged=converged,
        r0=r0,
        omega=omega,
        duration_seconds=time.perf_counter() - started,
    )
    return value


def _check_point(r: float, theta: float, r0: float) -> None:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got {r}")
    if r == r0 and math.isclose(math.remainder(theta, TWO_PI), 0.0, abs_tol=1e-14):
        raise SingularPointError("Green's function evaluated at the trap centre")


def green_function(
    r,
    theta,
    r0: float,
    omega: float,
    trunc: Optional[SeriesTruncation] = None,
):
    """Rotating-frame Neumann Green's function G(x; x0), x0 = (r0, 0).

    Accepts scalars or broadcastable arrays of r and theta. Mode sums are
    computed once per distinct radius.
    """
    trunc = trunc or truncation_from_config()
    if not 0.0 < r0 < 1.0:
        raise DomainError(f"r0 must lie in (0, 1), got {r0}")
    if omega <= 0:
        raise DomainError("green_function needs omega > 0")
    rr, tt = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    flat_r, flat_t = rr.ravel(), tt.ravel()
    for radius, angle in zip(flat_r, flat_t):
        _check_point(float(radius), float(angle), r0)

    result = np.empty(flat_r.shape, dtype=float)
    for radius in np.unique(flat_r):
        mask = flat_r == radius
        angles = flat_t[mask]
        q = min(radius, r0) / max(radius, r0)
        coeffs, _, _ = _mode_coefficients(float(radius), r0, omega, trunc)
        orders = np.arange(1, coeffs.size + 1)
        phases = np.exp(1j * np.outer(angles, orders))
        modes = 2.0 * (phases @ coeffs).real
        log_part = np.log(np.abs(1.0 - q * np.exp(1j * angles))) / TWO_PI
        result[mask] = _zero_mode(radius, r0) - log_part + modes
    result = result.reshape(rr.shape)
    return float(result) if result.ndim == 0 else result


def matching_h_series(
    cfg: TrapConfig, trunc: Optional[SeriesTruncation] = None
) -> float:
    """Matching constant H = pi R(x0; x0) - log(eps) / 2."""
    if cfg.omega0 > EPS_OMEGA_WARN:
        logger.warning(
            "eps * omega is not small; the series regime may be inaccurate",
            eps_omega=cfg.omega0,
        )
    return math.pi * regular_part(cfg.r0, cfg.omega, trunc) - 0.5 * math.log(cfg.eps)


def mass_series(cfg: TrapConfig, trunc: Optional[SeriesTruncation] = None) -> float:
    """Asymptotic mass M(r0; omega) = pi H."""
    try:
        return math.pi * matching_h_series(cfg, trunc)
    except DomainError:
        raise
    except Exception:
        logger.exception("mass_series failed", r0=cfg.r0, omega=cfg.omega, eps=cfg.eps)
        raise


def mass_derivative_series(
    cfg: TrapConfig, trunc: Optional[SeriesTruncation] = None, step: float = 1e-4
) -> float:
    """dM/dr0 by centred differences at fixed omega and eps."""
    lo = max(cfg.r0 - step, 0.0)
    hi = min(cfg.r0 + step, 1.0 - cfg.eps - 1e-12)
    if hi <= lo:
        raise DomainError("no room for a centred difference")
    upper = mass_series(cfg.with_r0(hi), trunc)
    lower = mass_series(cfg.with_r0(lo), trunc)
    return (upper - lower) / (hi - lo)


def field_u(
    r,
    theta,
    cfg: TrapConfig,
    trunc: Optional[SeriesTruncation] = None,
    h: Optional[float] = None,
):
    """Outer field u = -pi G + H, valid outside the trap disk."""
    rr, tt = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    distance = np.sqrt(rr**2 + cfg.r0**2 - 2.0 * rr * cfg.r0 * np.cos(tt))
    if np.any(distance < cfg.eps):
        if np.any(distance == 0.0):
            raise SingularPointError("field evaluated at the trap centre")
        raise DomainError("field_u is only defined outside the trap disk")
    if h is None:
        h = matching_h_series(cfg, trunc)
    green = green_function(rr, tt, cfg.r0, cfg.omega, trunc)
    values = -math.pi * np.asarray(green) + h
    return float(values) if values.ndim == 0 else values


def field_grid(
    radii,
    angles,
    cfg: TrapConfig,
    trunc: Optional[SeriesTruncation] = None,
) -> pd.DataFrame:
    """Field on a polar grid as rows (r, theta, u); NaN inside the trap."""
    rr, tt = np.meshgrid(
        np.asarray(radii, float), np.asarray(angles, float), indexing="ij"
    )
    rr, tt = rr.ravel(), tt.ravel()
    distance = np.sqrt(rr**2 + cfg.r0**2 - 2.0 * rr * cfg.r0 * np.cos(tt))
    outside = distance >= cfg.eps
    u = np.full(rr.shape, np.nan)
    if np.any(outside):
        h = matching_h_series(cfg, trunc)
        u[outside] = field_u(rr[outside], tt[outside], cfg, trunc, h=h)
    return pd.DataFrame({"r": rr, "theta": tt, "u": u})
