"""
Boundary-layer composite for 1 << omega << 1/eps.

The Green's function is an outer radially symmetric part plus an elliptic
layer around the trap and a parabolic wake along the ring behind it, with
their common part subtracted once.
"""

import math
from typing import Optional

import numpy as np
from scipy import special

from rotating_trap.core.models import TrapConfig
from rotating_trap.core.special_functions import EULER_GAMMA
from rotating_trap.utils.config import get_config
from rotating_trap.utils.errors import DomainError, SingularPointError
from rotating_trap.utils.logger import get_logger

logger = get_logger("large_omega", {"component": "large_omega"})

TWO_PI = 2.0 * math.pi


def _heaviside(values: np.ndarray) -> np.ndarray:
    return np.heaviside(values, 0.5)


def h_hat(r0: float) -> float:
    """Constant that makes the composite Green's function mean-zero."""
    return -(-(r0**2) / 2.0 + 3.0 / 8.0 + 0.5 * math.log(r0)) / math.pi


def composite_green(r, theta, r0: float, omega: float):
    """Composite Green's function for a trap at (r0, 0), theta in [0, 2 pi)."""
    if not 0.0 < r0 < 1.0:
        raise DomainError(f"r0 must lie in (0, 1), got {r0}")
    if omega <= 0:
        raise DomainError("composite_green needs omega > 0")
    rr, tt = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    tt = np.mod(tt, TWO_PI)
    if np.any((rr == r0) & (tt == 0.0)):
        raise SingularPointError("composite Green's function at the trap centre")
    if np.any((rr < 0.0) | (rr > 1.0)):
        raise DomainError("r must lie in [0, 1]")

    xi = omega * (rr * np.cos(tt) - r0)
    eta = omega * rr * np.sin(tt)
    rho = np.hypot(xi, eta)
    z = 0.5 * r0 * rho
    elliptic = special.k0e(z) * np.exp(-z - 0.5 * r0 * eta) / TWO_PI

    wake_angle = TWO_PI - tt
    parabolic = np.exp(-omega * (rr - r0) ** 2 / (4.0 * wake_angle)) / (
        2.0 * r0 * np.sqrt(math.pi * omega * wake_angle)
    )

    behind = eta < 0.0
    common = np.zeros(rr.shape)
    abs_eta = np.abs(eta[behind])
    common[behind] = np.exp(-r0 * xi[behind] ** 2 / (4.0 * abs_eta)) / (
        2.0 * np.sqrt(math.pi * r0 * abs_eta)
    )

    with np.errstate(divide="ignore"):
        log_ratio = np.where(rr > 0.0, np.log(np.maximum(rr, 1e-300) / r0), 0.0)
    outer = (rr**2 - r0**2) / (4.0 * math.pi) - _heaviside(rr - r0) * log_ratio / TWO_PI

    values = outer + elliptic + parabolic - common + h_hat(r0)
    return float(values) if values.ndim == 0 else values


def near_trap_green(distance, r0: float, omega: float):
    """Logarithmic asymptote of the composite close to the trap centre."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0.0):
        raise SingularPointError("distance to the trap must be positive")
    values = (
        -np.log(distance) / TWO_PI
        - (math.log(r0 * omega / 4.0) + EULER_GAMMA) / TWO_PI
        + h_hat(r0)
    )
    return float(values) if values.ndim == 0 else values


def _check_validity(cfg: TrapConfig) -> None:
    dispatch = get_config().dispatch
    if cfg.omega0 > dispatch.large_omega_eps_omega_warn:
        logger.warning(
            "eps * omega is not small; large-omega composite is leaving its range",
            eps_omega=cfg.omega0,
        )
    if cfg.speed < dispatch.large_omega_min_speed:
        logger.warning(
            "r0 * omega is not large; boundary layers are not thin",
            speed=cfg.speed,
            threshold=dispatch.large_omega_min_speed,
        )


def matching_h(cfg: TrapConfig) -> float:
    """Matching constant H = pi H_hat - (log(r0 omega eps / 4) + gamma) / 2."""
    if cfg.r0 <= 0.0 or cfg.omega <= 0.0:
        raise DomainError("large-omega matching needs r0 > 0 and omega > 0")
    _check_validity(cfg)
    return math.pi * h_hat(cfg.r0) - 0.5 * (
        math.log(cfg.r0 * cfg.omega * cfg.eps / 4.0) + EULER_GAMMA
    )


def mass_large_omega(cfg: TrapConfig) -> float:
    """Leading-order mass pi H."""
    return math.pi * matching_h(cfg)


def mass_large_omega_gradient(r0: float) -> float:
    """dM/dr0 = pi (r0 - 1/r0), negative on (0, 1)."""
    if r0 <= 0.0:
        raise DomainError("r0 must be positive")
    return math.pi * (r0 - 1.0 / r0)


def field_u_large_omega(r, theta, cfg: TrapConfig, h: Optional[float] = None):
    """Outer field u = -pi G + H from the composite Green's function."""
    if h is None:
        h = matching_h(cfg)
    values = -math.pi * np.asarray(composite_green(r, theta, cfg.r0, cfg.omega)) + h
    return float(values) if values.ndim == 0 else values
