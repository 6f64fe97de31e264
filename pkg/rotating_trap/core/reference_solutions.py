"""
Closed-form reference solutions.

Covers the 1D interval and circle MFPTs, the radially symmetric limit of a
trap rotating much faster than 1/eps, and the regular part of the static
(omega = 0) Neumann Green's function of the unit disk.
"""

import math

import numpy as np
from scipy import optimize

from rotating_trap.core.models import TrapConfig
from rotating_trap.utils.errors import DomainError


def interval_exact(x: float, trap_pos: float, d: float) -> float:
    """MFPT on [0, 1] with reflecting ends and an absorbing point trap_pos."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if not 0.0 < trap_pos < 1.0:
        raise DomainError(f"trap_pos must lie in (0, 1), got {trap_pos}")
    if d <= 0.0:
        raise DomainError("diffusivity must be positive")
    if x <= trap_pos:
        return (trap_pos**2 - x**2) / (2.0 * d)
    return (x - trap_pos) * (2.0 - x - trap_pos) / (2.0 * d)


def circle_exact(theta: float, omega: float, d: float) -> float:
    """MFPT on the circle for a trap at theta = 0 drifting at rate omega.

    Solves D v'' + omega v' + 1 = 0 with v(0) = v(2 pi) = 0.
    """
    if d <= 0.0:
        raise DomainError("diffusivity must be positive")
    theta = float(theta) % (2.0 * math.pi)
    drift = 2.0 * math.pi * omega / d
    if abs(drift) < 1e-8:
        return theta * (2.0 * math.pi - theta) / (2.0 * d)
    ratio = math.expm1(-omega * theta / d) / math.expm1(-drift)
    return (2.0 * math.pi * ratio - theta) / omega


def fast_regime_field(r: float, cfg: TrapConfig) -> float:
    """Radially symmetric field when the trap smears into an absorbing annulus."""
    r0, eps = cfg.r0, cfg.eps
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got {r}")
    if r0 - eps < r < r0 + eps:
        raise DomainError(f"r = {r} lies inside the absorbing annulus")
    base = (r0**2 + eps**2 - r**2) / 4.0
    if r <= r0 - eps:
        return base - eps * r0 / 2.0
    return base + eps * r0 / 2.0 + 0.5 * math.log(r / (r0 + eps))


def fast_regime_mass(cfg: TrapConfig) -> float:
    """Closed-form mass of the radially symmetric field."""
    r0, eps = cfg.r0, cfg.eps
    if r0 <= 0.0:
        raise DomainError("fast-regime mass is singular at r0 = 0")
    return math.pi * (
        r0**2 / 2.0
        - 3.0 / 8.0
        - 0.5 * math.log(r0 + eps)
        + eps * r0 * (1.0 - r0**2)
        + 0.5 * eps**2
        - eps**3 * r0
    )


def fast_regime_mass_gradient(r0: float, eps: float) -> float:
    """dM/dr0 of the fast-regime mass."""
    if r0 <= 0.0:
        raise DomainError("fast-regime mass is singular at r0 = 0")
    return math.pi * (
        r0 - 0.5 / (r0 + eps) + eps * (1.0 - 3.0 * r0**2) - eps**3
    )


def fast_regime_optimal_radius(eps: float) -> float:
    """Minimiser of the fast-regime mass, close to 1/sqrt(2) - eps/4."""
    if eps < 0.0:
        raise DomainError("eps must be nonnegative")
    hi = min(0.95, 1.0 - eps - 1e-9)
    return float(
        optimize.brentq(
            fast_regime_mass_gradient, 0.3, hi, args=(eps,), xtol=1e-15, rtol=1e-15
        )
    )


def static_green_regular(r0: float) -> float:
    """Regular part of the omega = 0 Neumann Green's function at distance r0."""
    if r0 < 0.0:
        raise DomainError("r0 must be nonnegative")
    if r0 >= 1.0:
        raise DomainError("regular part diverges as r0 -> 1")
    return (-math.log1p(-(r0**2)) + r0**2 - 0.75) / (2.0 * math.pi)


def static_mass(r0: float, eps: float) -> float:
    """Mass of a stationary trap, pi * (pi R - log(eps) / 2)."""
    return math.pi * (math.pi * static_green_regular(r0) - 0.5 * math.log(eps))


def static_optimal_radius() -> float:
    """Minimiser of the static regular part over [0, 1)."""
    result = optimize.minimize_scalar(
        static_green_regular, bounds=(0.0, 0.99), method="bounded"
    )
    return float(np.clip(result.x, 0.0, 1.0))
