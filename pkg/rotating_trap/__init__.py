"""Rotating Trap Package.

Mean first passage times and optimal ring radius for a small absorbing
trap rotating inside the unit disk, from asymptotic formulas, a boundary
integral solver and lattice random walks.
"""

__version__ = "1.0.0"
__author__ = "Rotating Trap Team"
__description__ = "Asymptotics and simulation of a rotating narrow-escape trap"

from .core.models import (
    FluxTable,
    MassCurve,
    OptimumResult,
    RegimeTag,
    SeriesTruncation,
    TrapConfig,
    WalkParams,
    WalkStats,
)
from .core.optimizer import mass, optimal_radius

__all__ = [
    "FluxTable",
    "MassCurve",
    "OptimumResult",
    "RegimeTag",
    "SeriesTruncation",
    "TrapConfig",
    "WalkParams",
    "WalkStats",
    "mass",
    "optimal_radius",
]
