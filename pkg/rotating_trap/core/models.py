"""
Parameter and result types shared by the solver modules.

Parameter objects are frozen pydantic models whose validators enforce the
physical invariants; results are plain dataclasses.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rotating_trap.utils.logger import get_logger

logger = get_logger("models", {"component": "models"})

# Complex scalars are carried as Python/numpy complex numbers.
ComplexValue = complex


class RegimeTag(Enum):
    """Asymptotic regime that produced a mass value."""

    SERIES = "series"
    TRANSITION = "transition"
    FAST = "fast"
    COMPOSITE = "composite"


class TrapConfig(BaseModel):
    """Trap radius, ring radius and angular velocity."""

    model_config = ConfigDict(frozen=True)

    r0: float = Field(..., ge=0.0, lt=1.0, description="Ring radius")
    eps: float = Field(..., gt=0.0, description="Trap radius")
    omega: float = Field(default=0.0, ge=0.0, description="Angular velocity")

    @model_validator(mode="after")
    def _check_inside_domain(self) -> "TrapConfig":
        if self.r0 + self.eps >= 1.0:
            raise ValueError(
                f"trap leaves the domain: r0 + eps = {self.r0 + self.eps} >= 1"
            )
        if self.eps > 0.2:
            logger.warning("Trap radius is not small", eps=self.eps)
        return self

    @property
    def omega0(self) -> float:
        """Scaled angular velocity eps * omega."""
        return self.eps * self.omega

    @property
    def speed(self) -> float:
        """Linear trap speed r0 * omega."""
        return self.r0 * self.omega

    @classmethod
    def from_omega0(cls, r0: float, eps: float, omega0: float) -> "TrapConfig":
        return cls(r0=r0, eps=eps, omega=omega0 / eps)

    @classmethod
    def from_speed(cls, r0: float, eps: float, speed: float) -> "TrapConfig":
        if r0 <= 0.0:
            raise ValueError("speed parameterisation needs r0 > 0")
        return cls(r0=r0, eps=eps, omega=speed / r0)

    def with_r0(self, r0: float) -> "TrapConfig":
        return TrapConfig(r0=r0, eps=self.eps, omega=self.omega)


class SeriesTruncation(BaseModel):
    """Mode cutoff and tail tolerance for Fourier-Bessel sums."""

    model_config = ConfigDict(frozen=True)

    m_max: int = Field(default=2000, ge=1)
    tail_tol: float = Field(default=1e-12, gt=0.0)
    consecutive_small: int = Field(default=4, ge=1)
    debye_order: int = Field(default=150, ge=20)
    tail_modes: int = Field(default=65536, ge=1)


class WalkParams(BaseModel):
    """Lattice walk parameters."""

    model_config = ConfigDict(frozen=True)

    space_step: float = Field(..., gt=0.0)
    time_step: float = Field(..., gt=0.0)
    n_agents: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_steps: int = Field(default=2_000_000, ge=1)
    block_steps: int = Field(default=4096, ge=16)

    def diffusivity(self, dim: int = 1) -> float:
        """Implied diffusivity of the lattice walk in 1 or 2 dimensions."""
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        value = self.space_step**2 / (2 * dim * self.time_step)
        if not math.isfinite(value):
            raise ValueError("implied diffusivity is not finite")
        return value

    @classmethod
    def for_diffusivity(
        cls, space_step: float, diffusivity: float, dim: int = 1, **kwargs
    ) -> "WalkParams":
        """Choose the time step that realises a target diffusivity."""
        return cls(
            space_step=space_step,
            time_step=space_step**2 / (2 * dim * diffusivity),
            **kwargs,
        )


@dataclass
class WalkStats:
    """Monte Carlo estimate of a mean first passage time."""

    mean_fpt: float
    std_error: float
    n_captured: int
    n_censored: int

    @property
    def n_agents(self) -> int:
        return self.n_captured + self.n_censored

    @classmethod
    def from_times(cls, times: np.ndarray, captured: np.ndarray) -> "WalkStats":
        done = np.asarray(times, dtype=float)[np.asarray(captured, dtype=bool)]
        n_captured = int(done.size)
        n_censored = int(np.size(captured) - n_captured)
        if n_captured == 0:
            return cls(float("nan"), float("nan"), 0, n_censored)
        mean = float(done.mean())
        std_error = (
            float(done.std(ddof=1) / math.sqrt(n_captured)) if n_captured > 1 else 0.0
        )
        return cls(mean, std_error, n_captured, n_censored)


class InnerSolverParams(BaseModel):
    """Discretisation of the inner boundary integral equation."""

    model_config = ConfigDict(frozen=True)

    n_nodes: int = Field(default=128)
    s0_grid: Tuple[float, ...] = Field(
        default_factory=lambda: tuple(np.geomspace(1e-3, 60.0, 121).tolist())
    )
    deriv_step: float = Field(default=0.0, ge=0.0, description="0 means grid spacing")
    nodes_per_s0: float = Field(default=8.0, gt=0.0)
    deriv_tol: float = Field(default=1e-3, gt=0.0)

    @field_validator("n_nodes")
    @classmethod
    def _even_nodes(cls, value: int) -> int:
        if value < 32 or value % 2:
            raise ValueError("n_nodes must be even and at least 32")
        return value

    @field_validator("s0_grid")
    @classmethod
    def _increasing_grid(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        grid = np.asarray(value, dtype=float)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
            raise ValueError("s0_grid must be positive and strictly increasing")
        return tuple(float(v) for v in grid)

    def nodes_for(self, s0: float) -> int:
        """Node count for one solve, refined with s0 so the kernel is resolved."""
        wanted = max(self.n_nodes, int(math.ceil(self.nodes_per_s0 * s0)))
        return wanted + (wanted % 2)


@dataclass(frozen=True)
class FluxTable:
    """Tabulated inner constant u0(s0) and its derivative."""

    s0: np.ndarray
    u0: np.ndarray
    u0_prime: np.ndarray
    n_nodes: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("s0", "u0", "u0_prime"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def s0_range(self) -> Tuple[float, float]:
        return float(self.s0[0]), float(self.s0[-1])


@dataclass
class MassCurve:
    """Sampled mass M(r0) with detected local minima."""

    r0_samples: np.ndarray
    mass_values: np.ndarray
    regime_tag: RegimeTag
    local_minima: List[Tuple[float, float]] = field(default_factory=list)


@dataclass
class OptimumResult:
    """Selected optimal radius with regime provenance."""

    r0_opt: float
    mass_at_opt: float
    regime_tag: RegimeTag
    competing_minima: List[Tuple[float, float]] = field(default_factory=list)
    omega: Optional[float] = None
    speed: Optional[float] = None
    eps: Optional[float] = None
