"""
Seeded lattice random walks for mean first passage times.

Three geometries are covered: the reflecting unit interval, the circle
with a drifting trap, and the unit disk with a trap rotating on a ring.
All agents of one start point advance together in a vectorised step loop.
Agent k at start point p draws from its own Philox stream keyed by
(seed, p, k), so results do not depend on how agents are batched.

Each step moves the trap first, then the walker, then tests for capture.
"""

import math
import time
from typing import Iterable, Sequence, Tuple

import numpy as np
import pandas as pd

from rotating_trap.core.models import TrapConfig, WalkParams, WalkStats
from rotating_trap.utils.errors import DomainError
from rotating_trap.utils.logger import get_logger, get_performance_logger

logger = get_logger("monte_carlo", {"component": "monte_carlo"})
performance = get_performance_logger("monte_carlo")

TWO_PI = 2.0 * math.pi


class AgentStreams:
    """Independent per-agent random streams, drawn in blocks."""

    def __init__(self, seed: int, point: int, n_agents: int, block: int):
        self.generators = [
            np.random.Generator(
                np.random.Philox(np.random.SeedSequence(seed, spawn_key=(point, agent)))
            )
            for agent in range(n_agents)
        ]
        self.block = block
        self._buffer = np.empty((n_agents, 0), dtype=np.int8)
        self._cursor = 0

    def uniform(self) -> np.ndarray:
        """One U(0, 1) draw per agent, taken before any lattice steps."""
        return np.array([g.random() for g in self.generators])

    def next_choice(self, choices: int) -> np.ndarray:
        """Next lattice direction (0 .. choices-1) for every agent."""
        if self._cursor >= self._buffer.shape[1]:
            self._buffer = np.stack(
                [
                    g.integers(0, choices, size=self.block, dtype=np.int8)
                    for g in self.generators
                ]
            )
            self._cursor = 0
        column = self._buffer[:, self._cursor]
        self._cursor += 1
        return column


class _IntervalWalk:
    """Walk on [0, 1]; reflections are unfolded with a triangle wave."""

    choices = 2

    def __init__(self, x_start: float, trap_pos: float, params: WalkParams):
        self.start = x_start
        self.trap = trap_pos
        self.step_size = params.space_step
        self.window = 0.5 * params.space_step * (1.0 + 1e-9)
        self.offset = np.zeros(params.n_agents, dtype=np.int64)

    def position(self) -> np.ndarray:
        unfolded = np.mod(self.start + self.offset * self.step_size, 2.0)
        return np.where(unfolded <= 1.0, unfolded, 2.0 - unfolded)

    def captured_at_start(self) -> np.ndarray:
        return np.abs(self.position() - self.trap) <= self.window

    def advance(
        self, step: int, direction: np.ndarray, active: np.ndarray
    ) -> np.ndarray:
        self.offset[active] += np.where(direction[active] == 0, 1, -1)
        return np.abs(self.position() - self.trap) <= self.window


class _CircleWalk:
    """Walk on the circle in the frame of a trap that advances -omega dt per step."""

    choices = 2

    def __init__(self, theta_start: float, omega: float, params: WalkParams):
        self.start = theta_start
        self.drift = omega * params.time_step
        self.step_size = params.space_step
        self.window = 0.5 * params.space_step * (1.0 + 1e-9)
        self.offset = np.zeros(params.n_agents, dtype=np.int64)
        self.steps = np.zeros(params.n_agents, dtype=np.int64)

    def relative_angle(self) -> np.ndarray:
        return self.start + self.steps * self.drift + self.offset * self.step_size

    def _near_trap(self, angle: np.ndarray) -> np.ndarray:
        wrapped = np.mod(angle, TWO_PI)
        return np.minimum(wrapped, TWO_PI - wrapped) <= self.window

    def captured_at_start(self) -> np.ndarray:
        return self._near_trap(self.relative_angle())

    def advance(
        self, step: int, direction: np.ndarray, active: np.ndarray
    ) -> np.ndarray:
        before = np.floor(self.relative_angle() / TWO_PI)
        self.steps[active] += 1
        self.offset[active] += np.where(direction[active] == 0, 1, -1)
        angle = self.relative_angle()
        crossed = np.floor(angle / TWO_PI) != before
        return self._near_trap(angle) | crossed


class _DiskWalk:
    """Square-lattice walk in the unit disk with a trap on (r0 cos wt, -r0 sin wt)."""

    choices = 4

    def __init__(
        self, start: Tuple[float, float], cfg: TrapConfig, params: WalkParams
    ):
        n = params.n_agents
        self.x = np.full(n, float(start[0]))
        self.y = np.full(n, float(start[1]))
        self.cfg = cfg
        self.dt = params.time_step
        self.step_size = params.space_step
        self._dx = np.array([1.0, -1.0, 0.0, 0.0]) * params.space_step
        self._dy = np.array([0.0, 0.0, 1.0, -1.0]) * params.space_step

    @classmethod
    def from_points(
        cls, xs: np.ndarray, ys: np.ndarray, cfg: TrapConfig, params: WalkParams
    ) -> "_DiskWalk":
        walk = cls((0.0, 0.0), cfg, params)
        walk.x = np.asarray(xs, dtype=float).copy()
        walk.y = np.asarray(ys, dtype=float).copy()
        return walk

    def _trap(self, step: int) -> Tuple[float, float]:
        angle = self.cfg.omega * step * self.dt
        return self.cfg.r0 * math.cos(angle), -self.cfg.r0 * math.sin(angle)

    def _inside_trap(self, step: int) -> np.ndarray:
        tx, ty = self._trap(step)
        return np.hypot(self.x - tx, self.y - ty) <= self.cfg.eps

    def captured_at_start(self) -> np.ndarray:
        return self._inside_trap(0)

    def advance(
        self, step: int, direction: np.ndarray, active: np.ndarray
    ) -> np.ndarray:
        moves = direction[active]
        self.x[active] += self._dx[moves]
        self.y[active] += self._dy[moves]
        radius = np.hypot(self.x, self.y)
        outside = radius > 1.0
        if np.any(outside):
            scale = (2.0 - radius[outside]) / radius[outside]
            self.x[outside] *= scale
            self.y[outside] *= scale
        return self._inside_trap(step)


def _run(walk, params: WalkParams, point: int, label: str) -> WalkStats:
    started = time.perf_counter()
    streams = AgentStreams(params.seed, point, params.n_agents, params.block_steps)
    times = np.zeros(params.n_agents)
    done = walk.captured_at_start()
    step = 0
    while not done.all() and step < params.max_steps:
        step += 1
        direction = streams.next_choice(walk.choices)
        hit = walk.advance(step, direction, ~done) & ~done
        times[hit] = step * params.time_step
        done |= hit

    stats = WalkStats.from_times(times, done)
    if stats.n_censored:
        logger.warning(
            "Walkers censored at max_steps",
            walk=label,
            n_censored=stats.n_censored,
            max_steps=params.max_steps,
        )
    performance.log_execution_time(
        f"mfpt_{label}",
        time.perf_counter() - started,
        agents=params.n_agents,
        steps=step,
        point=point,
    )
    return stats


def mfpt_interval(
    x_start: float, trap_pos: float, params: WalkParams, point: int = 0
) -> WalkStats:
    """MFPT on the reflecting interval [0, 1] with an absorbing point."""
    if not 0.0 <= x_start <= 1.0:
        raise DomainError(f"x_start must lie in [0, 1], got {x_start}")
    if not 0.0 < trap_pos < 1.0:
        raise DomainError(f"trap_pos must lie in (0, 1), got {trap_pos}")
    return _run(_IntervalWalk(x_start, trap_pos, params), params, point, "interval")


def mfpt_circle(
    theta_start: float, omega: float, params: WalkParams, point: int = 0
) -> WalkStats:
    """MFPT on the circle; the trap starts at 0 and moves by -omega dt per step."""
    if omega < 0:
        raise DomainError("omega must be nonnegative")
    return _run(_CircleWalk(theta_start, omega, params), params, point, "circle")


def mfpt_disk(
    start: Sequence[float], cfg: TrapConfig, params: WalkParams, point: int = 0
) -> WalkStats:
    """MFPT in the unit disk for the rotating trap."""
    if math.hypot(start[0], start[1]) > 1.0:
        raise DomainError(f"start point {tuple(start)} lies outside the unit disk")
    return _run(_DiskWalk(tuple(start), cfg, params), params, point, "disk")


def field_scan(
    points: Iterable[Sequence[float]], cfg: TrapConfig, params: WalkParams
) -> pd.DataFrame:
    """Disk MFPT at each start point as rows (x, y, mean_fpt, std_error, n_captured)."""
    rows = []
    for index, (x, y) in enumerate(points):
        stats = mfpt_disk((x, y), cfg, params, point=index)
        rows.append(
            {
                "x": float(x),
                "y": float(y),
                "mean_fpt": stats.mean_fpt,
                "std_error": stats.std_error,
                "n_captured": stats.n_captured,
            }
        )
    return pd.DataFrame(rows, columns=["x", "y", "mean_fpt", "std_error", "n_captured"])


def disk_grid(spacing: float) -> np.ndarray:
    """Square grid of points inside the unit disk."""
    axis = np.arange(-1.0, 1.0 + 0.5 * spacing, spacing)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    inside = np.hypot(xx, yy) <= 1.0
    return np.column_stack([xx[inside], yy[inside]])


def domain_averaged_mfpt(
    cfg: TrapConfig, params: WalkParams, point: int = 0
) -> WalkStats:
    """MFPT averaged over start points drawn uniformly from the disk.

    Its mean times pi estimates the mass.
    """
    streams = AgentStreams(params.seed, point, params.n_agents, params.block_steps)
    radius = np.sqrt(streams.uniform())
    angle = TWO_PI * streams.uniform()
    walk = _DiskWalk.from_points(
        radius * np.cos(angle), radius * np.sin(angle), cfg, params
    )
    # The start draws came from a separate stream family so lattice steps
    # are not shifted by them.
    return _run(walk, params, point + 1_000_000, "disk_average")
