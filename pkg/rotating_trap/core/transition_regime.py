"""
Distinguished regime omega = omega0 / eps.

Near the trap the field solves an advection-diffusion problem in the
stretched variables with drift s0 = r0 * omega0. Its far-field constant
u0(s0) is obtained from a first-kind boundary integral equation for the
normal derivative sigma on the unit circle, discretised by a Nystrom rule
with log-split (Kress) weights. The outer solution is radially symmetric
and only needs u0.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import interpolate, linalg, optimize, special

from rotating_trap.core.models import FluxTable, InnerSolverParams
from rotating_trap.core.special_functions import EULER_GAMMA
from rotating_trap.utils.config import get_config
from rotating_trap.utils.errors import (
    ConventionError,
    DomainError,
    SingularPointError,
    TableRangeError,
)
from rotating_trap.utils.logger import get_logger, get_performance_logger

logger = get_logger("transition_regime", {"component": "transition_regime"})
performance = get_performance_logger("transition_regime")

TWO_PI = 2.0 * math.pi
CONDITION_WARN = 1e12
# Cutoff window, in units of 1/a, for the log-split of K0 and K1.
CUTOFF_INNER = 2.0
CUTOFF_OUTER = 6.0


def adjoint_green(point: Sequence[float], source: Sequence[float], s0: float) -> float:
    """Free-space Green's function of Delta G - s0 G_eta = delta(xi - z)."""
    if s0 <= 0:
        raise DomainError("s0 must be positive")
    xi, eta = float(point[0]), float(point[1])
    z1, z2 = float(source[0]), float(source[1])
    distance = math.hypot(xi - z1, eta - z2)
    if distance == 0.0:
        raise SingularPointError("adjoint Green's function at its source")
    a = 0.5 * s0
    arg = a * distance
    return -float(special.k0e(arg)) * math.exp(a * (eta - z2) - arg) / TWO_PI


def kress_weights(n_nodes: int) -> np.ndarray:
    """Weights R_ij for integrals of log(4 sin^2((t_i - t_j)/2)) f(t_j)."""
    if n_nodes % 2:
        raise DomainError("Kress weights need an even number of nodes")
    half = n_nodes // 2
    gaps = TWO_PI * np.arange(n_nodes) / n_nodes
    orders = np.arange(1, half)
    harmonics = np.cos(np.outer(gaps, orders)) @ (1.0 / orders)
    row = -(4.0 * math.pi / n_nodes) * harmonics
    row -= (math.pi / half**2) * np.cos(half * gaps)
    # The weights depend only on the node gap, so the matrix is circulant.
    index = np.arange(n_nodes)
    return row[(index[None, :] - index[:, None]) % n_nodes]


def _smooth_step(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        right = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


def _cutoff(angle_gap: np.ndarray, a: float) -> np.ndarray:
    """Smooth bump: 1 for small angular gaps, 0 beyond CUTOFF_OUTER / a."""
    outer = CUTOFF_OUTER / a
    if outer >= math.pi:
        return np.ones_like(angle_gap)
    inner = CUTOFF_INNER / a
    return 1.0 - _smooth_step((angle_gap - inner) / (outer - inner))


def _assemble(s0: float, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nystrom matrix and right-hand side on n_nodes equispaced angles."""
    a = 0.5 * s0
    nodes = TWO_PI * np.arange(n_nodes) / n_nodes
    sin_nodes = np.sin(nodes)
    diff = nodes[None, :] - nodes[:, None]
    gap = np.abs(np.remainder(diff + math.pi, TWO_PI) - math.pi)
    diagonal = np.eye(n_nodes, dtype=bool)
    distance = 2.0 * np.abs(np.sin(0.5 * diff))
    distance[diagonal] = 1.0
    arg = a * distance
    # Row i is the collocation angle, column j the integration angle.
    shift = a * (sin_nodes[None, :] - sin_nodes[:, None])
    sin_j = np.broadcast_to(sin_nodes[None, :], distance.shape)

    chi = _cutoff(gap, a)
    near = chi > 0.0
    i0 = np.zeros_like(distance)
    i1 = np.zeros_like(distance)
    i0[near] = special.i0e(arg[near]) * np.exp(shift[near] + arg[near])
    i1[near] = special.i1e(arg[near]) * np.exp(shift[near] + arg[near])
    k0 = special.k0e(arg) * np.exp(shift - arg)
    k1 = special.k1e(arg) * np.exp(shift - arg)
    log_d = np.log(distance)

    log_coeff = -chi * i0 / TWO_PI
    smooth = (k0 + chi * i0 * log_d) / TWO_PI
    rhs_log = chi * (-a * sin_j * i0 + 0.5 * arg * i1) / TWO_PI
    rhs_smooth = (
        a * sin_j * (k0 + chi * i0 * log_d) + 0.5 * arg * (k1 - chi * i1 * log_d)
    ) / TWO_PI

    limit = -EULER_GAMMA - math.log(0.5 * a)
    log_coeff[diagonal] = -1.0 / TWO_PI
    smooth[diagonal] = limit / TWO_PI
    rhs_log[diagonal] = -a * sin_nodes / TWO_PI
    rhs_smooth[diagonal] = (a * sin_nodes * limit + 0.5) / TWO_PI

    weights = kress_weights(n_nodes)
    step = TWO_PI / n_nodes
    matrix = 0.5 * weights * log_coeff + step * smooth
    rhs = 0.5 + np.sum(0.5 * weights * rhs_log + step * rhs_smooth, axis=1)
    return matrix, rhs


def _solve_nodes(s0: float, n_nodes: int) -> np.ndarray:
    started = time.perf_counter()
    matrix, rhs = _assemble(s0, n_nodes)
    q, r, perm = linalg.qr(matrix, pivoting=True)
    diag = np.abs(np.diag(r))
    condition = float(diag[0] / diag[-1]) if diag[-1] > 0 else math.inf
    solution = linalg.solve_triangular(r, q.T @ rhs)
    sigma = np.empty(n_nodes)
    sigma[perm] = solution
    residual = float(np.linalg.norm(matrix @ sigma - rhs) / np.linalg.norm(rhs))
    performance.log_solver_summary(
        "boundary_density",
        size=n_nodes,
        residual=residual,
        condition=condition,
        s0=s0,
        duration_seconds=time.perf_counter() - started,
    )
    if condition > CONDITION_WARN:
        logger.warning(
            "Boundary integral system is ill-conditioned",
            s0=s0,
            n_nodes=n_nodes,
            condition=condition,
        )
    return sigma


def solve_boundary_density(
    s0: float, params: Optional[InnerSolverParams] = None
) -> np.ndarray:
    """sigma = d mu / d r on the unit circle at params.nodes_for(s0) angles."""
    params = params or InnerSolverParams()
    if s0 <= 0:
        raise DomainError("s0 must be positive")
    return _solve_nodes(s0, params.nodes_for(s0))


def flux_from_density(sigma: np.ndarray) -> float:
    """Phi = integral of d mu / d n with the normal pointing into the trap."""
    return -TWO_PI * float(np.mean(sigma))


def inner_constant_u0(s0: float, params: Optional[InnerSolverParams] = None) -> float:
    """Far-field constant u0(s0) = -pi / Phi(s0)."""
    sigma = solve_boundary_density(s0, params)
    u0 = -math.pi / flux_from_density(sigma)
    if not u0 > 0.0:
        raise ConventionError(
            f"nonpositive u0 = {u0} at s0 = {s0}; normal orientation is wrong"
        )
    return u0


def small_s0_u0(s0) -> np.ndarray:
    """Small-s0 asymptote (log(4 / s0) - gamma) / 2."""
    s0 = np.asarray(s0, dtype=float)
    if np.any(s0 <= 0):
        raise DomainError("s0 must be positive")
    values = 0.5 * (np.log(4.0 / s0) - EULER_GAMMA)
    return float(values) if values.ndim == 0 else values


def reconstruct_mu(points, s0: float, sigma: np.ndarray) -> np.ndarray:
    """Inner field mu at points outside the unit circle from sigma samples."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    radius = np.hypot(points[:, 0], points[:, 1])
    if np.any(radius <= 1.0):
        raise DomainError("reconstruction needs points strictly outside the trap")
    a = 0.5 * s0
    n_nodes = sigma.size
    nodes = TWO_PI * np.arange(n_nodes) / n_nodes
    xi = np.cos(nodes)[None, :]
    eta = np.sin(nodes)[None, :]
    dx = xi - points[:, 0:1]
    dy = eta - points[:, 1:2]
    distance = np.hypot(dx, dy)
    arg = a * distance
    scale = np.exp(a * (eta - points[:, 1:2]) - arg)
    green = -special.k0e(arg) * scale / TWO_PI
    radial = (xi * dx + eta * dy) / distance
    green_r = (
        -(a * eta * special.k0e(arg) - a * special.k1e(arg) * radial) * scale / TWO_PI
    )
    integrand = green * sigma[None, :] + green_r - s0 * green * eta
    return (TWO_PI / n_nodes) * integrand.sum(axis=1)


def u0_derivative(
    s0: np.ndarray, u0: np.ndarray, tol: Optional[float] = None
) -> np.ndarray:
    """du0/ds0 from tabulated values.

    Differences are taken in log(s0), where u0 is smooth down to s0 -> 0.
    Interior points use Richardson extrapolation of the h and 2h centred
    differences; endpoints are second-order one-sided.
    """
    s0 = np.asarray(s0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if s0.size < 5:
        raise DomainError("u0_derivative needs at least 5 grid points")
    tol = get_config().inner_solver.deriv_tol if tol is None else tol
    x = np.log(s0)
    coarse = np.gradient(u0, x, edge_order=2)
    refined = coarse.copy()
    wide = (u0[4:] - u0[:-4]) / (x[4:] - x[:-4])
    refined[2:-2] = coarse[2:-2] + (coarse[2:-2] - wide) / 3.0
    disagreement = float(np.max(np.abs(refined - coarse)))
    if disagreement > tol:
        logger.warning(
            "Grid too coarse for u0 derivative",
            disagreement=disagreement,
            tol=tol,
        )
    return refined / s0


class FluxTableBuilder:
    """Builds the u0(s0) table, solving grid points in parallel."""

    def __init__(self, params: Optional[InnerSolverParams] = None, threads: int = 1):
        self.params = params or InnerSolverParams()
        self.threads = max(1, int(threads))
        self.logger = logger.with_context(builder="flux_table")

    def _solve(self, s0: float) -> float:
        return inner_constant_u0(s0, self.params)

    def _direct_derivative(self, s0: np.ndarray) -> np.ndarray:
        h = self.params.deriv_step
        samples = {}
        for factor in (-2.0, -1.0, 1.0, 2.0):
            shifted = s0 * math.exp(factor * h)
            samples[factor] = np.array(self._map(shifted))
        narrow = (samples[1.0] - samples[-1.0]) / (2.0 * h)
        wide = (samples[2.0] - samples[-2.0]) / (4.0 * h)
        return (narrow + (narrow - wide) / 3.0) / s0

    def _map(self, values: np.ndarray) -> list:
        if self.threads == 1:
            return [self._solve(float(v)) for v in values]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(self._solve, (float(v) for v in values)))

    def build(self) -> FluxTable:
        """Solve every grid point and assemble an immutable table."""
        started = time.perf_counter()
        s0 = np.asarray(self.params.s0_grid, dtype=float)
        try:
            u0 = np.array(self._map(s0))
            if self.params.deriv_step > 0:
                u0_prime = self._direct_derivative(s0)
            else:
                u0_prime = u0_derivative(s0, u0, self.params.deriv_tol)
        except Exception:
            self.logger.exception("Flux table construction failed")
            raise

        if np.any(np.diff(u0) >= 0):
            self.logger.warning("u0 is not strictly decreasing on the grid")
        if np.any(u0_prime >= 0):
            self.logger.warning("u0 derivative is not negative everywhere")
        nodes = tuple(self.params.nodes_for(float(v)) for v in s0)
        performance.log_execution_time(
            "flux_table",
            time.perf_counter() - started,
            points=int(s0.size),
            threads=self.threads,
        )
        return FluxTable(s0=s0, u0=u0, u0_prime=u0_prime, n_nodes=nodes)


def params_from_config() -> InnerSolverParams:
    """Inner solver parameters from the active configuration."""
    section = get_config().inner_solver
    grid = np.geomspace(section.s0_min, section.s0_max, section.s0_count)
    return InnerSolverParams(
        n_nodes=section.n_nodes,
        s0_grid=tuple(grid.tolist()),
        nodes_per_s0=section.nodes_per_s0,
        deriv_tol=section.deriv_tol,
    )


@lru_cache(maxsize=4)
def _cached_table(params: InnerSolverParams, threads: int) -> FluxTable:
    return FluxTableBuilder(params, threads).build()


def default_flux_table(
    params: Optional[InnerSolverParams] = None, threads: Optional[int] = None
) -> FluxTable:
    """Flux table for the configured grid, built once per process."""
    params = params or params_from_config()
    threads = get_config().runtime.threads if threads is None else threads
    return _cached_table(params, threads)


def _lookup(table: FluxTable, values: np.ndarray, s0) -> np.ndarray:
    s0 = np.asarray(s0, dtype=float)
    lo, hi = table.s0_range
    if np.any(s0 < lo * (1 - 1e-12)) or np.any(s0 > hi * (1 + 1e-12)):
        raise TableRangeError(f"s0 outside the tabulated range [{lo:g}, {hi:g}]")
    spline = interpolate.PchipInterpolator(np.log(table.s0), values)
    result = spline(np.log(np.clip(s0, lo, hi)))
    return float(result) if result.ndim == 0 else result


def interpolate_u0(table: FluxTable, s0):
    """Monotone cubic interpolation of u0 in log(s0)."""
    return _lookup(table, table.u0, s0)


def interpolate_u0_prime(table: FluxTable, s0):
    """Monotone cubic interpolation of du0/ds0 in log(s0)."""
    return _lookup(table, table.u0_prime, s0)


def outer_field(r, r0: float, omega0: float, table: FluxTable):
    """Radially symmetric outer solution with u = u0(r0 omega0) on the ring."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r > 1)):
        raise DomainError("r must lie in [0, 1]")
    u0 = interpolate_u0(table, r0 * omega0)
    with np.errstate(divide="ignore"):
        log_term = np.where(r > r0, np.log(np.maximum(r, r0) / r0), 0.0)
    values = (r0**2 - r**2) / 4.0 + u0 + 0.5 * log_term
    return float(values) if values.ndim == 0 else values


def mass_transition(r0: float, omega0: float, table: FluxTable) -> float:
    """Leading-order mass pi [r0^2/2 - 3/8 - log(r0)/2 + u0(r0 omega0)]."""
    if not 0.0 < r0 < 1.0:
        raise DomainError(f"r0 must lie in (0, 1), got {r0}")
    u0 = interpolate_u0(table, r0 * omega0)
    return math.pi * (r0**2 / 2.0 - 3.0 / 8.0 - 0.5 * math.log(r0) + u0)


def mass_transition_gradient(r0: float, omega0: float, table: FluxTable) -> float:
    """dM/dr0 = pi [r0 - 1/(2 r0) + omega0 u0'(r0 omega0)]."""
    u0_prime = interpolate_u0_prime(table, r0 * omega0)
    return math.pi * (r0 - 0.5 / r0 + omega0 * u0_prime)


def optimal_radius_transition(
    omega0: float, table: FluxTable, scan_points: int = 400
) -> float:
    """Root of the first-order condition with the lowest mass."""
    if omega0 <= 0:
        raise DomainError("omega0 must be positive")
    lo_s0, hi_s0 = table.s0_range
    lo = max(lo_s0 / omega0, 1e-6)
    hi = min(hi_s0 / omega0, 1.0 - 1e-6)
    if lo >= hi:
        raise TableRangeError(
            f"no radius in (0, 1) maps into the table at omega0 = {omega0}"
        )
    grid = np.linspace(lo, hi, scan_points)
    gradient = np.array([mass_transition_gradient(r, omega0, table) for r in grid])
    candidates = [grid[0], grid[-1]]
    for index in np.flatnonzero(np.sign(gradient[:-1]) * np.sign(gradient[1:]) < 0):
        if gradient[index] < 0 < gradient[index + 1]:
            candidates.append(
                optimize.brentq(
                    mass_transition_gradient,
                    grid[index],
                    grid[index + 1],
                    args=(omega0, table),
                    xtol=1e-12,
                )
            )
    masses = [mass_transition(r, omega0, table) for r in candidates]
    best = float(candidates[int(np.argmin(masses))])
    logger.debug(
        "Transition optimum",
        omega0=omega0,
        r0_opt=best,
        candidates=len(candidates),
    )
    return best
