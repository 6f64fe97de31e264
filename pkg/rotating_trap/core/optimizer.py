"""
Regime dispatch and optimal trap radius.

The mass M(r0) is taken from the asymptotic regime whose validity window
contains (omega, eps). Optimal radii come from a dense scan of M(r0)
followed by golden-section refinement of every bracketed local minimum,
because the mass curve can carry two competing minima.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from rotating_trap.core.large_omega import mass_large_omega
from rotating_trap.core.models import (
    FluxTable,
    MassCurve,
    OptimumResult,
    RegimeTag,
    SeriesTruncation,
    TrapConfig,
)
from rotating_trap.core.reference_solutions import (
    fast_regime_mass,
    fast_regime_optimal_radius,
    static_mass,
)
from rotating_trap.core.series_regime import mass_series, regular_part
from rotating_trap.core.transition_regime import (
    default_flux_table,
    interpolate_u0,
    mass_transition,
    small_s0_u0,
)
from rotating_trap.utils.config import DispatchConfig, get_config
from rotating_trap.utils.errors import NoValidRegimeError, UsageError
from rotating_trap.utils.logger import get_logger

logger = get_logger("optimizer", {"component": "optimizer"})

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0
EDGE_MARGIN = 1e-6

MassFunction = Callable[[float], float]


def golden_section_search(
    func: MassFunction, lo: float, hi: float, tol: float = 1e-5
) -> Tuple[float, float]:
    """Minimiser and minimum of a unimodal function on [lo, hi] to width tol."""
    lo, hi = min(lo, hi), max(lo, hi)
    width = hi - lo
    if width <= tol:
        mid = 0.5 * (lo + hi)
        return mid, func(mid)

    steps = int(math.ceil(math.log(tol / width) / math.log(INV_PHI)))
    c = lo + INV_PHI_SQUARE * width
    d = lo + INV_PHI * width
    fc, fd = func(c), func(d)
    for _ in range(steps - 1):
        if fc < fd:
            hi, d, fd = d, c, fc
            width *= INV_PHI
            c = lo + INV_PHI_SQUARE * width
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            width *= INV_PHI
            d = lo + INV_PHI * width
            fd = func(d)
    return (c, fc) if fc < fd else (d, fd)


def local_minima(samples: np.ndarray, values: np.ndarray) -> List[int]:
    """Indices of sampled local minima, endpoints included on one-sided descent."""
    found = []
    n = values.size
    if n == 1:
        return [0]
    if values[0] < values[1]:
        found.append(0)
    for i in range(1, n - 1):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            found.append(i)
    if values[-1] < values[-2]:
        found.append(n - 1)
    return found


def _dispatch(cfg: TrapConfig) -> DispatchConfig:
    dispatch = get_config().dispatch
    if cfg.eps > dispatch.eps_max:
        raise NoValidRegimeError(
            f"eps = {cfg.eps} exceeds {dispatch.eps_max}; no asymptotic regime applies"
        )
    return dispatch


def _u0_correction(s0: float, table: FluxTable) -> float:
    """u0(s0) minus its small-s0 asymptote, ramped to zero below the table."""
    lo, _ = table.s0_range
    if s0 <= 0.0:
        return 0.0
    if s0 < lo:
        edge = float(interpolate_u0(table, lo)) - float(small_s0_u0(lo))
        return edge * s0 / lo
    return float(interpolate_u0(table, s0)) - float(small_s0_u0(s0))


def composite_mass(
    cfg: TrapConfig,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> float:
    """Series mass with the inner correction of the transition regime.

    Keeps the near-boundary structure of the series solution while adding
    the finite-s0 change of the inner constant.
    """
    table = table or default_flux_table()
    correction = _u0_correction(cfg.r0 * cfg.omega0, table)
    # eps * omega is outside the series window here by construction
    outer = math.pi * regular_part(cfg.r0, cfg.omega, trunc) - 0.5 * math.log(cfg.eps)
    return math.pi * (outer + correction)


def mass(
    cfg: TrapConfig,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> Tuple[float, RegimeTag]:
    """Mass from the regime whose validity window contains (omega, eps)."""
    dispatch = _dispatch(cfg)
    if cfg.r0 == 0.0:
        return static_mass(0.0, cfg.eps), RegimeTag.SERIES

    omega0 = cfg.omega0
    if omega0 <= dispatch.series_max:
        value = mass_series(cfg, trunc)
        if cfg.speed >= dispatch.large_omega_min_speed:
            other = mass_large_omega(cfg)
            discrepancy = abs(value - other) / abs(value)
            logger.info(
                "Series and large-omega overlap",
                discrepancy=discrepancy,
                r0=cfg.r0,
                omega=cfg.omega,
            )
            if discrepancy > dispatch.overlap_tol:
                logger.warning(
                    "Regime overlap discrepancy above tolerance",
                    discrepancy=discrepancy,
                    tolerance=dispatch.overlap_tol,
                )
        return value, RegimeTag.SERIES

    if omega0 <= dispatch.transition_max:
        table = table or default_flux_table()
        below_table = cfg.r0 * omega0 < table.s0_range[0]
        if omega0 <= dispatch.composite_omega0_max or below_table:
            return composite_mass(cfg, table, trunc), RegimeTag.COMPOSITE
        return mass_transition(cfg.r0, omega0, table), RegimeTag.TRANSITION

    return fast_regime_mass(cfg), RegimeTag.FAST


def _curve_function(
    omega: float,
    eps: float,
    table: Optional[FluxTable],
    trunc: Optional[SeriesTruncation],
) -> Tuple[MassFunction, RegimeTag, float]:
    """Mass as a function of r0 at fixed omega, its tag and lowest valid r0."""
    template = TrapConfig(r0=0.0, eps=eps, omega=omega)
    dispatch = _dispatch(template)
    omega0 = template.omega0
    if omega0 <= dispatch.series_max:
        return (
            lambda r: mass_series(template.with_r0(r), trunc),
            RegimeTag.SERIES,
            0.0,
        )
    if omega0 <= dispatch.transition_max:
        table = table or default_flux_table()
        if omega0 <= dispatch.composite_omega0_max:
            return (
                lambda r: composite_mass(template.with_r0(r), table, trunc),
                RegimeTag.COMPOSITE,
                0.0,
            )
        lowest = table.s0_range[0] / omega0
        return (
            lambda r: mass_transition(r, omega0, table),
            RegimeTag.TRANSITION,
            lowest,
        )
    return (
        lambda r: fast_regime_mass(template.with_r0(r)),
        RegimeTag.FAST,
        EDGE_MARGIN,
    )


def _speed_function(
    speed: float,
    eps: float,
    table: Optional[FluxTable],
    trunc: Optional[SeriesTruncation],
) -> Tuple[MassFunction, RegimeTag, float]:
    """Mass as a function of r0 with omega = speed / r0 substituted first."""
    dispatch = get_config().dispatch
    if eps > dispatch.eps_max:
        raise NoValidRegimeError(f"eps = {eps} exceeds {dispatch.eps_max}")
    scaled = eps * speed
    if scaled <= dispatch.speed_series_max:
        return (
            lambda r: mass_series(TrapConfig.from_speed(r, eps, speed), trunc),
            RegimeTag.SERIES,
            0.01,
        )
    if scaled <= dispatch.transition_max:
        table = table or default_flux_table()
        return (
            lambda r: mass_transition(r, scaled / r, table),
            RegimeTag.TRANSITION,
            0.01,
        )
    return (
        lambda r: fast_regime_mass(TrapConfig.from_speed(r, eps, speed)),
        RegimeTag.FAST,
        0.01,
    )


def _evaluate(func: MassFunction, grid: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1:
        return np.array([func(float(r)) for r in grid])
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return np.array(list(executor.map(func, (float(r) for r in grid))))


def _scan_grid(lowest: float, eps: float, points: int) -> np.ndarray:
    highest = 1.0 - eps - EDGE_MARGIN
    return np.linspace(max(lowest, 0.0), highest, points)


def _build_curve(
    func: MassFunction, tag: RegimeTag, lowest: float, eps: float, grid=None
) -> MassCurve:
    settings = get_config()
    if grid is None:
        grid = _scan_grid(lowest, eps, settings.dispatch.scan_points)
    grid = np.asarray(grid, dtype=float)
    values = _evaluate(func, grid, settings.runtime.threads)
    minima = [(float(grid[i]), float(values[i])) for i in local_minima(grid, values)]
    return MassCurve(
        r0_samples=grid, mass_values=values, regime_tag=tag, local_minima=minima
    )


def mass_curve(
    cfg: TrapConfig,
    r0_grid: Optional[Sequence[float]] = None,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> MassCurve:
    """Sampled M(r0) at the omega and eps of cfg."""
    func, tag, lowest = _curve_function(cfg.omega, cfg.eps, table, trunc)
    return _build_curve(func, tag, lowest, cfg.eps, r0_grid)


def _optimum_from_curve(
    func: MassFunction, curve: MassCurve, include_centre: Optional[float]
) -> Tuple[float, float, List[Tuple[float, float]]]:
    tol = get_config().dispatch.refine_tol
    grid, values = curve.r0_samples, curve.mass_values
    candidates = []
    for index in local_minima(grid, values):
        if 0 < index < grid.size - 1:
            candidates.append(
                golden_section_search(func, grid[index - 1], grid[index + 1], tol)
            )
        else:
            candidates.append((float(grid[index]), float(values[index])))
    if include_centre is not None and grid[0] > 0.0:
        candidates.append((0.0, include_centre))
    candidates.sort(key=lambda item: item[1])
    best_r0, best_mass = candidates[0]
    return float(best_r0), float(best_mass), [
        (float(r), float(m)) for r, m in candidates[1:]
    ]


def optimal_radius(
    omega: float,
    eps: float,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> OptimumResult:
    """Global minimiser of the dispatched mass over r0 in [0, 1 - eps)."""
    try:
        func, tag, lowest = _curve_function(omega, eps, table, trunc)
        curve = _build_curve(func, tag, lowest, eps)
        centre = static_mass(0.0, eps)
        r0_opt, mass_opt, others = _optimum_from_curve(func, curve, centre)
        if tag is RegimeTag.FAST and r0_opt > 0.0:
            # closed-form first-order condition, sharper than the bracket
            r0_opt = fast_regime_optimal_radius(eps)
            mass_opt = func(r0_opt)
    except Exception:
        logger.exception("optimal_radius failed", omega=omega, eps=eps)
        raise
    logger.info(
        "Optimal radius",
        omega=omega,
        eps=eps,
        r0_opt=r0_opt,
        regime=tag.value,
        n_minima=len(others) + 1,
    )
    return OptimumResult(
        r0_opt=r0_opt,
        mass_at_opt=mass_opt,
        regime_tag=tag,
        competing_minima=others,
        omega=omega,
        eps=eps,
    )


def optimal_radius_curve(
    omega_grid: Sequence[float],
    eps: float,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> List[OptimumResult]:
    """r0_opt(omega) at fixed eps; competing minima are kept per point."""
    grid = np.asarray(omega_grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise UsageError("omega_grid must be positive and increasing")
    return [optimal_radius(float(w), eps, table, trunc) for w in grid]


def exchange_points(
    results: Sequence[OptimumResult], jump: float = 0.1
) -> List[Tuple[float, float]]:
    """Neighbouring grid values between which r0_opt jumps discontinuously."""
    found = []
    for left, right in zip(results[:-1], results[1:]):
        if abs(right.r0_opt - left.r0_opt) > jump:
            key_left = left.omega if left.speed is None else left.speed
            key_right = right.omega if right.speed is None else right.speed
            found.append((float(key_left), float(key_right)))
    return found


def optimal_radius_vs_speed(
    speed_grid: Sequence[float],
    eps: float,
    table: Optional[FluxTable] = None,
    trunc: Optional[SeriesTruncation] = None,
) -> List[OptimumResult]:
    """r0_opt at fixed linear speed s = r0 omega."""
    results = []
    for speed in np.asarray(speed_grid, dtype=float):
        if speed <= 0:
            raise UsageError("speeds must be positive")
        func, tag, lowest = _speed_function(float(speed), eps, table, trunc)
        curve = _build_curve(func, tag, lowest, eps)
        r0_opt, mass_opt, others = _optimum_from_curve(func, curve, None)
        results.append(
            OptimumResult(
                r0_opt=r0_opt,
                mass_at_opt=mass_opt,
                regime_tag=tag,
                competing_minima=others,
                speed=float(speed),
                eps=eps,
            )
        )
    return results
