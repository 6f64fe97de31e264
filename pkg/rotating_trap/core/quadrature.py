"""Disk quadrature: Gauss-Legendre in r (split at kinks) times trapezoid in theta.

Independent of the mode sums, these rules integrate fields directly and
serve as the check on the closed-form masses in the test suite.
"""

from typing import Callable, Iterable, Tuple

import numpy as np

from rotating_trap.utils.logger import get_logger

logger = get_logger("quadrature", {"component": "quadrature"})


def radial_nodes(
    splits: Iterable[float] = (), n_radial: int = 32
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals of f(r) r dr over [0, 1].

    Each interval between consecutive split radii gets its own
    Gauss-Legendre rule so that kinks at the splits cost no accuracy.
    """
    edges = sorted({0.0, 1.0, *(float(s) for s in splits if 0.0 < s < 1.0)})
    base_x, base_w = np.polynomial.legendre.leggauss(n_radial)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        r = lo + half * (base_x + 1.0)
        nodes.append(r)
        weights.append(half * base_w * r)
    return np.concatenate(nodes), np.concatenate(weights)


def radial_integral(
    func: Callable[[np.ndarray], np.ndarray],
    splits: Iterable[float] = (),
    n_radial: int = 32,
) -> float:
    """2 pi * integral of a radially symmetric f(r) over the unit disk."""
    r, w = radial_nodes(splits, n_radial)
    return float(2.0 * np.pi * np.sum(w * np.asarray(func(r), dtype=float)))


def disk_quadrature(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    splits: Iterable[float] = (),
    n_radial: int = 32,
    n_angular: int = 256,
) -> float:
    """Integral of f(r, theta) over the unit disk on a tensor-product grid."""
    r, w = radial_nodes(splits, n_radial)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    values = np.asarray(func(rr, tt), dtype=float)
    return float(np.sum(w[:, None] * values) * 2.0 * np.pi / n_angular)


def converged_disk_quadrature(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    splits: Iterable[float] = (),
    tol: float = 1e-7,
    n_radial: int = 24,
    n_angular: int = 128,
    max_doublings: int = 5,
) -> float:
    """Disk quadrature with resolution doubled until two results agree to tol."""
    splits = tuple(splits)
    previous = disk_quadrature(func, splits, n_radial, n_angular)
    for _ in range(max_doublings):
        n_radial *= 2
        n_angular *= 2
        current = disk_quadrature(func, splits, n_radial, n_angular)
        if abs(current - previous) < tol:
            return current
        previous = current
    logger.warning(
        "Disk quadrature did not stabilise",
        tol=tol,
        n_radial=n_radial,
        n_angular=n_angular,
    )
    return previous
