"""Numerical core: special functions, regimes, simulation and optimisation."""

__all__ = [
    "special_functions",
    "quadrature",
    "models",
    "monte_carlo",
    "reference_solutions",
    "series_regime",
    "bifurcation",
    "large_omega",
    "transition_regime",
    "optimizer",
]
