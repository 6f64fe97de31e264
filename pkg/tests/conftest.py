"""Test configuration and fixtures."""

import numpy as np
import pytest

from rotating_trap.core.models import (
    InnerSolverParams,
    SeriesTruncation,
    TrapConfig,
    WalkParams,
)
from rotating_trap.core.transition_regime import FluxTableBuilder
from rotating_trap.utils.config import config_manager


@pytest.fixture(autouse=True)
def fresh_config():
    """Reload the default configuration around every test."""
    config_manager.reload_config()
    yield
    config_manager.reload_config()


@pytest.fixture
def series_trunc():
    """Series truncation used by most regime tests."""
    return SeriesTruncation(m_max=2000, tail_tol=1e-12)


@pytest.fixture
def slow_trap():
    """Trap in the series regime."""
    return TrapConfig(r0=0.4, eps=0.01, omega=1.0)


@pytest.fixture
def fast_trap():
    """Trap well inside the large-omega window."""
    return TrapConfig(r0=0.5, eps=1e-4, omega=1000.0)


@pytest.fixture
def small_inner_params():
    """Coarse inner solver grid that still resolves the kernel."""
    return InnerSolverParams(
        n_nodes=64,
        s0_grid=tuple(np.geomspace(1e-3, 50.0, 41).tolist()),
        nodes_per_s0=8.0,
    )


@pytest.fixture(scope="session")
def flux_table():
    """u0 table shared by the transition and optimizer tests."""
    params = InnerSolverParams(
        n_nodes=64,
        s0_grid=tuple(np.geomspace(1e-3, 60.0, 49).tolist()),
        nodes_per_s0=8.0,
    )
    return FluxTableBuilder(params, threads=2).build()


@pytest.fixture
def interval_walk():
    """Lattice containing the trap at 1/2 with unit diffusivity."""
    return WalkParams.for_diffusivity(0.01, 1.0, dim=1, n_agents=5000, seed=11)


@pytest.fixture
def circle_walk():
    """Circle walk with diffusivity 1/2."""
    return WalkParams.for_diffusivity(0.01, 0.5, dim=1, n_agents=500, seed=5)
