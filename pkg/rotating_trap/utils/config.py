"""Configuration management for the rotating trap toolkit."""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


class SeriesConfig(BaseModel):
    """Fourier-Bessel series truncation."""

    m_max: int = Field(default=2000, description="Adaptive mode cap")
    tail_tol: float = Field(default=1e-12, description="Relative tail tolerance")
    consecutive_small: int = Field(
        default=4, description="Successive small terms required to stop"
    )
    debye_order: int = Field(
        default=150, description="Order from which uniform expansions are used"
    )
    tail_modes: int = Field(
        default=65536, description="Last mode summed before the zeta remainder"
    )


class InnerSolverConfig(BaseModel):
    """Boundary integral solver for the transition regime."""

    n_nodes: int = Field(default=128, description="Quadrature nodes on the trap")
    nodes_per_s0: float = Field(
        default=8.0, description="Minimum nodes per unit of s0"
    )
    s0_min: float = Field(default=1e-3, description="Smallest tabulated s0")
    s0_max: float = Field(default=60.0, description="Largest tabulated s0")
    s0_count: int = Field(default=121, description="Number of tabulated s0")
    deriv_tol: float = Field(
        default=1e-3, description="Richardson disagreement warning level"
    )


class MonteCarloConfig(BaseModel):
    """Random walk defaults."""

    space_step: float = Field(default=0.02, description="Lattice step")
    n_agents: int = Field(default=1000, description="Agents per start point")
    seed: int = Field(default=20240607, description="Root RNG seed")
    max_steps: int = Field(default=2_000_000, description="Censoring horizon")
    block_steps: int = Field(default=4096, description="Steps drawn per block")


class DispatchConfig(BaseModel):
    """Regime thresholds for the optimizer."""

    series_max: float = Field(default=0.02, description="Series if eps*omega <=")
    transition_max: float = Field(
        default=50.0, description="Transition if eps*omega <="
    )
    large_omega_min_speed: float = Field(
        default=20.0, description="Large-omega diagnostics if r0*omega >="
    )
    large_omega_eps_omega_warn: float = Field(
        default=0.1, description="Large-omega validity warning above eps*omega"
    )
    overlap_tol: float = Field(
        default=0.05, description="Relative overlap discrepancy that is logged"
    )
    composite_omega0_max: float = Field(
        default=2.0, description="Composite exchange mass if omega0 <="
    )
    speed_series_max: float = Field(
        default=0.1, description="Speed curves use the series if eps*s <="
    )
    eps_max: float = Field(default=0.2, description="Largest admissible eps")
    scan_points: int = Field(default=200, description="Coarse scan size")
    refine_tol: float = Field(default=1e-5, description="Golden-section tolerance")


class RuntimeConfig(BaseModel):
    """Parallel execution."""

    threads: int = Field(default=4, description="Worker threads")


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(default="console", description="json or console")
    file: Optional[str] = Field(default=None, description="Optional log file")


class Settings(BaseSettings):
    """Main configuration class."""

    model_config = SettingsConfigDict(
        env_file=".env", env_nested_delimiter="__", extra="ignore"
    )

    environment: str = Field(default="development", description="Environment")
    series: SeriesConfig = Field(default_factory=SeriesConfig)
    inner_solver: InnerSolverConfig = Field(default_factory=InnerSolverConfig)
    monte_carlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    dispatch: DispatchConfig = Field(default_factory=DispatchConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


class ConfigManager:
    """Configuration manager for loading and managing configurations."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize config manager.

        Args:
            config_path: Path to configuration file
        """
        self.config_path = config_path
        self._config: Optional[Settings] = None
        self._config_data: Dict[str, Any] = {}

    def load_config(self, config_file: Optional[str] = None) -> Settings:
        """Load configuration from a YAML file.

        A missing default file is not an error: built-in defaults apply.
        An explicitly requested file must exist.
        """
        if config_file:
            self.config_path = config_file
            config_path = Path(config_file)
            if not config_path.exists():
                raise FileNotFoundError(f"Configuration file not found: {config_path}")
        else:
            env = os.getenv("ENVIRONMENT", "development")
            config_path = DEFAULT_CONFIG_DIR / f"{env}.yaml"

        self._config_data = {}
        if config_path.exists():
            with open(config_path, "r") as file:
                self._config_data = yaml.safe_load(file) or {}

        self._merge_env_vars()
        self._config = Settings(**self._config_data)
        return self._config

    def _merge_env_vars(self) -> None:
        """Merge environment variables into config."""
        threads = os.getenv("ROTATING_TRAP_THREADS")
        if threads:
            self._config_data.setdefault("runtime", {})["threads"] = int(threads)

        level = os.getenv("ROTATING_TRAP_LOG_LEVEL")
        if level:
            self._config_data.setdefault("logging", {})["level"] = level

        seed = os.getenv("ROTATING_TRAP_SEED")
        if seed:
            self._config_data.setdefault("monte_carlo", {})["seed"] = int(seed)

        self._config_data["environment"] = os.getenv(
            "ENVIRONMENT", self._config_data.get("environment", "development")
        )

    @property
    def config(self) -> Settings:
        """Get current configuration."""
        if self._config is None:
            self.load_config(self.config_path)
        if self._config is None:
            raise RuntimeError("Failed to load configuration")
        return self._config

    def reload_config(self) -> Settings:
        """Reload configuration from file."""
        self._config = None
        return self.config

    def apply_overrides(self, overrides: Dict[str, Any]) -> Settings:
        """Apply dotted ``section.key`` overrides on top of the loaded values.

        Values are validated by the settings models, so strings from a
        key = value file are coerced to the declared field types.
        """
        data = self.config.model_dump()
        for dotted, value in overrides.items():
            section, _, key = dotted.partition(".")
            if not key or section not in data or not isinstance(data[section], dict):
                raise KeyError(f"Unknown configuration key: {dotted}")
            if key not in data[section]:
                raise KeyError(f"Unknown configuration key: {dotted}")
            data[section][key] = value
        self._config = Settings(**data)
        return self._config

    def get_section(self, section: str) -> Dict[str, Any]:
        """Get a configuration section as a plain dictionary."""
        section_data = self.config.model_dump().get(section, {})
        return section_data if isinstance(section_data, dict) else {}


config_manager = ConfigManager()


def get_config() -> Settings:
    """Get global configuration instance."""
    return config_manager.config


def load_config(config_file: str) -> Settings:
    """Load configuration from specific file."""
    return config_manager.load_config(config_file)
