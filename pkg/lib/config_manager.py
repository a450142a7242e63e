"""
Project Configuration and Logging

This module finds and loads config.yaml for the QFT-QKD simulator, turns it
into a validated ProjectConfig, resolves the effective RNG seed, and sets up
the package loggers.

Configuration precedence, highest first:
- command line flags
- QFTQKD_SEED environment variable (seed only)
- config.yaml in the project root (searched upward from the working directory)
- built-in defaults below
"""

import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from .errors import ConfigError

CONFIG_FILE_NAME = "config.yaml"
SEED_ENV_VAR = "QFTQKD_SEED"
DEFAULT_SEED = 0
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOGGER_ROOT = "qftqkd"

# config.yaml section -> ProjectConfig field names it may set
_SECTIONS = {
    "simulation": ("seed", "trials", "mismatch_limit", "max_key_qubits"),
    "limits": ("max_qubits", "max_compartment_enumeration", "max_b_space_bits"),
    "tolerances": (
        "norm_tolerance",
        "agreement_floor",
        "sigma",
        "confidence",
    ),
    "analysis": ("statistic", "eve", "model"),
    "output": ("format",),
    "logging": ("level",),
}


@dataclass
class ProjectConfig:
    """Effective project settings"""

    seed: Optional[int] = None
    trials: int = 10000
    mismatch_limit: int = 0
    max_key_qubits: int = 8

    max_qubits: int = 24
    max_compartment_enumeration: int = 20
    max_b_space_bits: int = 16

    norm_tolerance: float = 1e-9
    agreement_floor: float = 1e-3
    sigma: float = 3.0
    confidence: float = 0.95

    statistic: str = "mean"
    eve: str = "keys"
    model: str = "recursion"

    format: str = "csv"
    level: str = "INFO"

    source: Optional[str] = None

    def __post_init__(self):
        """Validate configuration values"""
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.mismatch_limit < 0:
            raise ConfigError(
                f"mismatch_limit must be >= 0, got {self.mismatch_limit}"
            )
        if not 1 <= self.max_qubits <= 24:
            raise ConfigError(f"max_qubits must be in 1..24, got {self.max_qubits}")
        if self.statistic not in ("mean", "min"):
            raise ConfigError(f"statistic must be mean or min, got {self.statistic}")
        if self.model not in ("recursion", "exact"):
            raise ConfigError(f"model must be recursion or exact, got {self.model}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format}")
        if self.norm_tolerance <= 0:
            raise ConfigError(f"norm tolerance must be > 0, got {self.norm_tolerance}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")
        if not isinstance(logging.getLevelName(str(self.level).upper()), int):
            raise ConfigError(f"Unknown logging level: {self.level}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Optional[str] = None):
        """Build a config from the nested config.yaml structure

        Raises:
            ConfigError: on unknown sections/keys or invalid values
        """
        values: Dict[str, Any] = {}
        for section, content in (data or {}).items():
            if section not in _SECTIONS:
                raise ConfigError(f"Unknown config section: {section}")
            if not isinstance(content, dict):
                raise ConfigError(f"Config section '{section}' must be a mapping")
            for key, value in content.items():
                field_name = "norm_tolerance" if key == "norm" else key
                if field_name not in _SECTIONS[section]:
                    raise ConfigError(f"Unknown key '{key}' in section '{section}'")
                values[field_name] = value
        try:
            return cls(source=source, **values)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        """Nested view for show-config"""
        flat = asdict(self)
        nested: Dict[str, Any] = {}
        for section, keys in _SECTIONS.items():
            nested[section] = {k: flat[k] for k in keys}
        return nested


def find_project_root(start: Optional[Path] = None) -> Path:
    """Find the project root directory by looking for config.yaml"""
    current_dir = Path(start or Path.cwd()).resolve()

    for candidate in (current_dir, *current_dir.parents):
        if (candidate / CONFIG_FILE_NAME).exists():
            return candidate

    # If not found, use current directory
    return current_dir


def load_config(config_file: Optional[Path] = None) -> ProjectConfig:
    """Load configuration from config.yaml

    Args:
        config_file: Explicit path. If None, searched upward from the cwd.

    Returns:
        ProjectConfig; defaults when no file exists

    Raises:
        ConfigError: If the file holds invalid YAML or invalid values
    """
    path = Path(config_file) if config_file else find_project_root() / CONFIG_FILE_NAME
    if not path.exists():
        if config_file:
            raise ConfigError(f"Config file not found: {path}")
        return ProjectConfig()

    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in config file {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a mapping")
    return ProjectConfig.from_dict(data, source=str(path))


def resolve_seed(cli_seed: Optional[int], config: ProjectConfig) -> Tuple[int, str]:
    """Pick the effective seed and report where it came from

    Returns:
        (seed, origin) with origin one of cli, env, config, default
    """
    if cli_seed is not None:
        return int(cli_seed), "cli"

    env_value = os.environ.get(SEED_ENV_VAR)
    if env_value not in (None, ""):
        try:
            return int(env_value), "env"
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_value!r}") from e

    if config.seed is not None:
        return int(config.seed), "config"
    return DEFAULT_SEED, "default"


def get_logger(name: str) -> logging.Logger:
    """Module logger under the package root"""
    return logging.getLogger(f"{LOGGER_ROOT}.{name}")


def setup_logging(level: str = "INFO") -> logging.Logger:
    """Setup logging configuration for the package root logger

    Logs go to stderr so CSV/JSON written to stdout stays clean.
    """
    logger = logging.getLogger(LOGGER_ROOT)
    logger.setLevel(level.upper())

    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    return logger
