"""Application configuration."""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict

import yaml

from nmsd.core.errors import ConfigError


# Runtime settings
DEBUG = os.getenv("NMSD_DEBUG", "false").lower() == "true"
LOG_LEVEL = "DEBUG" if DEBUG else os.getenv("NMSD_LOG_LEVEL", "WARNING").upper()
DEFAULT_WORKERS = int(os.getenv("NMSD_WORKERS", "1"))

# Estimation defaults
DEFAULT_PENALTY_C = 10.0
DEFAULT_ALPHA = 0.05
DEFAULT_SEED = 20240901

# Numerical tolerances
RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10
VARIANCE_FLOOR = 1e-12
DOMAIN_MARGIN = 1e-12
SUPERCRITICAL_TOL = 1e-8
NEAR_CRITICAL_THETA_PRIME = 1e-6
DEGENERATE_DISTANCE = 1e-6
BISECTION_MAXITER = 200
BRACKET_CEILING = 1e12
KERNEL_GAP_RATIO = 1e-3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Install a single stderr handler on the package logger."""
    logger = logging.getLogger("nmsd")
    logger.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(level.upper())


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Load a simulation configuration file.

    Plain ``key = value`` files are read line by line; anything else is parsed as a
    YAML mapping. Comma-separated values become lists of numbers.

    Args:
        path: Path to the configuration file

    Returns:
        Dictionary of raw configuration values

    Raises:
        ConfigError: If the file is missing or malformed
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")

    lines = [
        line.split("#", 1)[0].strip()
        for line in text.splitlines()
    ]
    lines = [line for line in lines if line]

    if lines and all("=" in line for line in lines):
        values = {}
        for line in lines:
            key, raw = line.split("=", 1)
            values[key.strip()] = _coerce(raw.strip())
        return values

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid config file {path}: {e}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping")
    return {str(k): _coerce(v) if isinstance(v, str) else v for k, v in data.items()}


def _coerce(raw: str) -> Any:
    """Convert a config string to a number, a list of numbers, or a bool."""
    if "," in raw:
        return [_coerce(part.strip()) for part in raw.split(",") if part.strip()]
    lowered = raw.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw
