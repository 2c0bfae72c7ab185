"""
Utility functions for Pickands Lab.
"""

import math
import sys
from pathlib import Path
from typing import Iterable, Optional
from loguru import logger

from .exceptions import ConfigError


def setup_logging(log_level: str = "WARNING", log_file: Optional[str] = None) -> None:
    """
    Setup logging configuration for the laboratory.

    Reports go to stdout, so the console sink writes to stderr.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path
    """
    # Remove default logger
    logger.remove()

    # Add console logger
    logger.add(
        sys.stderr,
        level=log_level,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
               "<level>{level: <8}</level> | "
               "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
               "<level>{message}</level>",
        colorize=True
    )

    # Add file logger if specified
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        logger.add(
            log_file,
            level=log_level,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            rotation="1 day",
            retention="30 days",
            compression="zip"
        )


def ensure_parent_directory(path: str) -> Path:
    """
    Ensure the directory holding `path` exists.

    Args:
        path: File path whose parent directory is needed

    Returns:
        Path: The file path as a Path object
    """
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    return file_path


def require_finite(name: str, value: float) -> float:
    """Reject NaN and infinities with a ConfigError naming the argument."""
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")
    return float(value)


def require_positive(name: str, value: float) -> float:
    """Reject non-positive (or non-finite) values."""
    require_finite(name, value)
    if value <= 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return float(value)


def require_alpha(alpha: float) -> float:
    """Check the index of the local covariance condition, 0 < alpha <= 2."""
    require_finite("alpha", alpha)
    if not 0.0 < alpha <= 2.0:
        raise ConfigError(f"alpha must lie in (0, 2], got {alpha}")
    return float(alpha)


def compensated_mean(values: Iterable[float], count: int) -> float:
    """
    Mean computed with exactly rounded summation.

    Args:
        values: Values to average, consumed in order
        count: Number of values

    Returns:
        float: fsum(values) / count
    """
    return math.fsum(values) / count
