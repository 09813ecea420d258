"""
canon-szego — Config
Environment-driven defaults (threads, tolerances, logging, output dir).
"""

import logging
import os

from dotenv import load_dotenv

from tools.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_THREADS = 1
DEFAULT_TOL = 1e-10
DEFAULT_QUAD_TOL = 1e-9
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_OUTPUT_DIR = "output"


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("%s=%r is not an integer, using %d", name, raw, default)
        return default
    if value < minimum:
        logger.warning("%s=%d is below %d, using %d", name, value, minimum, default)
        return default
    return value


def _tol_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        logger.warning("%s=%r is not a number, using %g", name, raw, default)
        return default
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {raw}")
    return value


def thread_count() -> int:
    """Worker pool size for grid sweeps (CANON_SZEGO_THREADS)."""
    return _int_env("CANON_SZEGO_THREADS", DEFAULT_THREADS)


def weyl_tol() -> float:
    return _tol_env("CANON_SZEGO_TOL", DEFAULT_TOL)


def quad_tol() -> float:
    return _tol_env("CANON_SZEGO_QUAD_TOL", DEFAULT_QUAD_TOL)


def log_level() -> int:
    raw = os.getenv("CANON_SZEGO_LOG_LEVEL", DEFAULT_LOG_LEVEL).strip().upper()
    level = logging.getLevelName(raw)
    if not isinstance(level, int):
        logger.warning("CANON_SZEGO_LOG_LEVEL=%r is unknown, using %s", raw, DEFAULT_LOG_LEVEL)
        return logging.WARNING
    return level


def output_dir() -> str:
    return os.getenv("CANON_SZEGO_OUTPUT_DIR", DEFAULT_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR


def as_dict() -> dict:
    """Snapshot of the effective configuration."""
    return {
        "threads": thread_count(),
        "tol": weyl_tol(),
        "quad_tol": quad_tol(),
        "log_level": logging.getLevelName(log_level()),
        "output_dir": output_dir(),
    }


if __name__ == "__main__":
    for key, value in as_dict().items():
        print(f"{key}: {value}")
