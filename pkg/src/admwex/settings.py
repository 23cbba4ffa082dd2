"""
Runtime settings read from the environment.

Values come from ``config/.env`` (if present) and the process environment.
"""

import os
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError

logger = logging.getLogger(__name__)

ENV_PATH = Path(__file__).resolve().parent.parent.parent / 'config' / '.env'


@dataclass(frozen=True)
class Settings:
    threads: int = 1
    log_level: str = "INFO"
    out_dir: Optional[Path] = None


def parse_log_level(raw: str) -> str:
    """Normalize a logging level name; unknown names raise ConfigError."""
    level = raw.strip().upper()
    # logging.getLevelNamesMapping() is 3.11+; it returns a copy of _nameToLevel.
    names = logging.getLevelNamesMapping() if hasattr(logging, "getLevelNamesMapping") else logging._nameToLevel
    if level not in names:
        raise ConfigError(f"Unknown log level {raw!r}")
    return level


def parse_threads(raw: str) -> int:
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"ADMWEX_THREADS must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError(f"ADMWEX_THREADS must be at least 1, got {threads}")
    return threads


def load_settings(env_path: Optional[Path] = None) -> Settings:
    """
    Load settings from the .env file and the environment.

    Args:
        env_path: Alternative .env location (defaults to config/.env)

    Returns:
        Settings instance

    Raises:
        ConfigError: ADMWEX_THREADS is not an integer >= 1 or ADMWEX_LOG_LEVEL is unknown
    """
    env_path = env_path or ENV_PATH
    if env_path.exists():
        load_dotenv(dotenv_path=env_path)
        logger.debug(f"Environment variables loaded from {env_path}")

    raw_threads = os.getenv("ADMWEX_THREADS")
    out_dir = os.getenv("ADMWEX_OUT_DIR")
    return Settings(
        threads=parse_threads(raw_threads) if raw_threads else 1,
        log_level=parse_log_level(os.getenv("ADMWEX_LOG_LEVEL") or "INFO"),
        out_dir=Path(out_dir) if out_dir else None,
    )
