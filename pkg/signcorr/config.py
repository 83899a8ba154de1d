"""
Runtime settings and flat config-file handling.

Settings are read from the environment at call time so that tests and the
CLI can override them without reloading modules.
"""

import logging
import os
import re
from pathlib import Path
from typing import Dict, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_CACHE_DIR = os.path.join("results", "cache")

# Block length used when splitting [0, N) across workers. Fixed, so the block
# layout never depends on the worker count.
BLOCK_SIZE = 1 << 16


def worker_threads() -> int:
    """Worker cap from SIGNCORR_THREADS, hardware default when unset."""
    raw = os.getenv("SIGNCORR_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"SIGNCORR_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"SIGNCORR_THREADS must be a positive integer, got {raw!r}")
    return value


def log_level() -> str:
    return os.getenv("SIGNCORR_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def output_dir() -> Path:
    return Path(os.getenv("SIGNCORR_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))


def cache_dir() -> Path:
    return Path(os.getenv("SIGNCORR_CACHE_DIR", DEFAULT_CACHE_DIR))


_LINE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_-]*)\s*=\s*(.*?)\s*$")


def read_config_file(path: str) -> Dict[str, str]:
    """
    Parse a flat ``key = value`` config file.

    Keys are normalized to CLI destination names (dashes become
    underscores). Blank lines and ``#`` comments are ignored; a repeated key
    keeps its last value.
    """
    values: Dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0]
        if not stripped.strip():
            continue
        match = _LINE.match(stripped)
        if match is None:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = match.group(1).replace("-", "_").lower(), match.group(2)
        values[key] = value

    logger.info(f"Loaded {len(values)} settings from {path}")
    return values


def resolve_threads(requested: Optional[int]) -> int:
    """Explicit request wins, otherwise the environment cap."""
    if requested is not None:
        if requested < 1:
            raise ConfigError(f"threads must be >= 1, got {requested}")
        return requested
    return worker_threads()
