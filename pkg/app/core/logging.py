"""Loguru sink configuration shared by the CLI and the sweep workers."""

import sys
from typing import Optional

from loguru import logger

from app.core.config import get_settings

TEXT_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss} - {name} - {level} - {message}"
)


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Replace loguru's default sink with a single stderr sink.

    Args:
        level: Minimum level; defaults to ``LOG_LEVEL`` from settings.
        fmt: ``text`` or ``json``; defaults to ``LOG_FORMAT`` from settings.
    """
    settings = get_settings()
    level = (level or settings.LOG_LEVEL).upper()
    fmt = fmt or settings.LOG_FORMAT

    logger.remove()
    if fmt == "json":
        logger.add(sys.stderr, level=level, serialize=True)
    else:
        logger.add(sys.stderr, level=level, format=TEXT_FORMAT)
