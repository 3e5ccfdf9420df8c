"""Structured logging configuration."""

import logging
import sys
from typing import Any, List, Optional, TextIO

import structlog

from .settings import get_settings

RENDERERS = {
    "json": lambda: structlog.processors.JSONRenderer(sort_keys=True),
    "console": lambda: structlog.dev.ConsoleRenderer(colors=False),
}


def _processors(log_format: str) -> List[Any]:
    chain: List[Any] = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.format_exc_info,
    ]
    chain.append(RENDERERS.get(log_format.lower(), RENDERERS["console"])())
    return chain


def configure_logging(stream: Optional[TextIO] = None) -> None:
    """Route structlog through stdlib logging at the configured level.

    Records go to ``stream`` (stderr by default) so stdout carries only
    command output. Safe to call again after settings change.
    """
    settings = get_settings()
    level_name = "DEBUG" if settings.debug else settings.log_level.upper()

    structlog.configure(
        processors=_processors(settings.log_format),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    logging.basicConfig(
        format="%(message)s",
        stream=stream or sys.stderr,
        level=getattr(logging, level_name, logging.INFO),
        force=True,
    )
