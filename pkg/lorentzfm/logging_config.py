"""Logging setup for command-line runs.

Library modules only ever call ``logging.getLogger(__name__)``; this
module routes those stdlib records through structlog's formatter so
they come out as key/value or JSON lines.
"""

from __future__ import annotations

import logging

import structlog

_SHARED_PROCESSORS: list[structlog.types.Processor] = [
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    structlog.processors.TimeStamper(fmt="iso", utc=True),
]


def configure_logging(level: str = "INFO", fmt: str = "console") -> None:
    """Install a structlog-rendering handler on the root logger.

    Safe to call more than once; the previous handler is replaced.

    Args:
        level: Log level name (DEBUG, INFO, WARNING, ...).
        fmt: ``console`` or ``json``.
    """
    renderer: structlog.types.Processor
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=_SHARED_PROCESSORS,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )

    handler = logging.StreamHandler()
    handler.setFormatter(formatter)

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
