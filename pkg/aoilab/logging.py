"""Logging for aoilab.

Everything logs under the "aoilab" logger, which gets one stderr handler and
does not propagate. AOILAB_LOG_LEVEL picks the level (WARNING by default) and
AOILAB_LOG_JSON switches the handler to one JSON object per line, so sweep
workers can be grepped by rho, policy or seed.
"""

import json
import logging
import os
from datetime import UTC, datetime
from typing import Any

_PACKAGE = "aoilab"
_TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
_TEXT_DATEFMT = "%Y-%m-%d %H:%M:%S"
_TRUTHY = {"1", "true", "yes", "on"}

# Attributes every LogRecord has; anything else came in through extra=
_RECORD_ATTRS = frozenset(logging.makeLogRecord({}).__dict__) | {"message", "asctime", "taskName"}


class JSONFormatter(logging.Formatter):
    """One JSON object per record, with extra= fields merged at the top level."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, UTC).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update({k: v for k, v in record.__dict__.items() if k not in _RECORD_ATTRS})
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


def _get_log_level() -> int:
    """Level named by AOILAB_LOG_LEVEL, WARNING when unset or unknown."""
    name = os.getenv("AOILAB_LOG_LEVEL", "WARNING").strip().upper()
    level = logging.getLevelNamesMapping().get(name)
    return level if level is not None else logging.WARNING


def _make_formatter(json_output: bool) -> logging.Formatter:
    return JSONFormatter() if json_output else logging.Formatter(_TEXT_FORMAT, datefmt=_TEXT_DATEFMT)


def _package_logger() -> logging.Logger:
    logger = logging.getLogger(_PACKAGE)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(_make_formatter(os.getenv("AOILAB_LOG_JSON", "").strip().lower() in _TRUTHY))
        logger.addHandler(handler)
        logger.setLevel(_get_log_level())
        logger.propagate = False
    return logger


def configure_logging(level: int | None = None, json_output: bool | None = None) -> None:
    """Adjust the package logger after import, e.g. for --verbose.

    Args:
        level: New level, or None to keep the current one
        json_output: True for JSON records, False for text, None to keep the current formatter
    """
    logger = _package_logger()
    if level is not None:
        logger.setLevel(level)
    if json_output is not None:
        for handler in logger.handlers:
            handler.setFormatter(_make_formatter(json_output))


def get_logger(name: str) -> logging.Logger:
    """Get a module logger under the aoilab package logger.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    _package_logger()
    return logging.getLogger(name)


_package_logger()
