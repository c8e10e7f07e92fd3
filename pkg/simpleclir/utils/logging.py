"""Logging configuration for the simpleclir package."""

import logging
import sys

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(name: str, level: str | None = None) -> logging.Logger:
    """Set up a logger with consistent formatting.

    Module loggers (``simpleclir.*``) propagate to the package logger, so only the
    package logger gets a handler; a level is only set when given explicitly.

    Args:
        name: Name of the logger, typically __name__ of the module
        level: Logging level ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    is_root = name == "simpleclir" or not name.startswith("simpleclir.")
    if is_root and not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)

    if level is not None:
        logger.setLevel(getattr(logging, level.upper()))

    return logger


def set_level(level: str) -> None:
    """Change the level of the package logger (used by the command line)."""
    logging.getLogger("simpleclir").setLevel(getattr(logging, level.upper()))


# Create package-level logger
logger = setup_logger("simpleclir", "INFO")
