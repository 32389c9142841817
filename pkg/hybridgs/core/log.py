"""
Logging setup for command-line entry points.
"""
import logging

from hybridgs.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str | None = None, quiet: bool = False) -> None:
    """
    Configure the root logger once for a CLI process.

    Args:
        level: Log level name; defaults to settings.LOG_LEVEL
        quiet: Only show warnings and errors
    """
    if quiet:
        level = "WARNING"
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper()),
        format=LOG_FORMAT,
        force=True,
    )
