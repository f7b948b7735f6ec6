"""
Package logger for rmode.

Every module logs through a child of the ``rmode`` logger, so one call to
``configure_logging`` (done by the CLI) sets level and format for the whole
package without touching the root logger of an embedding application.
"""

import logging
import sys
from typing import Optional, TextIO

PACKAGE_LOGGER = "rmode"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Chatty at INFO/DEBUG while plotting or spawning workers.
_QUIET_LOGGERS = ("matplotlib", "PIL", "joblib")

_HANDLER_MARK = "_rmode_handler"


def get_logger(name: str) -> logging.Logger:
    """
    Logger for a module, placed under the ``rmode`` namespace.

    ``__name__`` of package modules is used as is; other names (scripts run
    as ``__main__``) become ``rmode.<name>``.

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.info("Tracing path")
    """
    if name != PACKAGE_LOGGER and not name.startswith(PACKAGE_LOGGER + "."):
        name = f"{PACKAGE_LOGGER}.{name}"
    return logging.getLogger(name)


def configure_logging(
    verbose: bool = False,
    stream: Optional[TextIO] = None,
) -> logging.Handler:
    """
    Send package log records to stderr (or ``stream``).

    DEBUG when verbose, INFO otherwise. A handler installed by an earlier
    call is replaced, so repeated runs in one process never duplicate lines.

    Returns:
        The installed handler
    """
    level = logging.DEBUG if verbose else logging.INFO
    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(level)

    for handler in list(package_logger.handlers):
        if getattr(handler, _HANDLER_MARK, False):
            package_logger.removeHandler(handler)
            handler.close()

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    setattr(handler, _HANDLER_MARK, True)
    package_logger.addHandler(handler)

    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    return handler
