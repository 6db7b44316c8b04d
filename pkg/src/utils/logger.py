import sys
import logging
from logging.handlers import RotatingFileHandler
from src.utils.constants import LOG_FILE_PATH, LOG_MAX_SIZE, LOG_BACKUP_COUNT, LOG_LEVEL

PACKAGE_LOGGER = "minklab"
FILE_FORMAT = "%(asctime)s %(levelname)-7s %(name)s [%(filename)s:%(lineno)d] %(message)s"
CONSOLE_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_loggers = {}


def _rotating(path, level, formatter):
    handler = RotatingFileHandler(path, maxBytes=LOG_MAX_SIZE, backupCount=LOG_BACKUP_COUNT)
    handler.setFormatter(formatter)
    handler.setLevel(level)
    return handler


def setup_logging(console_level=LOG_LEVEL):
    """Attach the run log, the error log and a stderr console to the package logger.

    Handlers sit on ``minklab`` rather than the root logger; stdout is left to reports.
    """
    LOG_FILE_PATH.parent.mkdir(parents=True, exist_ok=True)
    package = logging.getLogger(PACKAGE_LOGGER)
    package.setLevel(logging.DEBUG)
    for handler in list(package.handlers):
        package.removeHandler(handler)
        handler.close()

    to_file = logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
    package.addHandler(_rotating(LOG_FILE_PATH, logging.DEBUG, to_file))
    package.addHandler(_rotating(LOG_FILE_PATH.parent / "errors.log", logging.ERROR, to_file))

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%H:%M:%S"))
    console.setLevel(getattr(logging, str(console_level).upper(), logging.INFO))
    package.addHandler(console)

    # mpmath and sympy log at debug from inside long solves
    for name in ("mpmath", "sympy", "numexpr"):
        logging.getLogger(name).setLevel(logging.WARNING)
    return package


def get_logger(name):
    """``minklab.<name>``; the first call configures the package handlers."""
    if name not in _loggers:
        if not logging.getLogger(PACKAGE_LOGGER).handlers:
            setup_logging()
        _loggers[name] = logging.getLogger(f"{PACKAGE_LOGGER}.{name}")
    return _loggers[name]
