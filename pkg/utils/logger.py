"""
Logging Module

Provides consistent logging across the toolkit. Console output goes to
stderr so CSV on stdout stays machine-readable.
"""

import logging
import os
import sys
from colorama import Fore, Style, init

sys.path.append('..')
from config.settings import LOGGING_SETTINGS

# Initialize colorama for Windows
init()


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for different log levels."""

    COLORS = {
        'DEBUG': Fore.CYAN,
        'INFO': Fore.GREEN,
        'WARNING': Fore.YELLOW,
        'ERROR': Fore.RED,
        'CRITICAL': Fore.RED + Style.BRIGHT
    }

    def format(self, record):
        record = logging.makeLogRecord(record.__dict__)
        color = self.COLORS.get(record.levelname, '')
        record.levelname = f"{color}{record.levelname}{Style.RESET_ALL}"
        return super().format(record)


def resolve_level(level: str = None) -> str:
    """Pick the log level: explicit argument, then env var, then settings."""
    if level:
        return level.upper()
    env_level = os.environ.get(LOGGING_SETTINGS['log_level_env'])
    if env_level:
        return env_level.upper()
    return LOGGING_SETTINGS['log_level'].upper()


def get_logger(name: str, level: str = None, log_file: str = None) -> logging.Logger:
    """
    Get a configured logger.

    Args:
        name: Logger name (usually __name__)
        level: Log level (DEBUG, INFO, WARNING, ERROR); env/settings if None
        log_file: Optional file to write logs to

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Only configure if not already configured
    if not logger.handlers:
        logger.setLevel(getattr(logging, resolve_level(level), logging.INFO))
        logger.propagate = False

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(ColoredFormatter(
            '%(asctime)s | %(levelname)s | %(name)s | %(message)s',
            datefmt='%H:%M:%S'
        ))
        logger.addHandler(console_handler)

        if log_file is None and LOGGING_SETTINGS['log_to_file']:
            log_file = LOGGING_SETTINGS['log_file']
        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s | %(levelname)s | %(name)s | %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            ))
            logger.addHandler(file_handler)

    return logger


def set_level(level: str):
    """Change the level of every toolkit logger that is already configured."""
    numeric = getattr(logging, level.upper(), logging.INFO)
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and logger.handlers:
            logger.setLevel(numeric)


def log_run(logger: logging.Logger, subcommand: str, **fields):
    """Log the start of an experiment run."""
    logger.info(
        f"▶ {subcommand} | "
        f"{' | '.join(f'{k}: {v}' for k, v in fields.items())}"
    )


def log_check(logger: logging.Logger, name: str, passed: bool, **fields):
    """Log an acceptance-style check with a pass/fail marker."""
    marker = "✅" if passed else "❌"
    message = (
        f"{marker} {name} | "
        f"{' | '.join(f'{k}: {v}' for k, v in fields.items())}"
    )
    if passed:
        logger.info(message)
    else:
        logger.warning(message)
