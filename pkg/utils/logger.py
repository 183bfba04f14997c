import logging
import sys

logger = logging.getLogger("discord_flicker")
logger.setLevel(logging.WARNING)

ch = logging.StreamHandler(sys.stderr)
ch.setLevel(logging.DEBUG)

formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
ch.setFormatter(formatter)

if not logger.hasHandlers():
    logger.addHandler(ch)


def set_level(level):
    """Accepts a logging level name ("DEBUG", "info", ...) or number."""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            raise ValueError(f"Unknown log level: {level}")
    logger.setLevel(level)


def log_error(msg):
    logger.error(msg)


def log_warning(msg):
    logger.warning(msg)


def log_info(msg):
    logger.info(msg)


def log_debug(msg):
    logger.debug(msg)
