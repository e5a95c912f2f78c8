import logging
import sys
from logging.handlers import RotatingFileHandler

from constants import LOG_LEVEL, LOGS_DIR

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s [in %(pathname)s:%(lineno)d]"


def get_logger(name: str, level: int | str = LOG_LEVEL) -> logging.Logger:
    """
    Create and configure a RotatingFileHandler logger with the given name and log level.
    Max bytes in one log file is 10 Mb. Repeated calls with the same name reuse the handler.

    Args:
        name (str): The name of the logger.
        level (int | str, optional): The log level for the logger. Defaults to LOG_LEVEL.

    Returns:
        logging.Logger: The configured logger.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    if any(isinstance(handler, RotatingFileHandler) for handler in logger.handlers):
        return logger

    LOGS_DIR.mkdir(parents=True, exist_ok=True)
    file_path = LOGS_DIR / f"{name}.log"
    file_handler = RotatingFileHandler(file_path.as_posix(), maxBytes=10 * 1024 * 1024, backupCount=10)
    file_handler.setFormatter(logging.Formatter(_FORMAT))
    file_handler.setLevel(level)
    logger.addHandler(file_handler)
    return logger


def enable_console(level: int | str = logging.INFO) -> None:
    """
    Mirrors every record of the root logger hierarchy to stderr.

    Args:
        level (int | str, optional): Minimal level printed to stderr. Defaults to INFO.
    """
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler.setLevel(level)
    logging.getLogger().addHandler(handler)
