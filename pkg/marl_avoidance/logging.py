# marl_avoidance/logging.py
import logging
from pathlib import Path
from typing import Optional, Union

from colorlog import ColoredFormatter

# Initialize logger without handlers
logger = logging.getLogger("marl-avoidance")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s - %(funcName)s - line %(lineno)d - %(message)s"


def setup_logging(
    verbose: bool = False,
    verbose_level: str = "INFO",
    log_file: Optional[Union[str, Path]] = None,
) -> logging.Logger:
    global logger

    # Clear any existing handlers
    logger.handlers.clear()
    formatter = ColoredFormatter(
        "%(log_color)s%(asctime)s%(reset)s - %(name)s - %(log_color)s%(levelname)s%(reset)s - %(filename)s - %(funcName)s - line %(lineno)d - %(message)s",
        datefmt=None,
        reset=True,
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    )

    handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    # Training runs also keep an uncoloured copy next to their artifacts
    if log_file is not None:
        attach_file_handler(log_file)

    if verbose:
        level = logging.getLevelName(verbose_level.upper())
        logger.setLevel(level if isinstance(level, int) else logging.INFO)
    else:
        logger.setLevel(logging.WARNING)

    return logger


def detach_file_handlers() -> None:
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            handler.close()
            logger.removeHandler(handler)


def attach_file_handler(log_file: Union[str, Path]) -> logging.Handler:
    file_handler = logging.FileHandler(log_file, mode="w")
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(file_handler)
    return file_handler
