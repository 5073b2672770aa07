import logging
import os
import sys
from pathlib import Path
from datetime import datetime

import colorlog

LEVEL_COLORS = {
    "DEBUG": "blue",
    "INFO": "yellow",
    "WARNING": "green",
    "ERROR": "red",
    "CRITICAL": "bold_red",
}

_DEFAULT_LOG_DIR = "logs"


def _console_level(level: int) -> int:
    """Environment override wins over the caller's default"""
    env_level = os.getenv("ONEBIT_ISAC_LOG_LEVEL")
    if not env_level:
        return level
    resolved = logging.getLevelName(env_level.upper())
    return resolved if isinstance(resolved, int) else level


def setup_logger(name: str = __name__, level: int = logging.INFO) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    if logger.handlers:
        return logger

    console_formatter = colorlog.ColoredFormatter(
        "%(log_color)s%(levelname)s%(reset)s - %(blue)s%(name)s%(reset)s - %(white)s%(message)s",
        log_colors=LEVEL_COLORS,
    )

    # stdout carries CSV/JSON data, so the console handler goes to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(_console_level(level))
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    logs_dir_name = os.getenv("ONEBIT_ISAC_LOG_DIR", _DEFAULT_LOG_DIR)
    if logs_dir_name:
        logs_dir = Path(logs_dir_name)
        logs_dir.mkdir(parents=True, exist_ok=True)

        file_formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        log_filename = logs_dir / f"onebit_isac_{datetime.now().strftime('%Y%m%d')}.log"
        file_handler = logging.FileHandler(log_filename, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def set_console_level(level: int) -> None:
    """Lower or raise the console level of every logger created so far (--verbose)"""
    for logger in logging.Logger.manager.loggerDict.values():
        if not isinstance(logger, logging.Logger):
            continue
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(level)
