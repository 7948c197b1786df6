"""
Logging setup for the fracdiff service.

Provides helpers that build loggers for the CLI and for library components.
"""

import os
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional, Union

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logger(
    logger_name: str,
    log_level: Union[str, int] = logging.INFO,
    log_file: Optional[str] = None,
    console: bool = True,
    log_format: str = DEFAULT_FORMAT,
    max_bytes: int = 10485760,  # 10 MB
    backup_count: int = 5,
) -> logging.Logger:
    """
    Configure and return a logger.

    Args:
        logger_name (str): Logger name.
        log_level (Union[str, int]): Level name or ``logging`` constant.
        log_file (Optional[str]): Log file path; console only when None.
        console (bool): Also log to stderr.
        log_format (str): Record format.
        max_bytes (int): Rotation threshold in bytes.
        backup_count (int): Number of rotated files kept.

    Returns:
        logging.Logger: The configured logger.
    """
    if isinstance(log_level, str):
        log_level = getattr(logging, log_level.upper(), logging.INFO)

    logger = logging.getLogger(logger_name)
    logger.setLevel(log_level)

    # Replace whatever a previous setup installed
    logger.handlers = []

    formatter = logging.Formatter(log_format)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)

        file_handler = RotatingFileHandler(
            log_file, maxBytes=max_bytes, backupCount=backup_count
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    if console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger


def setup_service_logger(config: Dict[str, Any]) -> logging.Logger:
    """
    Configure the ``fracdiff`` package logger from a configuration dictionary.

    Args:
        config (Dict[str, Any]): Configuration values (see config/default.yaml).

    Returns:
        logging.Logger: The package logger.
    """
    log_level = config.get("log_level", "INFO")
    log_file = config.get("log_file")

    if not log_file and config.get("log_dir"):
        log_dir = config["log_dir"]
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        log_file = os.path.join(log_dir, "fracdiff.log")

    return setup_logger(
        logger_name="fracdiff",
        log_level=log_level,
        log_file=log_file,
        console=config.get("console_logs", True),
        log_format=config.get("log_format", DEFAULT_FORMAT),
        max_bytes=config.get("log_max_bytes", 10485760),
        backup_count=config.get("log_backup_count", 5),
    )


def command_logger(command: str) -> logging.Logger:
    """
    Child logger for one CLI command, e.g. ``fracdiff.cli.solve_stefan``.

    Records propagate to the handlers installed by ``setup_service_logger``, and the
    command shows up in the ``%(name)s`` field of every line it writes.
    """
    return logging.getLogger(f"fracdiff.cli.{command.replace('-', '_')}")
