"""
Logging setup for the antisymmetric bounds toolkit

Reports are written to stdout, so every human-facing log line goes to stderr
(and optionally to a dated file under the configured logs directory).
"""

import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, Optional

FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CONSOLE_FORMAT = '%(levelname)s - %(message)s'


def _level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown logging level: {name}")
    return level


def setup_logging(log_dir: Optional[str] = None, log_level: str = 'INFO', console_level: str = 'WARNING'):
    """
    Configure the root logger

    Args:
        log_dir (str): Directory for verification_YYYYMMDD.log (None keeps logging console-only)
        log_level (str): Root logging level (DEBUG, INFO, WARNING, ERROR)
        console_level (str): Level of the stderr handler

    Returns:
        logging.Logger: Configured root logger
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(_level(log_level))
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(_level(console_level))
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    root_logger.addHandler(console_handler)

    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        log_file = log_path / f"verification_{datetime.now().strftime('%Y%m%d')}.log"

        # file keeps everything
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
        root_logger.addHandler(file_handler)

    return root_logger


def get_logger(name):
    """
    Get a module logger

    Example:
        from utils.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Choi construction started")
    """
    return logging.getLogger(name)


@contextmanager
def log_elapsed(logger: logging.Logger, label: str) -> Iterator[None]:
    """Log wall time of a block at INFO; failures are logged by the caller"""
    start = time.perf_counter()
    yield
    logger.info(f"  ⏱ {label}: {time.perf_counter() - start:.2f}s")


if not logging.getLogger().handlers:
    setup_logging()
