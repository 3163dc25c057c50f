"""Logging for SapSim runs.

Every record written through :func:`setup_logging` is stamped with the trial it
belongs to, so the interleaved output of a suite run can be read per controller
and per trial. A trial opens its stamp with :func:`trial_context`.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

DEFAULT_LOG_DIR = "logs"
DEFAULT_LOG_FILE = "sapsim.log"
DEFAULT_MAX_BYTES = 10 * 1024 * 1024  # 10MB
DEFAULT_BACKUP_COUNT = 5
DEFAULT_LOG_LEVEL = "INFO"

LOG_LEVEL_ENV = "SAP_LOG_LEVEL"
LOG_DIR_ENV = "SAP_LOG_DIR"

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(trial_tag)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
NO_TRIAL = "-"

# JIT compilation chatter drowns the control loops at DEBUG
QUIET_LOGGERS = ("numba",)


@dataclass(frozen=True)
class TrialStamp:
    """Identity of the trial a log record was emitted in.

    Attributes:
        controller: Control mode name.
        trial: Trial index within the suite.
        seed: Seed of the start pose and perception noise.
    """

    controller: str
    trial: int
    seed: int | None = None

    @property
    def tag(self) -> str:
        """Compact label, e.g. ``nmpc_ecbf#3/s45``."""
        seed = "" if self.seed is None else f"/s{self.seed}"
        return f"{self.controller}#{self.trial}{seed}"


_current: ContextVar[TrialStamp | None] = ContextVar("sapsim_trial", default=None)


def current_trial() -> TrialStamp | None:
    """The trial being simulated in this context, if any."""
    return _current.get()


@contextmanager
def trial_context(controller: str, trial: int, seed: int | None = None) -> Iterator[TrialStamp]:
    """Stamp every record logged inside the block with one trial."""
    stamp = TrialStamp(controller=str(controller), trial=trial, seed=seed)
    token = _current.set(stamp)
    try:
        yield stamp
    finally:
        _current.reset(token)


class TrialTagFilter(logging.Filter):
    """Adds ``trial_tag`` to records; ``-`` outside a trial."""

    def filter(self, record: logging.LogRecord) -> bool:
        stamp = _current.get()
        record.trial_tag = NO_TRIAL if stamp is None else stamp.tag
        return True


def setup_logging(
    log_dir: str | Path | None = None,
    log_file: str = DEFAULT_LOG_FILE,
    max_bytes: int = DEFAULT_MAX_BYTES,
    backup_count: int = DEFAULT_BACKUP_COUNT,
    level: str | None = None,
    console: bool = True,
) -> logging.Logger:
    """Route the ``sapsim`` loggers to a rotating file and optionally the console.

    Args:
        log_dir: Directory for log files; ``SAP_LOG_DIR`` or ``logs`` when ``None``.
        log_file: Log file name.
        max_bytes: Size at which the file rotates.
        backup_count: Rotated files kept.
        level: DEBUG, INFO, WARNING or ERROR; ``SAP_LOG_LEVEL`` or INFO when ``None``.
        console: Whether to also log to stderr.

    Returns:
        The ``sapsim`` logger.
    """
    if log_dir is None:
        log_dir = os.environ.get(LOG_DIR_ENV, DEFAULT_LOG_DIR)
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL)
    log_level = getattr(logging, level.upper(), logging.INFO)

    logger = logging.getLogger("sapsim")
    logger.setLevel(log_level)
    logger.handlers.clear()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    tagger = TrialTagFilter()

    log_path = log_dir / log_file
    handlers: list[logging.Handler] = [
        RotatingFileHandler(
            log_path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8"
        )
    ]
    if console:
        handlers.append(logging.StreamHandler())
    for handler in handlers:
        handler.setLevel(log_level)
        handler.setFormatter(formatter)
        handler.addFilter(tagger)
        logger.addHandler(handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(log_level, logging.WARNING))

    logger.info("SapSim logging initialized (level=%s, file=%s)", level, log_path)
    return logger


def format_vector(values: ArrayLike, precision: int = 4) -> str:
    """Render a numeric vector compactly for log lines, e.g. ``[0.1000, -2.0000]``."""
    flat = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    return "[" + ", ".join(f"{v:.{precision}f}" for v in flat) + "]"
