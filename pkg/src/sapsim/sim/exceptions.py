"""Custom exceptions for the simulation package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    import pandas as pd


class SimulationError(Exception):
    """Base exception for closed-loop simulation errors."""


class SimulationFault(SimulationError):
    """The plant produced a non-finite state; the trial is aborted.

    Attributes:
        tick_log: Rows logged up to the fault, for post-mortem.
    """

    def __init__(self, message: str, tick_log: pd.DataFrame | None = None) -> None:
        super().__init__(message)
        self.tick_log = tick_log


class TrajectoryFormatError(SimulationError):
    """Skeleton trajectory file or array is malformed."""


class EndOfTrajectory(SimulationError):
    """The oracle predictor ran past the recorded frames."""


class MissingLabelError(SimulationError):
    """A trajectory lacks an action label the experiment needs."""
