"""Custom exceptions for the planner package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from sapsim.solver.models import SolverOutcome


class PlannerError(Exception):
    """Base exception for NMPC planning errors."""


class PlannerConfigError(PlannerError):
    """Horizon, weights or bounds are not admissible."""


class PlannerInputError(PlannerError):
    """Planner input does not match the horizon or the chain."""


class PlanningFailedError(PlannerError):
    """The solver hit a numerical failure; the caller commands zero velocity.

    Attributes:
        outcome: Solver outcome of the failed solve.
    """

    def __init__(self, message: str, outcome: SolverOutcome) -> None:
        super().__init__(message)
        self.outcome = outcome
