"""Custom exceptions for the safety package."""

from __future__ import annotations


class SafetyError(Exception):
    """Base exception for low-level control and safety filter errors."""


class SafetyConfigError(SafetyError):
    """Controller gains or force bounds are not admissible."""


class QpInfeasibleError(SafetyError):
    """Barrier, Lyapunov and box rows admit no common input.

    Attributes:
        violated: Name of the row that could not be added.
    """

    def __init__(self, message: str, violated: str = "") -> None:
        super().__init__(message)
        self.violated = violated
