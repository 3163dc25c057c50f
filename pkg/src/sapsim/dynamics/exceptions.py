"""Custom exceptions for the dynamics package."""


class DynamicsError(Exception):
    """Base exception for kinematics and dynamics errors."""


class ChainDefinitionError(DynamicsError):
    """Chain or link parameters violate their physical invariants."""


class DimensionError(DynamicsError):
    """Joint vector or matrix has the wrong shape for the chain."""


class UnreachableTargetError(DynamicsError):
    """Inverse kinematics did not reach the requested pose.

    Attributes:
        best_residual: Smallest combined position/orientation residual reached.
        best_q: Joint vector that achieved ``best_residual``.
    """

    def __init__(self, message: str, best_residual: float, best_q: object = None) -> None:
        super().__init__(message)
        self.best_residual = best_residual
        self.best_q = best_q
