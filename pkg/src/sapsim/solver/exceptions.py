"""Custom exceptions for the solver package."""


class SolverError(Exception):
    """Base exception for optimization errors."""


class ProblemDefinitionError(SolverError):
    """Problem data (dimensions, bounds, callbacks) is inconsistent."""


class SolverConfigError(SolverError):
    """Solver tolerances or schedule parameters are not admissible."""
