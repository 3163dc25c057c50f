"""Solver - PANOC with a quadratic penalty outer loop for box-constrained problems."""

from sapsim.solver.exceptions import ProblemDefinitionError, SolverConfigError, SolverError
from sapsim.solver.gradient_check import (
    GradientCheck,
    check_gradient,
    check_problem_gradient,
    finite_difference_gradient,
)
from sapsim.solver.lbfgs import LbfgsBuffer
from sapsim.solver.models import (
    BoxProblem,
    EnvelopeStep,
    LiftedProblem,
    SoftConstraint,
    SolverConfig,
    SolverOutcome,
    SolverStatus,
)
from sapsim.solver.panoc import panoc_minimize
from sapsim.solver.penalty import penalty_solve

__all__ = [
    "BoxProblem",
    "EnvelopeStep",
    "GradientCheck",
    "LbfgsBuffer",
    "LiftedProblem",
    "ProblemDefinitionError",
    "SoftConstraint",
    "SolverConfig",
    "SolverConfigError",
    "SolverError",
    "SolverOutcome",
    "SolverStatus",
    "check_gradient",
    "check_problem_gradient",
    "finite_difference_gradient",
    "panoc_minimize",
    "penalty_solve",
]
