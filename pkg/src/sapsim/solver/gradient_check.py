"""Central finite-difference gradient checks."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.solver.models import LiftedProblem

logger = logging.getLogger(__name__)

FD_STEP = 1e-6
GRADIENT_REL_TOL = 1e-5


@dataclass(frozen=True)
class GradientCheck:
    """Comparison of an analytic gradient with central differences.

    Attributes:
        relative_error: ``||g - g_fd|| / ||g_fd||``.
        max_abs_error: Largest component-wise difference.
        tolerance: Relative tolerance the check was run with.
    """

    relative_error: float
    max_abs_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        """Whether the relative error is within tolerance."""
        return self.relative_error < self.tolerance


def finite_difference_gradient(
    fun: Callable[[FloatArray], float], x: FloatArray, step: float = FD_STEP
) -> FloatArray:
    """Central-difference gradient of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for k in range(x.size):
        dx = np.zeros_like(x)
        dx[k] = step
        grad[k] = (fun(x + dx) - fun(x - dx)) / (2.0 * step)
    return grad


def check_gradient(
    fun: Callable[[FloatArray], float],
    grad: Callable[[FloatArray], FloatArray],
    x: FloatArray,
    *,
    step: float = FD_STEP,
    tolerance: float = GRADIENT_REL_TOL,
) -> GradientCheck:
    """Compare ``grad(x)`` with central differences of ``fun``.

    The relative error is ``||g - g_fd|| / max(||g_fd||, 1e-12)``.
    """
    analytic = np.asarray(grad(x), dtype=float)
    numeric = finite_difference_gradient(fun, x, step)
    diff = analytic - numeric
    scale = max(float(np.linalg.norm(numeric)), 1e-12)
    return GradientCheck(
        relative_error=float(np.linalg.norm(diff)) / scale,
        max_abs_error=float(np.max(np.abs(diff))) if diff.size else 0.0,
        tolerance=tolerance,
    )


def check_problem_gradient(
    problem: LiftedProblem,
    u: FloatArray,
    weight: float = 1.0,
    *,
    step: float = FD_STEP,
    tolerance: float = GRADIENT_REL_TOL,
) -> GradientCheck:
    """Gradient check of the penalized cost ``F0 + c sum ||F_i||^2`` of a problem."""
    result = check_gradient(
        lambda v: problem.penalized_value_and_gradient(v, weight)[0],
        lambda v: problem.penalized_value_and_gradient(v, weight)[1],
        u,
        step=step,
        tolerance=tolerance,
    )
    logger.debug(
        "%s gradient check: rel=%.2e max_abs=%.2e",
        problem.name,
        result.relative_error,
        result.max_abs_error,
    )
    return result
