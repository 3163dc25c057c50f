"""Small analytic problems with known solutions, used by the self-check."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.solver.models import BoxProblem, LiftedProblem, SoftConstraint


def rosenbrock(lower: float = -2.0, upper: float = 2.0) -> BoxProblem:
    """2-D Rosenbrock function on a square box, minimizer ``(1, 1)``."""

    def value_and_gradient(x: FloatArray) -> tuple[float, FloatArray]:
        a, b = x
        value = 100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2
        grad = np.array([-400.0 * a * (b - a * a) - 2.0 * (1.0 - a), 200.0 * (b - a * a)])
        return value, grad

    return BoxProblem(value_and_gradient, np.full(2, lower), np.full(2, upper))


def shifted_quadratic(target: FloatArray, lower: float = -1.0, upper: float = 1.0) -> BoxProblem:
    """``||x - target||^2`` on a cube, minimizer ``clip(target)``."""
    target = np.asarray(target, dtype=float)

    def value_and_gradient(x: FloatArray) -> tuple[float, FloatArray]:
        diff = x - target
        return float(diff @ diff), 2.0 * diff

    return BoxProblem(
        value_and_gradient, np.full(target.size, lower), np.full(target.size, upper)
    )


def equality_problem() -> LiftedProblem:
    """``min u^2`` s.t. ``u - 1 = 0`` on ``[-10, 10]``, solution ``u = 1``."""
    return LiftedProblem(
        dim=1,
        cost=lambda u: float(u[0] ** 2),
        gradient=lambda u: 2.0 * u,
        lower=np.array([-10.0]),
        upper=np.array([10.0]),
        soft_constraints=(
            SoftConstraint(name="equality", mapping=lambda u: u - 1.0, vjp=lambda _u, w: w),
        ),
        name="equality",
    )


def unconstrained_problem(dim: int = 3) -> LiftedProblem:
    """``min ||u - 0.3||^2`` on ``[-10, 10]^dim`` without soft constraints."""
    return LiftedProblem(
        dim=dim,
        cost=lambda u: float((u - 0.3) @ (u - 0.3)),
        gradient=lambda u: 2.0 * (u - 0.3),
        lower=np.full(dim, -10.0),
        upper=np.full(dim, 10.0),
        name="unconstrained",
    )


def halfspace_problem(dim: int = 3, offset: float = 0.5) -> LiftedProblem:
    """``min ||u||^2`` s.t. ``[offset - u_1]_+ = 0``, solution ``(offset, 0, ...)``."""

    def mapping(u: FloatArray) -> FloatArray:
        return np.array([max(offset - u[0], 0.0)])

    def vjp(u: FloatArray, w: FloatArray) -> FloatArray:
        out = np.zeros(dim)
        if offset - u[0] > 0.0:
            out[0] = -w[0]
        return out

    return LiftedProblem(
        dim=dim,
        cost=lambda u: float(u @ u),
        gradient=lambda u: 2.0 * u,
        lower=np.full(dim, -10.0),
        upper=np.full(dim, 10.0),
        soft_constraints=(SoftConstraint("halfspace", mapping, vjp, clamped=True),),
        name="halfspace",
    )
