"""Data models for the box-constrained penalty solver."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.solver.exceptions import ProblemDefinitionError, SolverConfigError

ValueAndGradient = Callable[[FloatArray], tuple[float, FloatArray]]


class SolverStatus(StrEnum):
    """Solver exit status."""

    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and schedule of the penalty/PANOC solver.

    Attributes:
        eps_fpr: Fixed-point residual tolerance of every inner solve.
        eps_infeas: Tolerance on the norm of the stacked soft-constraint vector.
        c0: Initial penalty weight.
        c_growth: Penalty multiplier between outer iterations.
        max_outer: Outer (penalty) iteration cap.
        max_inner: Inner (PANOC) iteration cap per outer iteration.
        lbfgs_mem: L-BFGS memory length.
        inner_budget: Cap on the PANOC iterations of one penalty solve summed over
            its outer iterations; ``None`` leaves only the per-round cap.
    """

    eps_fpr: float = 1e-2
    eps_infeas: float = 1e-4
    c0: float = 10.0
    c_growth: float = 10.0
    max_outer: int = 10
    max_inner: int = 500
    lbfgs_mem: int = 10
    inner_budget: int | None = 300

    def __post_init__(self) -> None:
        if not (self.eps_fpr > 0.0 and self.eps_infeas > 0.0):
            raise SolverConfigError("solver tolerances must be positive")
        if not self.c0 > 0.0:
            raise SolverConfigError(f"initial penalty weight must be positive, got {self.c0}")
        if not self.c_growth > 1.0:
            raise SolverConfigError(f"penalty growth must exceed 1, got {self.c_growth}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise SolverConfigError("iteration caps must be at least 1")
        if self.lbfgs_mem < 1:
            raise SolverConfigError(f"L-BFGS memory must be at least 1, got {self.lbfgs_mem}")
        if self.inner_budget is not None and self.inner_budget < 1:
            raise SolverConfigError(f"inner budget must be at least 1, got {self.inner_budget}")


@dataclass(frozen=True, eq=False)
class BoxProblem:
    """Smooth function over a box, the problem class solved by PANOC.

    Attributes:
        value_and_gradient: Callback returning the cost and its gradient.
        lower: Lower bounds.
        upper: Upper bounds.
        active_set: Optional callback returning a boolean signature of the
            plus-clamp terms that are active at a point; a change resets the
            quasi-Newton memory.
    """

    value_and_gradient: ValueAndGradient
    lower: FloatArray
    upper: FloatArray
    active_set: Callable[[FloatArray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        lower, upper = _check_bounds(self.lower, self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        """Decision-vector length."""
        return int(self.lower.size)

    def project(self, x: FloatArray) -> FloatArray:
        """Euclidean projection onto the box."""
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class SoftConstraint:
    """Vector mapping driven to zero by the penalty loop.

    Attributes:
        name: Label used in diagnostics.
        mapping: ``u -> F(u)``.
        vjp: ``(u, w) -> dF(u)^T w``.
        clamped: Whether ``F`` is a plus-clamp ``[.]_+`` whose active pattern
            matters to the quasi-Newton memory.
    """

    name: str
    mapping: Callable[[FloatArray], FloatArray]
    vjp: Callable[[FloatArray, FloatArray], FloatArray]
    clamped: bool = False


@dataclass(frozen=True, eq=False)
class LiftedProblem:
    """``min F0(u)`` over a box with soft constraints ``F_i(u) = 0``.

    Attributes:
        dim: Decision-vector length.
        cost: ``u -> F0(u)``.
        gradient: ``u -> grad F0(u)``.
        lower: Lower bounds of the box.
        upper: Upper bounds of the box.
        soft_constraints: Mappings handled by the penalty loop.
        name: Label used in logs.
    """

    dim: int
    cost: Callable[[FloatArray], float]
    gradient: Callable[[FloatArray], FloatArray]
    lower: FloatArray
    upper: FloatArray
    soft_constraints: tuple[SoftConstraint, ...] = ()
    name: str = "problem"

    def __post_init__(self) -> None:
        lower, upper = _check_bounds(self.lower, self.upper)
        if lower.size != self.dim:
            raise ProblemDefinitionError(
                f"bounds have {lower.size} entries but the problem has dimension {self.dim}"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "soft_constraints", tuple(self.soft_constraints))

    def project(self, u: FloatArray) -> FloatArray:
        """Euclidean projection onto the box."""
        return np.clip(u, self.lower, self.upper)

    def constraint_values(self, u: FloatArray) -> FloatArray:
        """Stacked soft-constraint vector."""
        if not self.soft_constraints:
            return np.zeros(0)
        return np.concatenate(
            [np.atleast_1d(np.asarray(c.mapping(u), dtype=float)) for c in self.soft_constraints]
        )

    def infeasibility(self, u: FloatArray) -> float:
        """Euclidean norm of the stacked soft-constraint vector."""
        return float(np.linalg.norm(self.constraint_values(u)))

    def penalized_value_and_gradient(
        self, u: FloatArray, weight: float
    ) -> tuple[float, FloatArray]:
        """``F0(u) + c sum ||F_i(u)||^2`` and its gradient."""
        value = float(self.cost(u))
        grad = np.array(self.gradient(u), dtype=float)
        for constraint in self.soft_constraints:
            residual = np.atleast_1d(np.asarray(constraint.mapping(u), dtype=float))
            if not np.any(residual):
                continue
            value += weight * float(residual @ residual)
            grad += 2.0 * weight * np.asarray(constraint.vjp(u, residual), dtype=float)
        return value, grad

    def active_set(self, u: FloatArray) -> np.ndarray:
        """Boolean pattern of active plus-clamp entries."""
        clamped = [c for c in self.soft_constraints if c.clamped]
        if not clamped:
            return np.zeros(0, dtype=bool)
        return np.concatenate([np.atleast_1d(c.mapping(u)) > 0.0 for c in clamped])

    def penalized(self, weight: float) -> BoxProblem:
        """Inner problem for penalty weight ``weight``."""
        has_clamps = any(c.clamped for c in self.soft_constraints)
        return BoxProblem(
            value_and_gradient=lambda u: self.penalized_value_and_gradient(u, weight),
            lower=self.lower,
            upper=self.upper,
            active_set=self.active_set if has_clamps else None,
        )


@dataclass(frozen=True, eq=False)
class EnvelopeStep:
    """Forward-backward envelope before and after one accepted PANOC step."""

    before: float
    after: float
    tau: float


@dataclass(frozen=True, eq=False)
class SolverOutcome:
    """Result of a PANOC or penalty solve.

    Attributes:
        u_star: Returned decision vector (always inside the box).
        inner_iters: Total PANOC iterations.
        outer_iters: Penalty iterations.
        infeasibility: Norm of the stacked soft-constraint vector at ``u_star``.
        fpr: Fixed-point residual ``||u - T(u)|| / gamma`` of the last inner solve.
        status: Exit status.
        cost: Cost ``F0`` at ``u_star`` (the smooth objective for a bare PANOC call).
        penalty: Final penalty weight (0 for a bare PANOC call).
        infeasibility_trace: Infeasibility after every outer iteration.
        envelope_steps: Envelope values of every accepted step of the last inner solve.
    """

    u_star: FloatArray
    inner_iters: int
    outer_iters: int
    infeasibility: float
    fpr: float
    status: SolverStatus
    cost: float
    penalty: float = 0.0
    infeasibility_trace: tuple[float, ...] = ()
    envelope_steps: tuple[EnvelopeStep, ...] = field(default=(), repr=False)

    @property
    def converged(self) -> bool:
        """Whether both tolerances were met."""
        return self.status is SolverStatus.CONVERGED


def _check_bounds(lower: object, upper: object) -> tuple[FloatArray, FloatArray]:
    lo = np.asarray(lower, dtype=float).reshape(-1)
    hi = np.asarray(upper, dtype=float).reshape(-1)
    if lo.shape != hi.shape:
        raise ProblemDefinitionError(f"bound lengths differ: {lo.size} vs {hi.size}")
    if np.any(lo > hi):
        raise ProblemDefinitionError("box bounds must satisfy lower <= upper")
    return lo, hi
