"""Quadratic penalty outer loop around PANOC."""

from __future__ import annotations

import logging

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.solver.models import LiftedProblem, SolverConfig, SolverOutcome, SolverStatus
from sapsim.solver.panoc import panoc_minimize

logger = logging.getLogger(__name__)


def penalty_solve(
    problem: LiftedProblem,
    u0: FloatArray,
    config: SolverConfig | None = None,
    *,
    penalty: float | None = None,
) -> SolverOutcome:
    """Solve ``min F0(u) s.t. F_i(u) = 0, u in box`` by increasing quadratic penalties.

    Each outer iteration minimizes ``F0 + c sum ||F_i||^2`` with PANOC, warm-started
    at the previous solution, and multiplies ``c`` by ``config.c_growth``. When
    ``config.inner_budget`` is set the PANOC iterations of all outer rounds share it.

    Args:
        problem: Lifted problem.
        u0: Initial guess.
        config: Solver configuration, defaults to ``SolverConfig()``.
        penalty: First penalty weight, e.g. the final weight of the previous solve
            of a problem sequence; never below ``config.c0``.

    Returns:
        SolverOutcome; ``converged`` only when the infeasibility and the last inner
        fixed-point residual are both within tolerance.
    """
    config = config or SolverConfig()
    u = problem.project(np.asarray(u0, dtype=float).reshape(-1))
    weight = config.c0 if penalty is None else max(float(penalty), config.c0)
    total_inner = 0
    trace: list[float] = []
    status = SolverStatus.MAX_ITERATIONS
    inner = None
    outer = 0
    used_weight = weight
    for outer in range(1, config.max_outer + 1):
        cap = config.max_inner
        if config.inner_budget is not None:
            cap = min(cap, config.inner_budget - total_inner)
            if cap < 1:
                logger.debug("%s: inner budget spent after %d rounds", problem.name, outer - 1)
                outer -= 1
                break
        used_weight = weight
        inner = panoc_minimize(problem.penalized(weight), u, config, max_iterations=cap)
        total_inner += inner.inner_iters
        if inner.status is SolverStatus.NUMERICAL_FAILURE:
            logger.warning(
                "%s: numerical failure in outer iteration %d (c=%.1e)", problem.name, outer, weight
            )
            status = SolverStatus.NUMERICAL_FAILURE
            break
        u = inner.u_star
        infeasibility = problem.infeasibility(u)
        trace.append(infeasibility)
        logger.debug(
            "%s: outer %d c=%.1e inner=%d fpr=%.2e infeas=%.2e",
            problem.name,
            outer,
            weight,
            inner.inner_iters,
            inner.fpr,
            infeasibility,
        )
        if infeasibility <= config.eps_infeas and inner.fpr <= config.eps_fpr:
            status = SolverStatus.CONVERGED
            break
        if not problem.soft_constraints:
            break
        weight *= config.c_growth

    assert inner is not None
    return SolverOutcome(
        u_star=u,
        inner_iters=total_inner,
        outer_iters=outer,
        infeasibility=trace[-1] if trace else np.inf,
        fpr=inner.fpr,
        status=status,
        cost=float(problem.cost(u)),
        penalty=used_weight,
        infeasibility_trace=tuple(trace),
        envelope_steps=inner.envelope_steps,
    )
