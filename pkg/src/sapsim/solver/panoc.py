"""PANOC: forward-backward splitting accelerated by L-BFGS on the envelope.

Each iteration computes the projected-gradient point ``T(x) = P(x - gamma grad f(x))``,
backtracks the Lipschitz estimate until the descent lemma holds at ``T(x)``, and
then searches ``x+ = x - (1 - tau) r + tau d`` (``r = x - T(x)``, ``d`` the
quasi-Newton direction) for sufficient decrease of the forward-backward envelope

    phi(x) = f(x) - grad f(x)^T r + ||r||^2 / (2 gamma).

``tau = 0`` recovers the plain projected-gradient step, whose envelope decrease is
guaranteed, so the line search always terminates.
"""

from __future__ import annotations

import logging

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.solver.lbfgs import LbfgsBuffer
from sapsim.solver.models import (
    BoxProblem,
    EnvelopeStep,
    SolverConfig,
    SolverOutcome,
    SolverStatus,
)

logger = logging.getLogger(__name__)

GAMMA_SAFETY = 0.95
LIPSCHITZ_DELTA = 1e-6
LIPSCHITZ_MIN = 1e-6
LIPSCHITZ_SLACK = 1e-12
MAX_LIPSCHITZ_BACKTRACKS = 40
MAX_LINE_SEARCH = 12
SUFFICIENT_DECREASE = 0.5


def _evaluate(problem: BoxProblem, x: FloatArray) -> tuple[float, FloatArray] | None:
    """Cost and gradient, or None when either is not finite."""
    value, grad = problem.value_and_gradient(x)
    grad = np.asarray(grad, dtype=float)
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        return None
    return float(value), grad


def estimate_lipschitz(problem: BoxProblem, x: FloatArray, grad: FloatArray) -> float | None:
    """Finite-difference estimate of the gradient Lipschitz constant at ``x``."""
    h = np.maximum(LIPSCHITZ_DELTA, LIPSCHITZ_DELTA * np.abs(x))
    _, grad_h = problem.value_and_gradient(x + h)
    grad_h = np.asarray(grad_h, dtype=float)
    if not np.all(np.isfinite(grad_h)):
        return None
    return max(float(np.linalg.norm(grad_h - grad) / np.linalg.norm(h)), LIPSCHITZ_MIN)


def _envelope(value: float, grad: FloatArray, r: FloatArray, gamma: float) -> float:
    return value - float(grad @ r) + float(r @ r) / (2.0 * gamma)


def panoc_minimize(
    problem: BoxProblem,
    x0: FloatArray,
    config: SolverConfig,
    *,
    tolerance: float | None = None,
    max_iterations: int | None = None,
) -> SolverOutcome:
    """Minimize a smooth function over a box.

    Args:
        problem: Smooth cost with gradient and box bounds.
        x0: Starting point (projected onto the box first).
        config: Memory length, default tolerance and iteration cap.
        tolerance: Fixed-point residual tolerance, defaults to ``config.eps_fpr``.
        max_iterations: Iteration cap, defaults to ``config.max_inner``.

    Returns:
        SolverOutcome whose ``u_star`` is a projected-gradient point inside the box.
        On the iteration cap the point with the smallest residual is returned.
    """
    tol = config.eps_fpr if tolerance is None else tolerance
    cap = config.max_inner if max_iterations is None else max_iterations
    memory = LbfgsBuffer(config.lbfgs_mem)

    x = problem.project(np.asarray(x0, dtype=float).reshape(-1))
    start = _evaluate(problem, x)
    lipschitz = estimate_lipschitz(problem, x, start[1]) if start is not None else None
    if start is None or lipschitz is None:
        logger.warning("PANOC: non-finite cost or gradient at the starting point")
        return _failure(x, 0)
    value, grad = start
    gamma = GAMMA_SAFETY / lipschitz
    active = problem.active_set(x) if problem.active_set is not None else None

    best_point, best_value, best_fpr = x, value, np.inf
    steps: list[EnvelopeStep] = []
    status = SolverStatus.MAX_ITERATIONS
    iterations = 0
    for iterations in range(1, cap + 1):
        # forward-backward point with Lipschitz backtracking
        for _ in range(MAX_LIPSCHITZ_BACKTRACKS):
            x_bar = problem.project(x - gamma * grad)
            r = x - x_bar
            bar = _evaluate(problem, x_bar)
            if bar is None:
                logger.warning("PANOC: non-finite cost at iteration %d", iterations)
                return _failure(best_point, iterations, best_fpr, steps)
            bound = value - float(grad @ r) + 0.5 * lipschitz * float(r @ r)
            if bar[0] <= bound + LIPSCHITZ_SLACK * max(1.0, abs(value)):
                break
            lipschitz *= 2.0
            gamma /= 2.0
            memory.reset()
        value_bar, grad_bar = bar

        fpr = float(np.linalg.norm(r)) / gamma
        if fpr < best_fpr:
            best_point, best_value, best_fpr = x_bar, value_bar, fpr
        if fpr <= tol:
            status = SolverStatus.CONVERGED
            break

        phi = _envelope(value, grad, r, gamma)
        sigma = SUFFICIENT_DECREASE * (1.0 - gamma * lipschitz) / (2.0 * gamma)
        direction = -memory.apply(r)

        tau = 1.0
        for attempt in range(MAX_LINE_SEARCH + 1):
            if attempt == MAX_LINE_SEARCH:
                tau = 0.0
            if tau == 0.0:
                x_new, trial = x_bar, (value_bar, grad_bar)
            else:
                x_new = x - (1.0 - tau) * r + tau * direction
                trial = _evaluate(problem, x_new)
                if trial is None:
                    tau *= 0.5
                    continue
            r_new = x_new - problem.project(x_new - gamma * trial[1])
            phi_new = _envelope(trial[0], trial[1], r_new, gamma)
            if tau == 0.0 or phi_new <= phi - sigma * float(r @ r):
                break
            tau *= 0.5

        steps.append(EnvelopeStep(before=phi, after=phi_new, tau=tau))
        memory.push(x_new - x, r_new - r)
        x, (value, grad) = x_new, trial
        if active is not None and problem.active_set is not None:
            new_active = problem.active_set(x)
            if new_active.shape != active.shape or np.any(new_active != active):
                memory.reset()
            active = new_active

    if status is SolverStatus.CONVERGED:
        best_point, best_value, best_fpr = x_bar, value_bar, fpr
    logger.debug(
        "PANOC %s after %d iterations (fpr=%.2e, gamma=%.2e)",
        status,
        iterations,
        best_fpr,
        gamma,
    )
    return SolverOutcome(
        u_star=best_point,
        inner_iters=iterations,
        outer_iters=1,
        infeasibility=0.0,
        fpr=best_fpr,
        status=status,
        cost=best_value,
        envelope_steps=tuple(steps),
    )


def _failure(
    point: FloatArray,
    iterations: int,
    fpr: float = np.inf,
    steps: list[EnvelopeStep] | None = None,
) -> SolverOutcome:
    return SolverOutcome(
        u_star=point,
        inner_iters=iterations,
        outer_iters=1,
        infeasibility=np.inf,
        fpr=fpr,
        status=SolverStatus.NUMERICAL_FAILURE,
        cost=np.nan,
        envelope_steps=tuple(steps or ()),
    )
