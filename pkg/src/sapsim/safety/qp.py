"""Dual active-set solver for the projection QPs of the safety filter.

The filter problems have an identity Hessian, three variables and a handful of
rows, so the Goldfarb-Idnani dual method applies directly: start from the
unconstrained minimizer (the nominal force), add the most violated row, and take
primal/dual steps that keep every multiplier non-negative. A violated row that
is a non-negative combination of the active rows proves infeasibility.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg

from sapsim.dynamics.models import FloatArray
from sapsim.safety.exceptions import QpInfeasibleError, SafetyError
from sapsim.safety.models import QpSolution, SafetyQp

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-10
DEPENDENCE_TOL = 1e-12
MAX_QP_ITERATIONS = 100


def kkt_residual(
    u: FloatArray, target: FloatArray, normals: FloatArray, bounds: FloatArray, mult: FloatArray
) -> float:
    """Largest violation of stationarity, primal feasibility, dual sign or complementarity."""
    slack = normals @ u - bounds
    parts = [
        float(np.max(np.abs(u - target - normals.T @ mult))) if u.size else 0.0,
        float(np.max(np.maximum(-slack, 0.0), initial=0.0)),
        float(np.max(np.maximum(-mult, 0.0), initial=0.0)),
        float(np.max(np.abs(mult * slack), initial=0.0)),
    ]
    return max(parts)


def solve_projection(
    target: FloatArray,
    normals: FloatArray,
    bounds: FloatArray,
    names: tuple[str, ...] = (),
) -> QpSolution:
    """Project ``target`` onto ``{u : normals u >= bounds}``.

    Args:
        target: Point to project.
        normals: Row matrix (m, d).
        bounds: Right-hand sides (m,).
        names: Optional row labels for diagnostics.

    Returns:
        QpSolution with the minimizer and one multiplier per row.

    Raises:
        QpInfeasibleError: If the rows admit no common point.
        SafetyError: If the iteration cap is reached.
    """
    target = np.asarray(target, dtype=float)
    normals = np.asarray(normals, dtype=float).reshape(-1, target.size)
    bounds = np.asarray(bounds, dtype=float).reshape(-1)
    x = target.copy()
    active: list[int] = []
    mult: list[float] = []
    iterations = 0

    while True:
        slack = normals @ x - bounds
        slack[active] = np.inf
        tol = FEASIBILITY_TOL * (1.0 + np.abs(bounds))
        violation = slack + tol
        if violation.size == 0 or np.min(violation) >= 0.0:
            break
        p = int(np.argmin(violation))
        n_p = normals[p]
        added = 0.0
        while True:
            iterations += 1
            if iterations > MAX_QP_ITERATIONS:
                raise SafetyError(f"active-set iteration did not finish in {MAX_QP_ITERATIONS}")
            if active:
                basis = normals[active].T
                dual_dir = linalg.lstsq(basis, n_p)[0]
                primal_dir = n_p - basis @ dual_dir
            else:
                dual_dir = np.empty(0)
                primal_dir = n_p
            # largest dual step before an active multiplier reaches zero
            partial, drop = np.inf, -1
            for j, r_j in enumerate(dual_dir):
                if r_j > DEPENDENCE_TOL:
                    ratio = max(mult[j], 0.0) / r_j
                    if ratio < partial:
                        partial, drop = ratio, j
            curvature = float(primal_dir @ n_p)
            if curvature <= DEPENDENCE_TOL * float(n_p @ n_p):
                if drop < 0:
                    label = names[p] if names else str(p)
                    raise QpInfeasibleError(f"safety QP infeasible at row '{label}'", label)
                mult = [m - partial * r for m, r in zip(mult, dual_dir, strict=True)]
                added += partial
                del active[drop], mult[drop]
                continue
            full = (bounds[p] - float(n_p @ x)) / curvature
            step = min(partial, full)
            x = x + step * primal_dir
            mult = [m - step * r for m, r in zip(mult, dual_dir, strict=True)]
            added += step
            if full <= partial:
                active.append(p)
                mult.append(added)
                break
            del active[drop], mult[drop]

    multipliers = np.zeros(bounds.size)
    multipliers[active] = mult
    return QpSolution(
        u=x,
        multipliers=multipliers,
        active=tuple(active),
        kkt_residual=kkt_residual(x, target, normals, bounds, multipliers),
        iterations=iterations,
        names=names,
    )


def safety_filter(qp: SafetyQp) -> QpSolution:
    """Filtered force ``u_act`` closest to the nominal force.

    Returns ``f_h`` unchanged when every row holds there.

    Raises:
        QpInfeasibleError: If barrier, Lyapunov and box rows conflict.
    """
    rows = qp.rows()
    solution = solve_projection(
        qp.target,
        np.array([r.normal for r in rows]),
        np.array([r.bound for r in rows]),
        tuple(r.name for r in rows),
    )
    if solution.active:
        logger.debug(
            "filter active rows %s, |u - f_h|=%.3e",
            solution.active_names,
            float(np.linalg.norm(solution.u - qp.target)),
        )
    return solution
