"""Self-checks run by ``sapsim check``: solver, gradients, distances and dynamics.

Each check returns a :class:`CheckResult` instead of raising, so the command can
report every failure in one run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from sapsim.dynamics.kinematics import forward_kinematics
from sapsim.dynamics.models import JointState, KinematicChain
from sapsim.dynamics.rigid_body import coriolis_matrix, crba, gravity_torque
from sapsim.dynamics.task_space import dynamics_terms
from sapsim.geometry.distance import batch_capsule_distances, capsule_distance_reference
from sapsim.geometry.human import skeleton_to_capsules
from sapsim.geometry.models import SKELETON_JOINTS, BoneMap, CapsuleSet
from sapsim.planner.models import NmpcConfig, PlannerInput
from sapsim.planner.ocp import build_ocp
from sapsim.solver.benchmarks import equality_problem, halfspace_problem, rosenbrock
from sapsim.solver.gradient_check import check_problem_gradient
from sapsim.solver.models import SolverConfig, SolverStatus
from sapsim.solver.panoc import panoc_minimize
from sapsim.solver.penalty import penalty_solve

logger = logging.getLogger(__name__)

DISTANCE_TOL = 1e-9
PROPERTY_TOL = 1e-6
IDENTITY_TOL = 1e-8
SOLUTION_TOL = 1e-3
FD_STEP = 1e-6


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one self-check.

    Attributes:
        name: Short identifier.
        passed: Whether the check met its tolerance.
        detail: Measured error or failure description.
    """

    name: str
    passed: bool
    detail: str


def check_solver_benchmarks() -> list[CheckResult]:
    """PANOC and the penalty loop on problems with known minimizers."""
    results = []
    outcome = panoc_minimize(
        rosenbrock(), np.array([-1.2, 1.0]), SolverConfig(eps_fpr=1e-8, max_inner=5000)
    )
    error = float(np.max(np.abs(outcome.u_star - 1.0)))
    results.append(
        CheckResult(
            "panoc-rosenbrock",
            outcome.status is SolverStatus.CONVERGED and error < SOLUTION_TOL,
            f"status={outcome.status} error={error:.2e} iters={outcome.inner_iters}",
        )
    )
    config = SolverConfig(eps_fpr=1e-6)
    cases = (
        ("penalty-equality", equality_problem(), np.zeros(1), np.array([1.0])),
        ("penalty-halfspace", halfspace_problem(), np.zeros(3), np.array([0.5, 0.0, 0.0])),
    )
    for name, problem, u0, expected in cases:
        outcome = penalty_solve(problem, u0, config)
        error = float(np.max(np.abs(outcome.u_star - expected)))
        results.append(
            CheckResult(
                name,
                outcome.converged and error < SOLUTION_TOL,
                f"status={outcome.status} error={error:.2e} "
                f"infeasibility={outcome.infeasibility:.2e}",
            )
        )
    return results


def check_planner_gradient(
    chain: KinematicChain, bone_map: BoneMap, rng: np.random.Generator, horizon: int = 5
) -> CheckResult:
    """Analytic gradient of the penalized planning cost against central differences.

    The human stands next to the tool so the clearance clamps are active.
    """
    span = chain.q_max - chain.q_min
    q0 = chain.q_min + span * (0.3 + 0.4 * rng.random(chain.n))
    q_f = np.clip(q0 + 0.2, chain.q_min, chain.q_max)
    tool = forward_kinematics(chain, q0).x
    frame = np.tile(tool + np.array([0.12, 0.0, 0.0]), (SKELETON_JOINTS, 1))
    human = skeleton_to_capsules(frame, bone_map)
    inp = PlannerInput(
        q0=q0,
        q_f=q_f,
        p_rh_traj=np.tile(forward_kinematics(chain, q_f).x, (horizon, 1)),
        p_o_traj=(human,) * horizon,
    )
    problem = build_ocp(chain, inp, NmpcConfig(horizon=horizon))
    u = rng.uniform(0.5 * problem.lower, 0.5 * problem.upper)
    check = check_problem_gradient(problem, u, weight=10.0)
    return CheckResult(
        "planner-gradient",
        check.passed,
        f"relative={check.relative_error:.2e} max_abs={check.max_abs_error:.2e}",
    )


def _random_capsules(rng: np.random.Generator, count: int) -> CapsuleSet:
    centers = rng.uniform(-1.0, 1.0, (count, 3))
    halves = rng.normal(size=(count, 3)) * rng.uniform(0.0, 0.4, (count, 1))
    return CapsuleSet(centers - halves, centers + halves, rng.uniform(0.01, 0.2, count))


def check_distance_kernel(rng: np.random.Generator, pairs: int = 1000) -> CheckResult:
    """GJK capsule distances against the closed-form segment routine."""
    a = _random_capsules(rng, pairs)
    b = _random_capsules(rng, pairs)
    lam, _ = batch_capsule_distances(a, b)
    reference = np.array([capsule_distance_reference(a[k], b[k]) for k in range(pairs)])
    error = float(np.max(np.abs(lam - reference)))
    return CheckResult(
        "gjk-distance", error < DISTANCE_TOL, f"max_error={error:.2e} over {pairs} pairs"
    )


def check_dynamics(
    chain: KinematicChain, rng: np.random.Generator, samples: int = 20
) -> list[CheckResult]:
    """Inertia positivity, skew symmetry, bias consistency and the task-space inverse."""
    spd = float("inf")
    skew = bias = identity = 0.0
    singular = 0
    span = chain.q_max - chain.q_min
    for _ in range(samples):
        q = chain.q_min + span * (0.05 + 0.9 * rng.random(chain.n))
        qd = rng.uniform(-1.0, 1.0, chain.n)
        M = crba(chain, q)
        spd = min(spd, float(np.linalg.eigvalsh(0.5 * (M + M.T)).min()))
        C = coriolis_matrix(chain, q, qd)
        mdot = (crba(chain, q + FD_STEP * qd) - crba(chain, q - FD_STEP * qd)) / (2 * FD_STEP)
        residual = mdot - 2.0 * C
        skew = max(skew, float(np.max(np.abs(residual + residual.T))))
        terms = dynamics_terms(chain, JointState(q=q, qd=qd))
        bias = max(bias, float(np.max(np.abs(C @ qd + gravity_torque(chain, q) - terms.bias))))
        if terms.singular:
            singular += 1
            continue
        identity = max(identity, float(np.max(np.abs(terms.J @ terms.Jdag - np.eye(3)))))
    return [
        CheckResult("inertia-positive", spd > 0.0, f"min_eigenvalue={spd:.3e}"),
        CheckResult("mdot-2c-skew", skew < PROPERTY_TOL, f"max_residual={skew:.2e}"),
        CheckResult("bias-consistency", bias < PROPERTY_TOL, f"max_error={bias:.2e}"),
        CheckResult(
            "task-inverse",
            identity < IDENTITY_TOL,
            f"max_error={identity:.2e} ({singular} singular samples skipped)",
        ),
    ]


def run_checks(chain: KinematicChain, bone_map: BoneMap, seed: int = 0) -> list[CheckResult]:
    """Run every self-check with a seeded generator."""
    rng = np.random.default_rng(seed)
    results = [
        *check_solver_benchmarks(),
        check_planner_gradient(chain, bone_map, rng),
        check_distance_kernel(rng),
        *check_dynamics(chain, rng),
    ]
    for result in results:
        log = logger.info if result.passed else logger.warning
        log("check %s: %s (%s)", result.name, "ok" if result.passed else "FAILED", result.detail)
    return results
