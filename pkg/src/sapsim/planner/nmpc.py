"""Receding-horizon planning step and the stateful planner that warm-starts it."""

from __future__ import annotations

import logging

import numpy as np

from sapsim.dynamics.models import FloatArray, KinematicChain
from sapsim.logging import format_vector
from sapsim.planner.exceptions import PlanningFailedError
from sapsim.planner.models import NmpcConfig, PlannerInput, PlanResult
from sapsim.planner.ocp import build_ocp, predicted_distances
from sapsim.planner.rollout import as_sequence, rollout
from sapsim.solver.models import SolverConfig, SolverStatus
from sapsim.solver.penalty import penalty_solve

logger = logging.getLogger(__name__)


def reachable_goal(
    chain: KinematicChain,
    q0: FloatArray,
    q_f: FloatArray,
    config: NmpcConfig,
    fraction: float = 0.5,
) -> FloatArray:
    """Terminal set-point the horizon can reach from ``q0``.

    Joint ``i`` may travel ``fraction * N_h * T_s * u_max_i``; a farther ``q_f`` is
    pulled back along ``q_f - q0`` until the most constrained joint fits.
    """
    q0 = np.asarray(q0, dtype=float)
    delta = np.asarray(q_f, dtype=float) - q0
    reach = fraction * config.prediction_time * config.speed_bounds(chain)
    ratio = float(np.max(np.abs(delta) / reach))
    if ratio <= 1.0:
        return q0 + delta
    return q0 + delta / ratio


def shift_warm_start(sequence: FloatArray) -> FloatArray:
    """Drop the applied command and pad the tail with zeros."""
    shifted = np.zeros_like(sequence)
    shifted[:-1] = sequence[1:]
    return shifted


def plan_step(
    chain: KinematicChain,
    inp: PlannerInput,
    config: NmpcConfig,
    warm_start: FloatArray | None = None,
    solver_config: SolverConfig | None = None,
    *,
    penalty: float | None = None,
) -> PlanResult:
    """Solve one NMPC problem and return the first optimal command.

    Args:
        chain: Kinematic chain.
        inp: Planner input for this tick.
        config: NMPC configuration.
        warm_start: Initial command sequence (N_h, n) or flat; zeros when ``None``.
        solver_config: Penalty/PANOC settings.
        penalty: First penalty weight, the final weight of the previous tick when
            warm-starting a sequence.

    Returns:
        PlanResult. A solve stopped by an iteration cap returns its best iterate
        with ``degraded`` set.

    Raises:
        PlannerInputError: If the input or warm start does not match the horizon.
        PlanningFailedError: If the solver hit a non-finite cost or gradient.
    """
    problem = build_ocp(chain, inp, config)
    if warm_start is None:
        u0 = np.zeros(problem.dim)
    else:
        u0 = as_sequence(warm_start, config.horizon, chain.n).reshape(-1)
    outcome = penalty_solve(problem, u0, solver_config, penalty=penalty)
    if outcome.status is SolverStatus.NUMERICAL_FAILURE:
        raise PlanningFailedError("NMPC solve hit a numerical failure", outcome)

    sequence = outcome.u_star.reshape(config.horizon, chain.n)
    states = rollout(chain, inp.q0, sequence, config)
    lambdas = predicted_distances(chain, states.q, inp.p_o_traj, config.radii(chain))
    result = PlanResult(
        u0=sequence[0].copy(),
        full_sequence=sequence,
        predicted_states=states,
        solver=outcome,
        min_pred_lambda=float(np.min(lambdas)),
        predicted_lambdas=lambdas,
    )
    if result.degraded:
        logger.warning(
            "degraded plan: status=%s infeas=%.2e fpr=%.2e",
            outcome.status,
            outcome.infeasibility,
            outcome.fpr,
        )
    logger.debug(
        "plan: u0=%s min_lambda=%.4f inner=%d outer=%d",
        format_vector(result.u0),
        result.min_pred_lambda,
        outcome.inner_iters,
        outcome.outer_iters,
    )
    return result


class NmpcPlanner:
    """Planner for one robot; keeps the shifted previous solution as warm start.

    A converged solve also hands its final penalty weight to the next one, so a
    slowly changing problem sequence needs one penalty round per tick.

    Not re-entrant: a single control loop owns each instance.
    """

    def __init__(
        self,
        chain: KinematicChain,
        config: NmpcConfig | None = None,
        solver_config: SolverConfig | None = None,
        *,
        warm_start: bool = True,
    ) -> None:
        self.chain = chain
        self.config = config or NmpcConfig()
        self.solver_config = solver_config or SolverConfig()
        self.use_warm_start = warm_start
        self._previous: FloatArray | None = None
        self._penalty: float | None = None
        self.last_result: PlanResult | None = None

    def reset(self) -> None:
        """Forget the previous solution and penalty weight."""
        self._previous = None
        self._penalty = None
        self.last_result = None

    @property
    def warm_start(self) -> FloatArray:
        """Initial guess the next solve will use, shape (N_h, n)."""
        if self._previous is None or not self.use_warm_start:
            return np.zeros((self.config.horizon, self.chain.n))
        return shift_warm_start(self._previous)

    def step(self, inp: PlannerInput) -> PlanResult:
        """Plan one tick; a numerical failure clears the warm start before re-raising.

        Raises:
            PlanningFailedError: If the solver hit a numerical failure.
        """
        try:
            result = plan_step(
                self.chain,
                inp,
                self.config,
                self.warm_start,
                self.solver_config,
                penalty=self._penalty if self.use_warm_start else None,
            )
        except PlanningFailedError:
            self.reset()
            raise
        self._previous = result.full_sequence
        self._penalty = result.solver.penalty if result.solver.converged else None
        self.last_result = result
        return result
