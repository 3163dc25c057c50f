"""Lifted NMPC problem: cost, terminal equality and collision clamps with analytic gradients.

The decision vector stacks the joint-velocity commands ``u_0 .. u_{N-1}``. States
follow ``q_{k+1} = q_k + T_s u_k``, so ``dq_k/du_j = T_s I`` for ``j < k`` and every
state gradient is pushed back to the commands by a reverse cumulative sum.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from sapsim.dynamics.kinematics import batch_chain_poses, forward_kinematics, orientation_error
from sapsim.dynamics.models import FloatArray, KinematicChain
from sapsim.geometry.distance import horizon_distances
from sapsim.geometry.models import HumanModel, HumanTrack
from sapsim.planner.models import NmpcConfig, PlannerInput
from sapsim.planner.rollout import joint_rollout
from sapsim.solver.models import LiftedProblem, SoftConstraint


@dataclass(frozen=True, eq=False)
class OcpEvaluation:
    """Everything the cost and constraint callbacks need at one decision vector.

    Attributes:
        q: Rolled-out joint vectors, shape (N_h + 1, n).
        cost: Tracking cost ``F0``.
        gradient: ``dF0/du``, flat.
        lambdas: Minimum signed distance at ``k = 1..N_h``.
        lambda_grads: ``d lambda_k / d q_k``, shape (N_h, n).
    """

    q: FloatArray
    cost: float
    gradient: FloatArray
    lambdas: FloatArray
    lambda_grads: FloatArray


class OcpEvaluator:
    """Evaluates the NMPC terms at a decision vector, caching the last point."""

    def __init__(self, chain: KinematicChain, inp: PlannerInput, config: NmpcConfig) -> None:
        self.chain = chain
        self.config = config
        self.q0 = inp.q0
        self.q_f = inp.q_f
        self.humans = HumanTrack.from_models(inp.p_o_traj)
        self.radii = config.radii(chain)
        horizon = config.horizon
        # stage k is compared with the prediction for the same instant
        index = np.maximum(np.arange(horizon + 1) - 1, 0)
        self.targets = inp.p_rh_traj[index]
        qp, qv, rp, rv = config.weight_vectors(chain.n)
        self.pose_weights = np.vstack([np.tile(rp, (horizon, 1)), qp])
        self.stage_input_weights = rv
        self.terminal_input_weights = qv
        if inp.orientation is None:
            self.orientation = forward_kinematics(chain, inp.q_f).orientation
        else:
            self.orientation = np.asarray(inp.orientation, dtype=float)
        self._last_u: FloatArray | None = None
        self._last: OcpEvaluation | None = None

    def __call__(self, u: FloatArray) -> OcpEvaluation:
        if self._last is not None and self._last_u is not None and np.array_equal(u, self._last_u):
            return self._last
        evaluation = self._evaluate(np.asarray(u, dtype=float))
        self._last_u = np.array(u, dtype=float, copy=True)
        self._last = evaluation
        return evaluation

    def _evaluate(self, u: FloatArray) -> OcpEvaluation:
        n, horizon, step = self.chain.n, self.config.horizon, self.config.step
        sequence = u.reshape(horizon, n)
        q = joint_rollout(self.q0, sequence, step)
        origins, axes, tip_rotations = batch_chain_poses(self.chain, q)
        tips = origins[:, n]

        # pose tracking, gradient per state
        pos_err = tips - self.targets
        pos_w = self.pose_weights[:, :3]
        cost = float(np.sum(pos_w * pos_err * pos_err))
        jac_t = np.cross(axes, tips[:, None, :] - origins[:, :n, :])
        grad_q = np.einsum("kjc,kc->kj", jac_t, 2.0 * pos_w * pos_err)
        ori_w = self.pose_weights[:, 3:]
        for k in np.flatnonzero(np.any(ori_w > 0.0, axis=1)):
            err, err_jac = orientation_error(tip_rotations[k], self.orientation, axes[k])
            assert err_jac is not None
            cost += float(err @ (ori_w[k] * err))
            grad_q[k] += err_jac.T @ (2.0 * ori_w[k] * err)

        # input weights
        cost += float(np.sum(self.stage_input_weights * sequence * sequence))
        last = sequence[-1]
        cost += float(last @ (self.terminal_input_weights * last))
        grad_u = 2.0 * self.stage_input_weights * sequence
        grad_u[-1] += 2.0 * self.terminal_input_weights * last
        suffix = np.cumsum(grad_q[::-1], axis=0)[::-1]
        grad_u += step * suffix[1:]

        # collision distances on the states reachable by the commands
        closest = horizon_distances(origins[1:], self.radii, self.humans)
        # the robot witness moves with joints 0..link; the human is fixed
        levers = closest.robot_core[:, None, :] - origins[1:, :n, :]
        lambda_grads = -np.einsum("kjc,kc->kj", np.cross(axes[1:], levers), closest.normal)
        lambda_grads[np.arange(n)[None, :] > closest.link[:, None]] = 0.0

        return OcpEvaluation(
            q=q,
            cost=cost,
            gradient=grad_u.reshape(-1),
            lambdas=closest.lam,
            lambda_grads=lambda_grads,
        )


def _terminal_constraint(evaluator: OcpEvaluator) -> SoftConstraint:
    horizon, step = evaluator.config.horizon, evaluator.config.step

    def mapping(u: FloatArray) -> FloatArray:
        return evaluator(u).q[-1] - evaluator.q_f

    def vjp(_u: FloatArray, w: FloatArray) -> FloatArray:
        return np.tile(step * w, horizon)

    return SoftConstraint(name="terminal", mapping=mapping, vjp=vjp)


def _clamp_constraint(evaluator: OcpEvaluator, k: int) -> SoftConstraint:
    n, horizon, step = evaluator.chain.n, evaluator.config.horizon, evaluator.config.step
    d_safe = evaluator.config.d_safe

    def mapping(u: FloatArray) -> FloatArray:
        return np.array([max(d_safe - evaluator(u).lambdas[k - 1], 0.0)])

    def vjp(u: FloatArray, w: FloatArray) -> FloatArray:
        evaluation = evaluator(u)
        out = np.zeros((horizon, n))
        # zero subgradient at the kink
        if d_safe - evaluation.lambdas[k - 1] > 0.0:
            out[:k] = -step * w[0] * evaluation.lambda_grads[k - 1]
        return out.reshape(-1)

    return SoftConstraint(name=f"clearance[{k}]", mapping=mapping, vjp=vjp, clamped=True)


def build_ocp(chain: KinematicChain, inp: PlannerInput, config: NmpcConfig) -> LiftedProblem:
    """Lift one planning tick into the solver's general form.

    Args:
        chain: Kinematic chain.
        inp: Planner input.
        config: Horizon, weights, safety distance and speed bounds.

    Returns:
        LiftedProblem with the tracking cost, one terminal-equality mapping and
        ``N_h`` clamps ``[d_safe - lambda_k]_+``.

    Raises:
        PlannerInputError: If the input does not match the chain or horizon.
    """
    inp.check(chain, config)
    evaluator = OcpEvaluator(chain, inp, config)
    bounds = np.tile(config.speed_bounds(chain), config.horizon)
    constraints = [_terminal_constraint(evaluator)]
    constraints.extend(_clamp_constraint(evaluator, k) for k in range(1, config.horizon + 1))
    return LiftedProblem(
        dim=chain.n * config.horizon,
        cost=lambda u: evaluator(u).cost,
        gradient=lambda u: evaluator(u).gradient,
        lower=-bounds,
        upper=bounds,
        soft_constraints=tuple(constraints),
        name="nmpc",
    )


def predicted_distances(
    chain: KinematicChain,
    q_states: FloatArray,
    humans: Sequence[HumanModel],
    link_radii: FloatArray,
) -> FloatArray:
    """Minimum signed distance of every predicted state ``k = 1..N_h`` to its human frame."""
    states = np.asarray(q_states, dtype=float)
    if states.shape[0] < 2:
        return np.empty(0)
    origins, _, _ = batch_chain_poses(chain, states[1:])
    return horizon_distances(origins, link_radii, HumanTrack.from_models(humans)).lam
