"""Single-integrator joint rollout over the horizon."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.kinematics import batch_chain_poses
from sapsim.dynamics.models import FloatArray, KinematicChain
from sapsim.planner.exceptions import PlannerInputError
from sapsim.planner.models import HorizonStates, NmpcConfig


def joint_rollout(q0: FloatArray, u_sequence: FloatArray, step: float) -> FloatArray:
    """``q_{k+1} = q_k + T_s u_k`` for every step, shape (N_h + 1, n)."""
    q = np.empty((u_sequence.shape[0] + 1, q0.size))
    q[0] = q0
    for k in range(u_sequence.shape[0]):
        q[k + 1] = q[k] + step * u_sequence[k]
    return q


def as_sequence(u: FloatArray, horizon: int, n: int) -> FloatArray:
    """Reshape a flat or stacked command vector to (N_h, n).

    Raises:
        PlannerInputError: If the size does not match ``horizon * n``.
    """
    arr = np.asarray(u, dtype=float)
    if arr.size != horizon * n:
        raise PlannerInputError(
            f"command sequence must hold {horizon} x {n} values, got {arr.size}"
        )
    return arr.reshape(horizon, n)


def rollout(
    chain: KinematicChain, q0: object, u_sequence: object, config: NmpcConfig
) -> HorizonStates:
    """Joint and tool positions predicted by a command sequence.

    Args:
        chain: Kinematic chain.
        q0: Initial joint vector.
        u_sequence: Commands, shape (N_h, n) or flat.
        config: Planner configuration (horizon and step).

    Returns:
        HorizonStates for ``k = 0..N_h``.

    Raises:
        PlannerInputError: If the sequence length does not match the horizon.
        DimensionError: If ``q0`` has the wrong length.
    """
    q0_arr = chain.check_joint_vector(q0, "q0")
    sequence = as_sequence(np.asarray(u_sequence, dtype=float), config.horizon, chain.n)
    q = joint_rollout(q0_arr, sequence, config.step)
    origins, _, _ = batch_chain_poses(chain, q)
    return HorizonStates(q=q, x=origins[:, -1].copy())
