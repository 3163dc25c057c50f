"""Manipulator plant: forward dynamics and semi-implicit Euler integration."""

from __future__ import annotations

import logging

import numpy as np

from sapsim.dynamics.models import FloatArray, JointState, KinematicChain
from sapsim.dynamics.rigid_body import bias_torque, crba
from sapsim.logging import format_vector
from sapsim.sim.exceptions import SimulationFault

logger = logging.getLogger(__name__)

PLANT_DT = 0.001


def forward_dynamics(chain: KinematicChain, state: JointState, tau: object) -> FloatArray:
    """Joint acceleration ``M^-1 (tau - C qd - g)``.

    Raises:
        SimulationFault: If the torque or the resulting acceleration is not finite.
    """
    torque = chain.check_joint_vector(tau, "tau")
    if not np.all(np.isfinite(torque)):
        raise SimulationFault(f"non-finite torque {format_vector(torque)}")
    qdd = np.linalg.solve(crba(chain, state.q), torque - bias_torque(chain, state.q, state.qd))
    if not np.all(np.isfinite(qdd)):
        raise SimulationFault(
            f"non-finite joint acceleration at q={format_vector(state.q)}"
        )
    return qdd


def integrate(chain: KinematicChain, state: JointState, qdd: FloatArray, dt: float) -> JointState:
    """Semi-implicit Euler step: velocity first, then position.

    A joint pushed past its limit stops at the limit with zero velocity.
    """
    qd = state.qd + dt * qdd
    q = state.q + dt * qd
    at_stop = (q < chain.q_min) | (q > chain.q_max)
    if np.any(at_stop):
        logger.debug("joints %s hit their limits", np.flatnonzero(at_stop).tolist())
        q = np.clip(q, chain.q_min, chain.q_max)
        qd = np.where(at_stop, 0.0, qd)
    return JointState(q=q, qd=qd)


def plant_step(
    chain: KinematicChain, state: JointState, tau: object, dt: float = PLANT_DT
) -> JointState:
    """Advance the manipulator by ``dt`` under ``tau``.

    Raises:
        SimulationFault: On a non-finite torque or acceleration.
    """
    return integrate(chain, state, forward_dynamics(chain, state, tau), dt)
