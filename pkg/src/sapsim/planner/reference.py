"""Desired trajectory handed from the planner to the low-level controller."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.kinematics import chain_pose, jacobian_from_pose
from sapsim.dynamics.models import FloatArray, KinematicChain
from sapsim.planner.models import ReferenceState


def integrate_reference(
    chain: KinematicChain,
    q_d_prev: object,
    u0: object,
    step: float,
    xd_prev: FloatArray | None = None,
) -> ReferenceState:
    """Advance the desired joint vector by one planner step.

    ``q_d = q_d_prev + T_s u0``, ``x_d = f_fwd(q_d)``, ``xd_d = J(q_d) u0`` and
    ``xdd_d`` is the first difference of ``xd_d`` against ``xd_prev`` (zero when
    there is no previous tick).

    Raises:
        DimensionError: If ``q_d_prev`` or ``u0`` has the wrong length.
    """
    q_prev = chain.check_joint_vector(q_d_prev, "q_d_prev")
    command = chain.check_joint_vector(u0, "u0")
    q_d = q_prev + step * command
    pose = chain_pose(chain, q_d)
    xd_d = jacobian_from_pose(pose) @ command
    xdd_d = np.zeros(3) if xd_prev is None else (xd_d - xd_prev) / step
    return ReferenceState(q_d=q_d, x_d=pose.tip.copy(), xd_d=xd_d, xdd_d=xdd_d)


class ReferenceIntegrator:
    """Holds the desired trajectory between planner ticks.

    Each planner tick commits one Euler step; :meth:`sample` evaluates the same
    motion part-way through the interval so faster loops see a continuous reference.
    """

    def __init__(self, chain: KinematicChain, q_start: object, step: float) -> None:
        self.chain = chain
        self.step = step
        self._q_start = chain.check_joint_vector(q_start, "q_start")
        self._command = np.zeros(chain.n)
        self._xd: FloatArray | None = None
        self._xdd = np.zeros(3)
        self.current = integrate_reference(chain, self._q_start, self._command, step)

    @property
    def command(self) -> FloatArray:
        """Joint-velocity command being integrated."""
        return self._command

    def advance(self, u0: object) -> ReferenceState:
        """Start a new interval from the end of the previous one with command ``u0``."""
        self._q_start = self.current.q_d
        state = integrate_reference(self.chain, self._q_start, u0, self.step, self._xd)
        self._command = self.chain.check_joint_vector(u0, "u0")
        self._xd = state.xd_d
        self._xdd = state.xdd_d
        self.current = state
        return state

    def hold(self) -> ReferenceState:
        """Stop at the current desired joint vector."""
        return self.advance(np.zeros(self.chain.n))

    def sample(self, elapsed: float) -> ReferenceState:
        """Reference ``elapsed`` seconds into the current interval, clipped to ``[0, T_s]``."""
        t = min(max(elapsed, 0.0), self.step)
        q_d = self._q_start + t * self._command
        pose = chain_pose(self.chain, q_d)
        return ReferenceState(
            q_d=q_d,
            x_d=pose.tip.copy(),
            xd_d=jacobian_from_pose(pose) @ self._command,
            xdd_d=self._xdd.copy(),
        )
