"""Task-space dynamics terms at a joint state."""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg

from sapsim.dynamics.kinematics import (
    chain_pose,
    jacobian_from_pose,
    point_jacobian_derivative,
)
from sapsim.dynamics.models import DynamicsTerms, FloatArray, JointState, KinematicChain
from sapsim.dynamics.rigid_body import (
    bias_torque,
    coriolis_matrix,
    crba,
    gravity_torque,
    inertia_derivatives,
)

logger = logging.getLogger(__name__)

SINGULAR_THRESHOLD = 1e-3
SINGULAR_DAMPING = 1e-6


def consistent_inverse(
    jac: FloatArray, m_inv: FloatArray
) -> tuple[FloatArray, FloatArray, float, bool]:
    """Inertia-weighted generalized inverse of ``jac`` on its row space.

    Works in the task subspace spanned by the left singular vectors so that planar
    chains (whose Jacobian has a structurally zero row) are handled like spatial ones.

    Args:
        jac: Task Jacobian (3, n).
        m_inv: Inverse joint-space inertia (n, n).

    Returns:
        Tuple ``(Jdag, mobility, sigma_min, singular)`` where ``mobility`` is
        ``J M^-1 J^T`` and damping ``mu`` is added when ``sigma_min`` is below
        :data:`SINGULAR_THRESHOLD`.
    """
    u, s, vt = linalg.svd(jac, full_matrices=False)
    sigma_min = float(s[-1])
    singular = sigma_min < SINGULAR_THRESHOLD
    reduced = s[:, None] * vt
    weighted = reduced @ m_inv @ reduced.T
    if singular:
        weighted = weighted + SINGULAR_DAMPING * np.eye(weighted.shape[0])
    jdag = m_inv @ reduced.T @ linalg.solve(weighted, u.T, assume_a="pos")
    return jdag, jac @ m_inv @ jac.T, sigma_min, singular


def dynamics_terms(chain: KinematicChain, state: JointState) -> DynamicsTerms:
    """Evaluate joint-space and task-space dynamics at ``state``.

    Args:
        chain: Kinematic chain.
        state: Joint positions and velocities.

    Returns:
        DynamicsTerms with ``M`` from the composite-rigid-body algorithm, ``g`` and
        ``C qd + g`` from Newton-Euler and the task-space projections.

    Raises:
        DimensionError: If the state length does not match the chain.
    """
    q = chain.check_joint_vector(state.q)
    qd = chain.check_joint_vector(state.qd, "qd")
    pose = chain_pose(chain, q)

    mass = crba(chain, q)
    m_inv = linalg.cho_solve(linalg.cho_factor(mass), np.eye(chain.n))
    m_inv = 0.5 * (m_inv + m_inv.T)
    coriolis = coriolis_matrix(chain, q, qd, inertia_derivatives(chain, q) if np.any(qd) else None)
    gravity = gravity_torque(chain, q)
    bias = bias_torque(chain, q, qd)

    jac = jacobian_from_pose(pose)
    jdot = point_jacobian_derivative(pose, chain.n - 1, pose.tip, qd)
    jdag, mobility, sigma_min, singular = consistent_inverse(jac, m_inv)
    if singular:
        logger.debug("near-singular Jacobian (sigma_min=%.2e), damping applied", sigma_min)

    mx = jdag.T @ mass @ jdag
    cx = jdag.T @ (coriolis - mass @ jdag @ jdot) @ jdag
    gx = jdag.T @ gravity
    return DynamicsTerms(
        q=q,
        qd=qd,
        M=mass,
        M_inv=m_inv,
        C=coriolis,
        g=gravity,
        bias=bias,
        J=jac,
        Jdot=jdot,
        Jdag=jdag,
        Mx=0.5 * (mx + mx.T),
        Cx=cx,
        gx=gx,
        Mx_inv=mobility,
        sigma_min=sigma_min,
        singular=singular,
        pose=pose,
    )


def joint_acceleration(terms: DynamicsTerms, tau: FloatArray) -> FloatArray:
    """Forward dynamics ``qdd = M^-1 (tau - C qd - g)`` with the Newton-Euler bias."""
    return terms.M_inv @ (np.asarray(tau, dtype=float) - terms.bias)


def task_acceleration(terms: DynamicsTerms, force: FloatArray) -> FloatArray:
    """End-effector acceleration under task force ``f`` from the task-space model.

    ``xdd = Mx^-1 (f - Cx xd - gx)`` with ``Mx^-1 = J M^-1 J^T``.
    """
    f = np.asarray(force, dtype=float)
    return terms.Mx_inv @ (f - terms.Cx @ terms.xd - terms.gx)
