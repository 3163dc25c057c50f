"""Joint-space rigid-body dynamics of serial chains.

Inverse dynamics uses the recursive Newton-Euler recursion in link frames; the
joint-space inertia matrix comes from the composite-rigid-body algorithm on 6D
spatial quantities (angular part first).
"""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.kinematics import chain_pose, local_transforms
from sapsim.dynamics.models import FloatArray, KinematicChain

Z_AXIS = np.array([0.0, 0.0, 1.0])
INERTIA_FD_STEP = 1e-5


def _skew(v: FloatArray) -> FloatArray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def rnea(
    chain: KinematicChain,
    q: object,
    qd: object,
    qdd: object,
    gravity: FloatArray | None = None,
) -> FloatArray:
    """Recursive Newton-Euler inverse dynamics ``tau = M qdd + C qd + g``.

    Args:
        chain: Kinematic chain.
        q: Joint positions.
        qd: Joint velocities.
        qdd: Joint accelerations.
        gravity: Gravity override; defaults to ``chain.gravity``.

    Returns:
        Joint torques, shape (n,).
    """
    q_arr = chain.check_joint_vector(q)
    qd_arr = chain.check_joint_vector(qd, "qd")
    qdd_arr = chain.check_joint_vector(qdd, "qdd")
    grav = chain.gravity if gravity is None else np.asarray(gravity, dtype=float)
    rotations, offsets = local_transforms(chain, q_arr)
    n = chain.n

    forces = np.empty((n, 3))
    moments = np.empty((n, 3))
    omega = np.zeros(3)
    omega_dot = np.zeros(3)
    accel = -grav
    for i, link in enumerate(chain.links):
        rt = rotations[i].T
        p = offsets[i]
        accel = rt @ (np.cross(omega_dot, p) + np.cross(omega, np.cross(omega, p)) + accel)
        omega_parent = rt @ omega
        omega = omega_parent + qd_arr[i] * Z_AXIS
        omega_dot = (
            rt @ omega_dot
            + np.cross(omega_parent, qd_arr[i] * Z_AXIS)
            + qdd_arr[i] * Z_AXIS
        )
        accel_com = (
            np.cross(omega_dot, link.com) + np.cross(omega, np.cross(omega, link.com)) + accel
        )
        forces[i] = link.mass * accel_com
        moments[i] = link.inertia @ omega_dot + np.cross(omega, link.inertia @ omega)

    tau = np.empty(n)
    f_child = np.zeros(3)
    n_child = np.zeros(3)
    for i in range(n - 1, -1, -1):
        link = chain.links[i]
        if i + 1 < n:
            r_child, p_child = rotations[i + 1], offsets[i + 1]
            f_out = r_child @ f_child
            n_out = r_child @ n_child + np.cross(p_child, f_out)
        else:
            f_out = np.zeros(3)
            n_out = np.zeros(3)
        f_child = f_out + forces[i]
        n_child = moments[i] + n_out + np.cross(link.com, forces[i])
        tau[i] = n_child[2]
    return tau


def gravity_torque(chain: KinematicChain, q: object) -> FloatArray:
    """Gravity torques ``g(q)`` (Newton-Euler with zero velocity and acceleration)."""
    zeros = np.zeros(chain.n)
    return rnea(chain, q, zeros, zeros)


def bias_torque(chain: KinematicChain, q: object, qd: object) -> FloatArray:
    """``C(q, qd) qd + g(q)`` (Newton-Euler with zero acceleration)."""
    return rnea(chain, q, qd, np.zeros(chain.n))


def _spatial_inertia(mass: float, com: FloatArray, inertia: FloatArray) -> FloatArray:
    cx = _skew(com)
    out = np.empty((6, 6))
    out[:3, :3] = inertia + mass * cx @ cx.T
    out[:3, 3:] = mass * cx
    out[3:, :3] = mass * cx.T
    out[3:, 3:] = mass * np.eye(3)
    return out


def _motion_transform(rotation: FloatArray, offset: FloatArray) -> FloatArray:
    """Spatial motion transform from parent coordinates to child coordinates."""
    e = rotation.T
    out = np.zeros((6, 6))
    out[:3, :3] = e
    out[3:, 3:] = e
    out[3:, :3] = -e @ _skew(offset)
    return out


def crba(chain: KinematicChain, q: object) -> FloatArray:
    """Joint-space inertia matrix by the composite-rigid-body algorithm.

    Returns:
        Symmetric positive definite matrix, shape (n, n).
    """
    q_arr = chain.check_joint_vector(q)
    rotations, offsets = local_transforms(chain, q_arr)
    n = chain.n
    transforms = [_motion_transform(rotations[i], offsets[i]) for i in range(n)]
    composite = [_spatial_inertia(link.mass, link.com, link.inertia) for link in chain.links]
    for i in range(n - 1, 0, -1):
        composite[i - 1] = composite[i - 1] + transforms[i].T @ composite[i] @ transforms[i]

    inertia = np.empty((n, n))
    for i in range(n):
        # joint motion subspace is the angular z column
        force = composite[i][:, 2]
        inertia[i, i] = force[2]
        j = i
        while j > 0:
            force = transforms[j].T @ force
            j -= 1
            inertia[i, j] = inertia[j, i] = force[2]
    return inertia


def inertia_derivatives(
    chain: KinematicChain, q: object, step: float = INERTIA_FD_STEP
) -> FloatArray:
    """Central differences ``dM/dq_k`` stacked along the first axis, shape (n, n, n)."""
    q_arr = chain.check_joint_vector(q)
    out = np.empty((chain.n, chain.n, chain.n))
    for k in range(chain.n):
        dq = np.zeros(chain.n)
        dq[k] = step
        out[k] = (crba(chain, q_arr + dq) - crba(chain, q_arr - dq)) / (2.0 * step)
    return out


def coriolis_matrix(
    chain: KinematicChain,
    q: object,
    qd: object,
    dM: FloatArray | None = None,
) -> FloatArray:
    """Coriolis matrix from Christoffel symbols of the first kind.

    ``C_ij = 1/2 sum_k (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qd_k`` so that
    ``Mdot - 2C`` is skew-symmetric.

    Args:
        chain: Kinematic chain.
        q: Joint positions.
        qd: Joint velocities.
        dM: Optional precomputed :func:`inertia_derivatives`.

    Returns:
        Matrix of shape (n, n).
    """
    qd_arr = chain.check_joint_vector(qd, "qd")
    if not np.any(qd_arr):
        return np.zeros((chain.n, chain.n))
    d = inertia_derivatives(chain, q) if dM is None else dM
    t1 = np.einsum("kij,k->ij", d, qd_arr)
    t2 = np.einsum("jik,k->ij", d, qd_arr)
    t3 = np.einsum("ijk,k->ij", d, qd_arr)
    return 0.5 * (t1 + t2 - t3)


def potential_energy(chain: KinematicChain, q: object) -> float:
    """Gravitational potential energy ``-sum m_i g . c_i``, J."""
    pose = chain_pose(chain, q)
    total = 0.0
    for i, link in enumerate(chain.links):
        com_world = pose.origins[i] + pose.rotations[i] @ link.com
        total -= link.mass * float(chain.gravity @ com_world)
    return total


def kinetic_energy(chain: KinematicChain, q: object, qd: object) -> float:
    """Kinetic energy ``1/2 qd^T M qd``, J."""
    qd_arr = chain.check_joint_vector(qd, "qd")
    return 0.5 * float(qd_arr @ crba(chain, q) @ qd_arr)
