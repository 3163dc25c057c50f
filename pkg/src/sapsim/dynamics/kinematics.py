"""Forward kinematics, Jacobians and inverse kinematics of serial chains."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.transform import Rotation

from sapsim.dynamics.exceptions import DimensionError, UnreachableTargetError
from sapsim.dynamics.models import ChainPose, FloatArray, KinematicChain, TaskState

logger = logging.getLogger(__name__)

IK_MAX_ITERATIONS = 200
IK_POSITION_TOL = 1e-4
IK_ORIENTATION_TOL = 1e-3
IK_DAMPING = 1e-2
DLS_DAMPING = 1e-6


def _rot_z(theta: FloatArray) -> FloatArray:
    """Batched rotation about z, shape (..., 3, 3)."""
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros((*np.shape(theta), 3, 3))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1.0
    return out


def local_transforms(chain: KinematicChain, q: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Per-joint rotations and offsets relative to the parent frame.

    Args:
        chain: Kinematic chain.
        q: Joint vector.

    Returns:
        Tuple ``(R, p)`` with shapes (n, 3, 3) and (n, 3); frame ``i`` has
        orientation ``R[i]`` and origin ``p[i]`` in frame ``i-1``.
    """
    thetas = q + np.array([link.theta_offset for link in chain.links])
    rz = _rot_z(thetas)
    rotations = np.stack([link.twist for link in chain.links]) @ rz
    offsets = np.stack([link.offset for link in chain.links])
    return rotations, offsets


def chain_pose(chain: KinematicChain, q: object) -> ChainPose:
    """Frame origins, joint axes and rotations at ``q``.

    Raises:
        DimensionError: If ``q`` has the wrong length.
    """
    q_arr = chain.check_joint_vector(q)
    local_r, local_p = local_transforms(chain, q_arr)
    rotations = np.empty((chain.n, 3, 3))
    origins = np.empty((chain.n + 1, 3))
    rot = np.eye(3)
    pos = np.zeros(3)
    for i in range(chain.n):
        pos = pos + rot @ local_p[i]
        rot = rot @ local_r[i]
        rotations[i] = rot
        origins[i] = pos
    origins[chain.n] = pos + rot @ chain.tool
    return ChainPose(origins=origins, axes=rotations[:, :, 2].copy(), rotations=rotations)


def batch_chain_poses(chain: KinematicChain, q_batch: FloatArray) -> tuple[FloatArray, ...]:
    """Vectorised :func:`chain_pose` over a stack of joint vectors.

    Args:
        chain: Kinematic chain.
        q_batch: Joint vectors, shape (K, n).

    Returns:
        Tuple ``(origins, axes, tip_rotations)`` with shapes (K, n+1, 3), (K, n, 3)
        and (K, 3, 3).
    """
    q_batch = np.asarray(q_batch, dtype=float)
    if q_batch.ndim != 2 or q_batch.shape[1] != chain.n:
        raise DimensionError(f"joint batch must have shape (K, {chain.n}), got {q_batch.shape}")
    count = q_batch.shape[0]
    offsets_theta = np.array([link.theta_offset for link in chain.links])
    rz = _rot_z(q_batch + offsets_theta)
    origins = np.empty((count, chain.n + 1, 3))
    axes = np.empty((count, chain.n, 3))
    rot = np.broadcast_to(np.eye(3), (count, 3, 3)).copy()
    pos = np.zeros((count, 3))
    for i, link in enumerate(chain.links):
        pos = pos + rot @ link.offset
        rot = rot @ link.twist @ rz[:, i]
        origins[:, i] = pos
        axes[:, i] = rot[:, :, 2]
    origins[:, chain.n] = pos + rot @ chain.tool
    return origins, axes, rot


def forward_kinematics(
    chain: KinematicChain, q: object, qd: object | None = None
) -> TaskState:
    """End-effector position, orientation and (optionally) velocity.

    Args:
        chain: Kinematic chain.
        q: Joint vector; out-of-limit values are evaluated and logged.
        qd: Optional joint velocities for the Cartesian velocity.

    Returns:
        TaskState of the tool point.

    Raises:
        DimensionError: If ``q`` or ``qd`` has the wrong length.
    """
    pose = chain_pose(chain, q)
    q_arr = np.asarray(q, dtype=float)
    if not chain.within_limits(q_arr):
        logger.debug("forward kinematics evaluated outside joint limits")
    quat = Rotation.from_matrix(pose.tip_rotation).as_quat()
    xd = np.zeros(3)
    if qd is not None:
        xd = jacobian_from_pose(pose) @ chain.check_joint_vector(qd, "qd")
    return TaskState(x=pose.tip.copy(), orientation=quat / np.linalg.norm(quat), xd=xd)


def point_jacobian(pose: ChainPose, link: int, point: FloatArray) -> FloatArray:
    """Jacobian of a point rigidly attached to ``link``.

    Args:
        pose: Chain geometry.
        link: Index of the carrying link (joints ``0..link`` move the point).
        point: Point position in the base frame.

    Returns:
        Matrix of shape (3, n).
    """
    n = pose.axes.shape[0]
    jac = np.zeros((3, n))
    k = link + 1
    jac[:, :k] = np.cross(pose.axes[:k], point - pose.origins[:k]).T
    return jac


def jacobian_from_pose(pose: ChainPose) -> FloatArray:
    """End-effector position Jacobian from precomputed geometry."""
    return point_jacobian(pose, pose.axes.shape[0] - 1, pose.tip)


def jacobian(chain: KinematicChain, q: object) -> FloatArray:
    """End-effector position Jacobian ``dx/dq``, shape (3, n).

    Raises:
        DimensionError: If ``q`` has the wrong length.
    """
    return jacobian_from_pose(chain_pose(chain, q))


def frame_velocities(pose: ChainPose, qd: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Angular velocity of every joint frame and linear velocity of every origin.

    Returns:
        Tuple ``(omega, origin_velocity)`` with shapes (n, 3) and (n+1, 3).
    """
    weighted_axes = pose.axes * qd[:, None]
    omega = np.cumsum(weighted_axes, axis=0)
    n = qd.size
    velocities = np.zeros((n + 1, 3))
    for i in range(1, n + 1):
        span = pose.origins[i] - pose.origins[i - 1]
        velocities[i] = velocities[i - 1] + np.cross(omega[i - 1], span)
    return omega, velocities


def point_jacobian_derivative(
    pose: ChainPose,
    link: int,
    point: FloatArray,
    qd: FloatArray,
    velocities: tuple[FloatArray, FloatArray] | None = None,
) -> FloatArray:
    """Time derivative of :func:`point_jacobian` along ``qd``.

    Column ``j`` of ``d/dt [z_j x (p - o_j)]`` expands to
    ``(w_j x z_j) x (p - o_j) + z_j x (pdot - odot_j)``.

    Args:
        pose: Chain geometry.
        link: Index of the carrying link.
        point: Point position in the base frame.
        qd: Joint velocities.
        velocities: Optional precomputed :func:`frame_velocities`.

    Returns:
        Matrix of shape (3, n).
    """
    omega, origin_vel = velocities if velocities is not None else frame_velocities(pose, qd)
    jac = point_jacobian(pose, link, point)
    point_vel = jac @ qd
    k = link + 1
    axes_dot = np.cross(omega[:k], pose.axes[:k])
    jdot = np.zeros_like(jac)
    jdot[:, :k] = (
        np.cross(axes_dot, point - pose.origins[:k])
        + np.cross(pose.axes[:k], point_vel - origin_vel[:k])
    ).T
    return jdot


def jacobian_derivative(chain: KinematicChain, q: object, qd: object) -> FloatArray:
    """Analytic ``Jdot`` of the end-effector Jacobian, shape (3, n)."""
    pose = chain_pose(chain, q)
    qd_arr = chain.check_joint_vector(qd, "qd")
    return point_jacobian_derivative(pose, chain.n - 1, pose.tip, qd_arr)


def orientation_error(
    rotation: FloatArray, desired: FloatArray, axes: FloatArray | None = None
) -> tuple[FloatArray, FloatArray | None]:
    """Vector part of ``q_des^-1 * q`` and its Jacobian.

    The sign of the error quaternion is chosen with a non-negative scalar part so
    the error is zero exactly when the two orientations coincide.

    Args:
        rotation: Current rotation matrix.
        desired: Desired unit quaternion (x, y, z, w).
        axes: Joint axes (n, 3); when given the Jacobian ``de/dq`` is returned.

    Returns:
        Tuple of the 3-vector error and the (3, n) Jacobian or ``None``.
    """
    r_des = Rotation.from_quat(desired)
    rel = (r_des.inv() * Rotation.from_matrix(rotation)).as_quat()
    if rel[3] < 0.0:
        rel = -rel
    vec, w = rel[:3], rel[3]
    if axes is None:
        return vec, None
    skew = np.array([[0.0, -vec[2], vec[1]], [vec[2], 0.0, -vec[0]], [-vec[1], vec[0], 0.0]])
    # d(vec)/dt = 0.5 (w I - [vec]x) R_des^T omega, omega = sum z_j qd_j
    rate = 0.5 * (w * np.eye(3) - skew) @ r_des.as_matrix().T
    return vec, rate @ axes.T


def damped_pseudo_inverse(jac: FloatArray, damping: float = DLS_DAMPING) -> FloatArray:
    """Damped least-squares inverse ``(J^T J + mu I)^-1 J^T``.

    Evaluated through the push-through identity ``J^T (J J^T + mu I)^-1`` when that
    system is smaller.
    """
    rows, cols = jac.shape
    if rows <= cols:
        return jac.T @ np.linalg.solve(jac @ jac.T + damping * np.eye(rows), np.eye(rows))
    return np.linalg.solve(jac.T @ jac + damping * np.eye(cols), jac.T)


def inverse_kinematics(
    chain: KinematicChain,
    target: TaskState,
    seed: object,
    *,
    position_only: bool = False,
    max_iterations: int = IK_MAX_ITERATIONS,
    damping: float = IK_DAMPING,
) -> FloatArray:
    """Damped least-squares inverse kinematics from a seed.

    Args:
        chain: Kinematic chain.
        target: Desired tool pose.
        seed: Initial joint vector.
        position_only: Ignore the orientation of ``target``.
        max_iterations: Iteration cap.
        damping: Levenberg damping of the least-squares step.

    Returns:
        Joint vector within the joint limits reaching the target within
        1e-4 m and 1e-3 rad.

    Raises:
        DimensionError: If ``seed`` has the wrong length or is not finite.
        UnreachableTargetError: If the target lies outside the workspace sphere or
            the iteration does not converge.
    """
    q = chain.check_joint_vector(seed, "seed").copy()
    if not np.all(np.isfinite(q)):
        raise DimensionError("seed must be finite")
    base = chain.links[0].offset
    distance = float(np.linalg.norm(target.x - base))
    if distance > chain.reach:
        raise UnreachableTargetError(
            f"target {distance:.3f} m from base exceeds reach {chain.reach:.3f} m",
            best_residual=distance - chain.reach,
            best_q=q,
        )

    r_target = Rotation.from_quat(target.orientation)
    best_q, best_residual = q.copy(), np.inf
    for iteration in range(max_iterations):
        pose = chain_pose(chain, q)
        pos_err = target.x - pose.tip
        jac_pos = jacobian_from_pose(pose)
        if position_only:
            err, jac, ori_norm = pos_err, jac_pos, 0.0
        else:
            ori_err = (r_target * Rotation.from_matrix(pose.tip_rotation).inv()).as_rotvec()
            err = np.concatenate([pos_err, ori_err])
            jac = np.vstack([jac_pos, pose.axes.T])
            ori_norm = float(np.linalg.norm(ori_err))
        pos_norm = float(np.linalg.norm(pos_err))
        residual = pos_norm + ori_norm
        if residual < best_residual:
            best_q, best_residual = q.copy(), residual
        if pos_norm < IK_POSITION_TOL and ori_norm < IK_ORIENTATION_TOL:
            logger.debug("IK converged in %d iterations (residual=%.2e)", iteration, residual)
            return q
        step = damped_pseudo_inverse(jac, damping**2) @ err
        q = np.clip(q + step, chain.q_min, chain.q_max)

    raise UnreachableTargetError(
        f"inverse kinematics did not converge in {max_iterations} iterations "
        f"(best residual {best_residual:.2e})",
        best_residual=best_residual,
        best_q=best_q,
    )
