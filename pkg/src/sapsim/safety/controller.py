"""Task-space tracking controller, torque mapping and the braking fallback."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.models import DynamicsTerms, FloatArray
from sapsim.safety.models import ClfRow, LowLevelGains


def composite_error(
    x: FloatArray,
    xd: FloatArray,
    x_d: FloatArray,
    xd_d: FloatArray,
    gains: LowLevelGains,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Position error, velocity error and ``z = xd_err + Lambda x_err``."""
    x_err = np.asarray(x, dtype=float) - x_d
    xd_err = np.asarray(xd, dtype=float) - xd_d
    return x_err, xd_err, xd_err + gains.Lambda * x_err


def switching_term(z: FloatArray, gains: LowLevelGains, *, smooth: bool = True) -> FloatArray:
    """``k_z z / (||z|| + c1)``, or ``k_z z / ||z||`` (zero at ``z = 0``) when not smooth."""
    norm = float(np.linalg.norm(z))
    if smooth:
        return gains.k_z * z / (norm + gains.c1)
    if norm == 0.0:
        return np.zeros_like(z)
    return gains.k_z * z / norm


def nominal_force(
    terms: DynamicsTerms,
    x: FloatArray,
    xd: FloatArray,
    x_d: FloatArray,
    xd_d: FloatArray,
    xdd_d: FloatArray,
    gains: LowLevelGains,
    *,
    smooth: bool = True,
) -> FloatArray:
    """Nominal task force of the tracking controller.

    ``f_h = Cx (xd_d - Lambda x_err) + gx + Mx (xdd_d - Lambda xd_err) - k_z z / (||z|| + c1)``.

    Args:
        terms: Dynamics terms at the current state.
        x: Tool position.
        xd: Tool velocity.
        x_d: Desired position.
        xd_d: Desired velocity.
        xdd_d: Desired acceleration.
        gains: Controller gains.
        smooth: Use the smoothed switching term; the unit-vector sign otherwise.

    Returns:
        Force ``f_h``, N.
    """
    x_err, xd_err, z = composite_error(x, xd, x_d, xd_d, gains)
    return (
        terms.Cx @ (xd_d - gains.Lambda * x_err)
        + terms.gx
        + terms.Mx @ (xdd_d - gains.Lambda * xd_err)
        - switching_term(z, gains, smooth=smooth)
    )


def clf_row(z: FloatArray, gains: LowLevelGains) -> ClfRow | None:
    """Lyapunov decrease row on the force correction; ``None`` when ``z = 0``.

    The row reads ``z^T delta >= z^T K_D z - k_z ||z||^2 / (||z|| + c1)``.
    """
    z = np.asarray(z, dtype=float)
    norm = float(np.linalg.norm(z))
    if norm == 0.0:
        return None
    bound = float(z @ gains.damping_matrix @ z) - gains.k_z * norm * norm / (norm + gains.c1)
    return ClfRow(z=z, bound=bound)


def to_torques(terms: DynamicsTerms, u_act: FloatArray) -> FloatArray:
    """Joint torques ``J^T u_act``."""
    return terms.J.T @ np.asarray(u_act, dtype=float)


def posture_torque(terms: DynamicsTerms, q_ref: FloatArray, gains: LowLevelGains) -> FloatArray:
    """Null-space torque holding gravity and the posture ``q_ref``.

    ``(I - J^T Jdag^T)(g + kp (q_ref - q) - kd qd)`` produces no task force, so
    together with ``J^T gx`` it reproduces the full gravity torque.
    """
    joint = terms.g + gains.posture_kp * (q_ref - terms.q) - gains.posture_kd * terms.qd
    return terms.null_projector @ joint


def braking_force(terms: DynamicsTerms, z: FloatArray, gains: LowLevelGains) -> FloatArray:
    """Fallback force ``gx - k_z z / (||z|| + c1)`` clamped to the box around ``gx``."""
    return np.clip(terms.gx - switching_term(z, gains), *gains.force_box(terms.gx))
