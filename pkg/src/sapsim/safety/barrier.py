"""Per-link exponential barrier rows and the witness-point velocity estimate."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from sapsim.dynamics.kinematics import frame_velocities, point_jacobian, point_jacobian_derivative
from sapsim.dynamics.models import DynamicsTerms, FloatArray
from sapsim.geometry.distance import link_distances, segment_parameter
from sapsim.geometry.models import DistanceResult, HumanModel
from sapsim.geometry.robot import capsules_from_pose
from sapsim.safety.models import BarrierRow


class WitnessDifferencer:
    """Velocity of the human witness point of every link from perception frames.

    A witness is followed as a point fixed on its body capsule: its parameter along
    the capsule axis is read at the current tick and the capsule endpoints of the
    last two frames are first-differenced at that parameter. A witness sliding
    along a capsule or jumping to another one therefore reads the body motion
    only. The endpoint rates change when a new frame arrives and are held in
    between; the first frame yields zero.
    """

    def __init__(self, period: float = 0.05) -> None:
        self.period = period
        self._index: int | None = None
        self._p0: FloatArray | None = None
        self._p1: FloatArray | None = None
        self._rate0: FloatArray | None = None
        self._rate1: FloatArray | None = None

    def reset(self) -> None:
        """Forget the previous frames."""
        self._index = None
        self._p0 = self._p1 = None
        self._rate0 = self._rate1 = None

    @property
    def tracking(self) -> bool:
        """Whether two frames have been seen."""
        return self._rate0 is not None

    def update(self, frame_index: int, human: HumanModel) -> None:
        """Record the body capsules seen at ``frame_index``.

        A later frame refreshes the endpoint rates; an earlier one restarts the history.
        """
        capsules = human.capsules
        if self._index is not None and frame_index == self._index:
            return
        if self._index is not None and frame_index > self._index:
            assert self._p0 is not None and self._p1 is not None
            elapsed = (frame_index - self._index) * self.period
            self._rate0 = (capsules.p0 - self._p0) / elapsed
            self._rate1 = (capsules.p1 - self._p1) / elapsed
        else:
            self._rate0 = self._rate1 = None
        self._index = frame_index
        self._p0 = capsules.p0.copy()
        self._p1 = capsules.p1.copy()

    def velocities(self, witnesses: Sequence[DistanceResult], human: HumanModel) -> FloatArray:
        """Velocity of every link's witness point, shape (links, 3)."""
        out = np.zeros((len(witnesses), 3))
        if self._rate0 is None or self._rate1 is None:
            return out
        capsules = human.capsules
        for link, witness in enumerate(witnesses):
            j = witness.pair[1]
            s = segment_parameter(witness.human_core, capsules.p0[j], capsules.p1[j])
            out[link] = (1.0 - s) * self._rate0[j] + s * self._rate1[j]
        return out


def link_witnesses(
    terms: DynamicsTerms, human: HumanModel, link_radii: FloatArray
) -> list[DistanceResult]:
    """Closest human capsule of every robot link at the state of ``terms``."""
    return link_distances(capsules_from_pose(terms.pose, link_radii), human)


def barrier_rows(
    terms: DynamicsTerms,
    human: HumanModel,
    d_safe: float,
    k_b: tuple[float, float],
    link_radii: FloatArray,
    *,
    support_velocities: FloatArray | None = None,
    extra_torque: FloatArray | None = None,
    witnesses: list[DistanceResult] | None = None,
) -> list[BarrierRow]:
    """One exponential barrier row per robot link.

    ``h_i = ||x_i - p_s||^2 - d_safe^2`` with ``x_i`` the robot witness point and
    ``p_s`` the human witness point; the squared distance carries the sign of
    ``lambda`` when the volumes overlap. The task force enters the joint dynamics as
    ``J^T u``, so ``d2h_i = lf2_h + lg_lf_h u`` with
    ``lg_lf_h = 2 (x_i - p_s)^T J_i M^-1 J^T``.

    Args:
        terms: Dynamics terms at the current state.
        human: Human capsules.
        d_safe: Safety distance, m.
        k_b: Gains ``(k1, k2)``.
        link_radii: Robot capsule radii.
        support_velocities: Human witness velocities per link; zero when ``None``.
        extra_torque: Torque applied besides ``J^T u`` (posture term), part of the drift.
        witnesses: Precomputed :func:`link_witnesses`.

    Returns:
        Rows in link order.
    """
    n = terms.q.size
    results = witnesses if witnesses is not None else link_witnesses(terms, human, link_radii)
    p_dot = np.zeros((n, 3)) if support_velocities is None else support_velocities
    torque = np.zeros(n) if extra_torque is None else extra_torque
    joint_drift = terms.M_inv @ (torque - terms.bias)
    input_map = terms.M_inv @ terms.J.T
    velocities = frame_velocities(terms.pose, terms.qd)
    k1, k2 = k_b

    rows = []
    for link, result in enumerate(results):
        # signed so that h keeps decreasing once the volumes overlap
        diff = -abs(result.lam) * result.normal
        jac = point_jacobian(terms.pose, link, result.x_witness)
        jdot = point_jacobian_derivative(
            terms.pose, link, result.x_witness, terms.qd, velocities
        )
        rel_vel = jac @ terms.qd - p_dot[link]
        drift_acc = jac @ joint_drift + jdot @ terms.qd
        rows.append(
            BarrierRow(
                link=link,
                h=result.lam * abs(result.lam) - d_safe * d_safe,
                lf_h=2.0 * float(diff @ rel_vel),
                lf2_h=2.0 * float(rel_vel @ rel_vel) + 2.0 * float(diff @ drift_acc),
                lg_lf_h=2.0 * diff @ jac @ input_map,
                k1=k1,
                k2=k2,
                penetrating=result.penetrating or not np.any(diff),
            )
        )
    return rows
