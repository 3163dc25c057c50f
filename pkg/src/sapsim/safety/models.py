"""Data models for the low-level controller and the safety filter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.safety.exceptions import SafetyConfigError

TASK_DIM = 3
MIN_AUTHORITY = 1e-12


@dataclass(frozen=True)
class LowLevelGains:
    """Gains of the task-space controller and the filter.

    Attributes:
        Lambda: Composite-error gain, 1/s.
        k_z: Switching gain, N.
        c1: Smoothing constant of the switching term, m/s.
        K_D: Diagonal of the Lyapunov damping matrix.
        k_b: Barrier gains ``(k1, k2)`` on ``h`` and ``dh/dt``.
        clf_radius: Distance to the goal below which the Lyapunov row is active, m.
        force_bound: Bound on every task force component around the gravity force
            ``gx``, N.
        posture_kp: Null-space posture stiffness, N m/rad.
        posture_kd: Null-space posture damping, N m s/rad.
    """

    Lambda: float = 5.0
    k_z: float = 5.0
    c1: float = 0.01
    K_D: tuple[float, float, float] = (5.0, 5.0, 5.0)
    k_b: tuple[float, float] = (7.0, 7.0)
    clf_radius: float = 0.15
    force_bound: float = 40.0
    posture_kp: float = 10.0
    posture_kd: float = 2.0

    def __post_init__(self) -> None:
        for name in ("Lambda", "k_z", "c1", "force_bound"):
            if not getattr(self, name) > 0.0:
                raise SafetyConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if len(self.K_D) != TASK_DIM or any(k <= 0.0 for k in self.K_D):
            raise SafetyConfigError("K_D must hold three positive entries")
        if len(self.k_b) != 2 or any(k <= 0.0 for k in self.k_b):
            raise SafetyConfigError("k_b must hold two positive gains")
        if self.clf_radius < 0.0:
            raise SafetyConfigError("clf_radius must be non-negative")
        if self.posture_kp < 0.0 or self.posture_kd < 0.0:
            raise SafetyConfigError("posture gains must be non-negative")

    @property
    def damping_matrix(self) -> FloatArray:
        """``K_D`` as a 3x3 matrix."""
        return np.diag(np.asarray(self.K_D, dtype=float))

    @property
    def lower(self) -> FloatArray:
        """Lower bound of the force on top of gravity, per axis."""
        return np.full(TASK_DIM, -self.force_bound)

    @property
    def upper(self) -> FloatArray:
        """Upper bound of the force on top of gravity, per axis."""
        return np.full(TASK_DIM, self.force_bound)

    def force_box(self, gravity: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Bounds of ``u_act``: ``force_bound`` on either side of the gravity force."""
        centre = np.asarray(gravity, dtype=float)
        return centre + self.lower, centre + self.upper


@dataclass(frozen=True, eq=False)
class LinearRow:
    """Inequality ``normal^T u >= bound`` on the task force.

    Attributes:
        normal: Row vector, length 3.
        bound: Right-hand side.
        name: Label used in diagnostics.
    """

    normal: FloatArray
    bound: float
    name: str

    def slack(self, u: FloatArray) -> float:
        """``normal^T u - bound``; negative when violated."""
        return float(self.normal @ u) - self.bound


@dataclass(frozen=True, eq=False)
class BarrierRow:
    """Exponential barrier condition of one robot link.

    The closed-loop requirement ``d2h + k2 dh + k1 h >= 0`` becomes
    ``lg_lf_h u + lf2_h + k2 lf_h + k1 h >= 0``.

    Attributes:
        link: Robot link index.
        h: Barrier value ``||x_i - p_s||^2 - d_safe^2``, m^2.
        lf_h: First Lie derivative, m^2/s.
        lf2_h: Drift part of the second derivative, m^2/s^2.
        lg_lf_h: Input map of the second derivative, shape (3,).
        k1: Gain on ``h``.
        k2: Gain on ``dh/dt``.
        penetrating: Whether the link and the body volumes overlap.
    """

    link: int
    h: float
    lf_h: float
    lf2_h: float
    lg_lf_h: FloatArray
    k1: float
    k2: float
    penetrating: bool = False

    @property
    def authority(self) -> float:
        """Norm of the input map: how strongly the task force moves this row."""
        return float(np.linalg.norm(self.lg_lf_h))

    def row(self) -> LinearRow:
        """The condition as a linear row on the task force, scaled to a unit normal.

        A row whose input map vanishes keeps its raw scale.
        """
        bound = -(self.lf2_h + self.k2 * self.lf_h + self.k1 * self.h)
        scale = self.authority
        if scale <= MIN_AUTHORITY:
            return LinearRow(normal=self.lg_lf_h, bound=bound, name=f"barrier[{self.link}]")
        return LinearRow(
            normal=self.lg_lf_h / scale, bound=bound / scale, name=f"barrier[{self.link}]"
        )


@dataclass(frozen=True, eq=False)
class ClfRow:
    """Lyapunov decrease condition ``z^T delta >= bound`` on the force correction.

    ``delta = f_h - u_act`` is the part of the nominal force removed by the filter.

    Attributes:
        z: Composite error, m/s.
        bound: ``z^T K_D z - k_z ||z||^2 / (||z|| + c1)``.
    """

    z: FloatArray
    bound: float

    @property
    def normal(self) -> FloatArray:
        """Row vector on the correction."""
        return self.z

    def on_input(self, target: FloatArray) -> LinearRow:
        """The condition rewritten on ``u_act`` for nominal force ``target``."""
        return LinearRow(normal=-self.z, bound=self.bound - float(self.z @ target), name="clf")


@dataclass(frozen=True, eq=False)
class SafetyQp:
    """``min ||u - target||^2`` over the barrier rows, optional Lyapunov row and box.

    Attributes:
        target: Nominal force ``f_h``, N.
        barrier_rows: One row per robot link.
        lower: Lower force bound per axis.
        upper: Upper force bound per axis.
        clf: Lyapunov row, ``None`` when inactive.
    """

    target: FloatArray
    barrier_rows: tuple[BarrierRow, ...]
    lower: FloatArray
    upper: FloatArray
    clf: ClfRow | None = None

    def __post_init__(self) -> None:
        if np.any(self.lower >= self.upper):
            raise SafetyConfigError("force box must satisfy lower < upper")

    def rows(self) -> list[LinearRow]:
        """Barrier rows, the Lyapunov row, then the six box rows."""
        rows = [b.row() for b in self.barrier_rows]
        if self.clf is not None:
            rows.append(self.clf.on_input(self.target))
        for axis, label in enumerate("xyz"):
            unit = np.zeros(TASK_DIM)
            unit[axis] = 1.0
            rows.append(LinearRow(unit, float(self.lower[axis]), f"lower_{label}"))
            rows.append(LinearRow(-unit, -float(self.upper[axis]), f"upper_{label}"))
        return rows


@dataclass(frozen=True, eq=False)
class QpSolution:
    """Minimizer of a safety QP with its optimality diagnostics.

    Attributes:
        u: Filtered force ``u_act``, N.
        multipliers: One non-negative multiplier per row of :meth:`SafetyQp.rows`.
        active: Indices of the rows in the final active set.
        kkt_residual: Largest violation of stationarity, feasibility or complementarity.
        iterations: Rows added or dropped by the active-set iteration.
        names: Row labels.
    """

    u: FloatArray
    multipliers: FloatArray
    active: tuple[int, ...]
    kkt_residual: float
    iterations: int
    names: tuple[str, ...] = field(default=(), repr=False)

    @property
    def active_names(self) -> list[str]:
        """Labels of the active rows."""
        return [self.names[i] for i in self.active] if self.names else []
