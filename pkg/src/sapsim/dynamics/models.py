"""Data models for manipulator kinematics and dynamics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from sapsim.dynamics.exceptions import ChainDefinitionError, DimensionError

FloatArray = NDArray[np.float64]

STANDARD_GRAVITY = (0.0, 0.0, -9.81)
QUATERNION_NORM_TOL = 1e-9


def _as_vector(values: object, size: int, name: str) -> FloatArray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape != (size,):
        raise DimensionError(f"{name} must have {size} entries, got {arr.size}")
    return arr


@dataclass(frozen=True, eq=False)
class LinkParam:
    """One link of a serial chain in modified Denavit-Hartenberg form.

    The frame of joint ``i`` is reached from frame ``i-1`` by
    ``RotX(alpha) TransX(a) RotZ(theta + theta_offset) TransZ(d)``.

    Attributes:
        a: Common-normal length along the previous x axis, m.
        alpha: Twist about the previous x axis, rad.
        d: Offset along this joint's z axis, m.
        theta_offset: Constant added to the joint coordinate, rad.
        mass: Link mass, kg.
        com: Center of mass in the link frame, m.
        inertia: Inertia tensor about the center of mass in the link frame, kg*m^2.
        q_min: Lower joint limit, rad.
        q_max: Upper joint limit, rad.
        v_max: Joint speed limit, rad/s.
    """

    a: float
    alpha: float
    d: float
    theta_offset: float
    mass: float
    com: FloatArray
    inertia: FloatArray
    q_min: float
    q_max: float
    v_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "com", _as_vector(self.com, 3, "com"))
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3):
            raise ChainDefinitionError(f"inertia must be 3x3, got shape {inertia.shape}")
        object.__setattr__(self, "inertia", inertia)
        self.validate()

    def validate(self) -> None:
        """Check the physical invariants of the link.

        Raises:
            ChainDefinitionError: If mass, inertia or limits are not admissible.
        """
        if not self.mass > 0.0:
            raise ChainDefinitionError(f"link mass must be positive, got {self.mass}")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ChainDefinitionError("link inertia must be symmetric")
        moments = np.linalg.eigvalsh(self.inertia)
        if moments[0] <= 0.0:
            raise ChainDefinitionError("link inertia must be positive definite")
        # principal moments of a rigid body satisfy the triangle inequality
        if moments[0] + moments[1] < moments[2] * (1.0 - 1e-9):
            raise ChainDefinitionError("principal moments violate the triangle inequality")
        if not self.q_min < self.q_max:
            raise ChainDefinitionError(
                f"joint limits must satisfy q_min < q_max, got [{self.q_min}, {self.q_max}]"
            )
        if not self.v_max > 0.0:
            raise ChainDefinitionError(f"joint speed limit must be positive, got {self.v_max}")

    @cached_property
    def offset(self) -> FloatArray:
        """Origin of this frame expressed in the previous frame."""
        sa, ca = np.sin(self.alpha), np.cos(self.alpha)
        return np.array([self.a, -sa * self.d, ca * self.d])

    @cached_property
    def twist(self) -> FloatArray:
        """Rotation ``RotX(alpha)`` preceding the joint rotation."""
        sa, ca = np.sin(self.alpha), np.cos(self.alpha)
        return np.array([[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]])


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Serial chain of revolute joints driving all kinematics and dynamics terms.

    Attributes:
        links: Ordered link parameters, base to tip.
        gravity: Gravity acceleration in the base frame, m/s^2.
        tool: End-effector point expressed in the last link frame, m.
        name: Human-readable chain name.
    """

    links: tuple[LinkParam, ...]
    gravity: FloatArray = field(default_factory=lambda: np.array(STANDARD_GRAVITY))
    tool: FloatArray = field(default_factory=lambda: np.zeros(3))
    name: str = "chain"

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "gravity", _as_vector(self.gravity, 3, "gravity"))
        object.__setattr__(self, "tool", _as_vector(self.tool, 3, "tool"))
        if len(self.links) < 2:
            raise ChainDefinitionError(f"a chain needs at least 2 links, got {len(self.links)}")

    @property
    def n(self) -> int:
        """Number of joints."""
        return len(self.links)

    @cached_property
    def q_min(self) -> FloatArray:
        """Lower joint limits."""
        return np.array([link.q_min for link in self.links])

    @cached_property
    def q_max(self) -> FloatArray:
        """Upper joint limits."""
        return np.array([link.q_max for link in self.links])

    @cached_property
    def v_max(self) -> FloatArray:
        """Joint speed limits."""
        return np.array([link.v_max for link in self.links])

    @cached_property
    def reach(self) -> float:
        """Upper bound on the distance from the first joint origin to the tool point."""
        return float(
            sum(np.linalg.norm(link.offset) for link in self.links[1:])
            + np.linalg.norm(self.tool)
        )

    def check_joint_vector(self, q: object, name: str = "q") -> FloatArray:
        """Convert ``q`` to a float vector of length n.

        Raises:
            DimensionError: If the length does not match the chain.
        """
        arr = np.asarray(q, dtype=float)
        if arr.shape != (self.n,):
            raise DimensionError(f"{name} must have shape ({self.n},), got {arr.shape}")
        return arr

    def within_limits(self, q: FloatArray) -> bool:
        """Whether ``q`` lies inside the joint limits."""
        return bool(np.all(q >= self.q_min) and np.all(q <= self.q_max))


@dataclass(frozen=True, eq=False)
class JointState:
    """Manipulator state (joint positions and velocities).

    Attributes:
        q: Joint positions, rad.
        qd: Joint velocities, rad/s.
    """

    q: FloatArray
    qd: FloatArray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=float).reshape(-1)
        qd = np.asarray(self.qd, dtype=float).reshape(-1)
        if q.shape != qd.shape:
            raise DimensionError(f"q and qd lengths differ: {q.size} vs {qd.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            raise DimensionError("joint state entries must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qd", qd)

    @classmethod
    def at_rest(cls, q: object) -> JointState:
        """State at ``q`` with zero velocity."""
        q_arr = np.asarray(q, dtype=float)
        return cls(q=q_arr, qd=np.zeros_like(q_arr))


@dataclass(frozen=True, eq=False)
class TaskState:
    """End-effector pose and velocity in the base frame.

    Attributes:
        x: Position, m.
        orientation: Unit quaternion in scalar-last order (x, y, z, w).
        xd: Linear velocity, m/s.
    """

    x: FloatArray
    orientation: FloatArray
    xd: FloatArray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _as_vector(self.x, 3, "x"))
        object.__setattr__(self, "xd", _as_vector(self.xd, 3, "xd"))
        quat = _as_vector(self.orientation, 4, "orientation")
        if abs(np.linalg.norm(quat) - 1.0) > QUATERNION_NORM_TOL:
            norm = np.linalg.norm(quat)
            raise DimensionError(f"orientation must be a unit quaternion, norm={norm}")
        object.__setattr__(self, "orientation", quat)


@dataclass(frozen=True, eq=False)
class ChainPose:
    """Frame geometry of a chain at one joint vector, all in the base frame.

    Attributes:
        origins: Joint frame origins followed by the tool point, shape (n+1, 3).
        axes: Joint rotation axes, shape (n, 3).
        rotations: Frame rotations, shape (n, 3, 3).
    """

    origins: FloatArray
    axes: FloatArray
    rotations: FloatArray

    @property
    def tip(self) -> FloatArray:
        """Tool point position."""
        return self.origins[-1]

    @property
    def tip_rotation(self) -> FloatArray:
        """Rotation of the last link frame."""
        return self.rotations[-1]


@dataclass(frozen=True, eq=False)
class DynamicsTerms:
    """Joint-space and task-space dynamics at one state.

    Task-space terms follow ``Mx xdd + Cx xd + gx = f`` with
    ``Mx = Jdag^T M Jdag``, ``Cx = Jdag^T (C - M Jdag Jdot) Jdag`` and ``gx = Jdag^T g``.

    Attributes:
        q: Joint positions the terms were evaluated at.
        qd: Joint velocities the terms were evaluated at.
        M: Joint-space inertia matrix (n, n).
        M_inv: Inverse of ``M``.
        C: Christoffel-consistent Coriolis/centrifugal matrix (n, n).
        g: Gravity torques (n,).
        bias: ``C qd + g`` from recursive Newton-Euler (n,).
        J: End-effector position Jacobian (3, n).
        Jdot: Time derivative of ``J`` along ``qd`` (3, n).
        Jdag: Inertia-weighted generalized inverse of ``J`` (n, 3).
        Mx: Task-space inertia (3, 3).
        Cx: Task-space Coriolis matrix (3, 3).
        gx: Task-space gravity force (3,).
        Mx_inv: Task-space mobility ``J M^-1 J^T`` (3, 3).
        sigma_min: Smallest singular value of ``J``.
        singular: Whether damping was applied because ``sigma_min`` is below threshold.
        pose: Frame geometry at ``q``.
    """

    q: FloatArray
    qd: FloatArray
    M: FloatArray
    M_inv: FloatArray
    C: FloatArray
    g: FloatArray
    bias: FloatArray
    J: FloatArray
    Jdot: FloatArray
    Jdag: FloatArray
    Mx: FloatArray
    Cx: FloatArray
    gx: FloatArray
    Mx_inv: FloatArray
    sigma_min: float
    singular: bool
    pose: ChainPose

    @property
    def x(self) -> FloatArray:
        """End-effector position."""
        return self.pose.tip

    @property
    def xd(self) -> FloatArray:
        """End-effector linear velocity."""
        return self.J @ self.qd

    @property
    def null_projector(self) -> FloatArray:
        """Dynamically consistent torque null-space projector ``I - J^T Jdag^T``."""
        return np.eye(self.q.size) - self.J.T @ self.Jdag.T
