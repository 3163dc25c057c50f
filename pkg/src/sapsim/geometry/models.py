"""Data models for capsule geometry."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.geometry.exceptions import CapsuleError, SkeletonShapeError

SKELETON_JOINTS = 32
HUMAN_CAPSULES = 15


@dataclass(frozen=True, eq=False)
class Capsule:
    """Sphere-swept segment.

    Attributes:
        p0: First segment endpoint, m.
        p1: Second segment endpoint, m (equal to ``p0`` for a sphere).
        radius: Sweep radius, m.
    """

    p0: FloatArray
    p1: FloatArray
    radius: float

    def __post_init__(self) -> None:
        p0 = np.asarray(self.p0, dtype=float).reshape(-1)
        p1 = np.asarray(self.p1, dtype=float).reshape(-1)
        if p0.shape != (3,) or p1.shape != (3,):
            raise CapsuleError("capsule endpoints must be 3-vectors")
        if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(p1))):
            raise CapsuleError("capsule endpoints must be finite")
        if not self.radius > 0.0:
            raise CapsuleError(f"capsule radius must be positive, got {self.radius}")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True, eq=False)
class CapsuleSet:
    """Capsules stored as stacked arrays for the distance kernels.

    Attributes:
        p0: First endpoints, shape (K, 3).
        p1: Second endpoints, shape (K, 3).
        radii: Radii, shape (K,).
    """

    p0: FloatArray
    p1: FloatArray
    radii: FloatArray

    def __post_init__(self) -> None:
        p0 = np.ascontiguousarray(self.p0, dtype=float)
        p1 = np.ascontiguousarray(self.p1, dtype=float)
        radii = np.ascontiguousarray(self.radii, dtype=float).reshape(-1)
        count = radii.size
        if p0.shape != (count, 3) or p1.shape != (count, 3):
            raise CapsuleError(
                f"endpoint arrays must have shape ({count}, 3), got {p0.shape} and {p1.shape}"
            )
        if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(p1))):
            raise CapsuleError("capsule endpoints must be finite")
        if np.any(radii <= 0.0):
            raise CapsuleError("capsule radii must be positive")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def from_capsules(cls, capsules: list[Capsule]) -> CapsuleSet:
        """Stack individual capsules."""
        if not capsules:
            return cls(p0=np.empty((0, 3)), p1=np.empty((0, 3)), radii=np.empty(0))
        return cls(
            p0=np.stack([c.p0 for c in capsules]),
            p1=np.stack([c.p1 for c in capsules]),
            radii=np.array([c.radius for c in capsules]),
        )

    def __len__(self) -> int:
        return int(self.radii.size)

    def __getitem__(self, index: int) -> Capsule:
        return Capsule(p0=self.p0[index], p1=self.p1[index], radius=float(self.radii[index]))


@dataclass(frozen=True)
class BoneSpec:
    """One body capsule spanning two skeleton joints.

    Attributes:
        name: Body part name.
        joint_a: First skeleton joint index.
        joint_b: Second skeleton joint index.
        radius: Capsule radius, m.
    """

    name: str
    joint_a: int
    joint_b: int
    radius: float


@dataclass(frozen=True, eq=False)
class BoneMap:
    """Static mapping from the 32-joint skeleton to the 15 body capsules."""

    bones: tuple[BoneSpec, ...]
    joint_a: np.ndarray = field(init=False, repr=False)
    joint_b: np.ndarray = field(init=False, repr=False)
    radii: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        bones = tuple(self.bones)
        if len(bones) != HUMAN_CAPSULES:
            raise SkeletonShapeError(
                f"bone map must list {HUMAN_CAPSULES} capsules, got {len(bones)}"
            )
        for bone in bones:
            for joint in (bone.joint_a, bone.joint_b):
                if not 0 <= joint < SKELETON_JOINTS:
                    raise SkeletonShapeError(
                        f"bone '{bone.name}' references joint {joint} outside 0..31"
                    )
            if not bone.radius > 0.0:
                raise SkeletonShapeError(f"bone '{bone.name}' radius must be positive")
        object.__setattr__(self, "bones", bones)
        object.__setattr__(self, "joint_a", np.array([b.joint_a for b in bones]))
        object.__setattr__(self, "joint_b", np.array([b.joint_b for b in bones]))
        object.__setattr__(self, "radii", np.array([b.radius for b in bones]))

    @property
    def names(self) -> list[str]:
        """Body part names in capsule order."""
        return [b.name for b in self.bones]

    def index(self, name: str) -> int:
        """Capsule index of a named body part."""
        return self.names.index(name)


@dataclass(frozen=True, eq=False)
class HumanModel:
    """The 15 capsules of the human body at one skeleton frame.

    Attributes:
        capsules: Body capsules in bone-map order.
        bone_map: Mapping used to build them.
    """

    capsules: CapsuleSet
    bone_map: BoneMap

    def __post_init__(self) -> None:
        if len(self.capsules) != HUMAN_CAPSULES:
            raise SkeletonShapeError(
                f"human model needs {HUMAN_CAPSULES} capsules, got {len(self.capsules)}"
            )


@dataclass(frozen=True, eq=False)
class DistanceResult:
    """Signed minimum distance between a robot shape and a human capsule.

    Attributes:
        lam: Signed distance, m; negative is the penetration depth of the swept volumes.
        p_support: Witness point on the human capsule boundary.
        x_witness: Witness point on the robot capsule boundary.
        pair: ``(robot link index, human capsule index)`` of the minimising pair.
        robot_core: Closest point on the robot capsule axis.
        human_core: Closest point on the human capsule axis.
        normal: Unit vector from ``robot_core`` towards ``human_core``.
    """

    lam: float
    p_support: FloatArray
    x_witness: FloatArray
    pair: tuple[int, int]
    robot_core: FloatArray
    human_core: FloatArray
    normal: FloatArray

    @property
    def penetrating(self) -> bool:
        """Whether the swept volumes touch or overlap."""
        return self.lam <= 0.0


@dataclass(frozen=True, eq=False)
class HumanTrack:
    """Body capsules of a sequence of frames stacked for the horizon kernel.

    Attributes:
        p0: First endpoints, shape (K, H, 3).
        p1: Second endpoints, shape (K, H, 3).
        radii: Radii, shape (K, H).
    """

    p0: FloatArray
    p1: FloatArray
    radii: FloatArray

    @classmethod
    def from_models(cls, humans: Sequence[HumanModel | CapsuleSet]) -> HumanTrack:
        """Stack one capsule set per frame.

        Raises:
            CapsuleError: If the frames hold different capsule counts or none at all.
        """
        sets = [h.capsules if isinstance(h, HumanModel) else h for h in humans]
        if not sets:
            raise CapsuleError("a human track needs at least one frame")
        if len({len(s) for s in sets}) != 1:
            raise CapsuleError("every frame of a human track needs the same capsule count")
        return cls(
            p0=np.ascontiguousarray(np.stack([s.p0 for s in sets])),
            p1=np.ascontiguousarray(np.stack([s.p1 for s in sets])),
            radii=np.ascontiguousarray(np.stack([s.radii for s in sets])),
        )

    def __len__(self) -> int:
        return int(self.radii.shape[0])


@dataclass(frozen=True, eq=False)
class HorizonDistances:
    """Closest robot/body pair at every step of a horizon.

    Attributes:
        lam: Signed distances, shape (K,).
        link: Robot link of the closest pair, shape (K,).
        capsule: Body capsule of the closest pair, shape (K,).
        robot_core: Closest point on the link axis, shape (K, 3).
        normal: Unit vector from ``robot_core`` towards the body, shape (K, 3).
    """

    lam: FloatArray
    link: np.ndarray
    capsule: np.ndarray
    robot_core: FloatArray
    normal: FloatArray
