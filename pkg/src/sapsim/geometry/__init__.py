"""Geometry - Capsule models of robot and human, signed distances by GJK."""

from sapsim.geometry.distance import (
    batch_capsule_distances,
    capsule_distance,
    capsule_distance_reference,
    distance_matrix,
    horizon_distances,
    link_distances,
    min_distance,
    segment_parameter,
    segment_segment_reference,
)
from sapsim.geometry.exceptions import (
    CapsuleError,
    EmptyCapsuleSetError,
    GeometryError,
    SkeletonShapeError,
)
from sapsim.geometry.human import (
    RIGHT_HAND_JOINT,
    load_bone_map,
    parse_bone_map,
    skeleton_sequence_to_capsules,
    skeleton_to_capsules,
)
from sapsim.geometry.models import (
    HUMAN_CAPSULES,
    SKELETON_JOINTS,
    BoneMap,
    BoneSpec,
    Capsule,
    CapsuleSet,
    DistanceResult,
    HorizonDistances,
    HumanModel,
    HumanTrack,
)
from sapsim.geometry.robot import (
    capsules_from_pose,
    robot_link_capsules,
    uniform_radii,
)

__all__ = [
    "HUMAN_CAPSULES",
    "RIGHT_HAND_JOINT",
    "SKELETON_JOINTS",
    "BoneMap",
    "BoneSpec",
    "Capsule",
    "CapsuleError",
    "CapsuleSet",
    "DistanceResult",
    "EmptyCapsuleSetError",
    "GeometryError",
    "HorizonDistances",
    "HumanModel",
    "HumanTrack",
    "SkeletonShapeError",
    "batch_capsule_distances",
    "capsule_distance",
    "capsule_distance_reference",
    "capsules_from_pose",
    "distance_matrix",
    "horizon_distances",
    "link_distances",
    "load_bone_map",
    "min_distance",
    "parse_bone_map",
    "robot_link_capsules",
    "segment_parameter",
    "segment_segment_reference",
    "skeleton_sequence_to_capsules",
    "skeleton_to_capsules",
    "uniform_radii",
]
