"""Human body capsules from 32-joint skeleton frames."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from sapsim.data import data_path
from sapsim.dynamics.models import FloatArray
from sapsim.geometry.exceptions import SkeletonShapeError
from sapsim.geometry.models import SKELETON_JOINTS, BoneMap, BoneSpec, CapsuleSet, HumanModel

logger = logging.getLogger(__name__)

BONE_MAP_FILE = "human_bones.txt"
RIGHT_HAND_JOINT = 30
PELVIS_JOINT = 0


def parse_bone_map(text: str, source: str = "<string>") -> BoneMap:
    """Parse ``name joint_a joint_b radius`` lines (``#`` comments allowed).

    Raises:
        SkeletonShapeError: If a line is malformed or the map is not 15 capsules.
    """
    bones: list[BoneSpec] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise SkeletonShapeError(
                f"{source}:{line_no}: expected 'name joint_a joint_b radius', got {line!r}"
            )
        try:
            bones.append(
                BoneSpec(
                    name=tokens[0],
                    joint_a=int(tokens[1]),
                    joint_b=int(tokens[2]),
                    radius=float(tokens[3]),
                )
            )
        except ValueError as e:
            raise SkeletonShapeError(f"{source}:{line_no}: {e}") from e
    try:
        return BoneMap(bones=tuple(bones))
    except SkeletonShapeError as e:
        raise SkeletonShapeError(f"{source}: {e}") from e


def load_bone_map(path: str | Path | None = None) -> BoneMap:
    """Read a bone map file; the packaged map when ``path`` is None."""
    resolved = data_path(BONE_MAP_FILE) if path is None else Path(path)
    if not resolved.is_file():
        raise SkeletonShapeError(f"bone map file not found: {resolved}")
    return parse_bone_map(resolved.read_text(encoding="utf-8"), source=str(resolved))


def check_frame(frame: object) -> FloatArray:
    """Validate one skeleton frame and return it as a (32, 3) array.

    Raises:
        SkeletonShapeError: On a wrong joint count or non-finite coordinates.
    """
    arr = np.asarray(frame, dtype=float)
    if arr.shape != (SKELETON_JOINTS, 3):
        raise SkeletonShapeError(f"skeleton frame must have shape (32, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SkeletonShapeError("skeleton frame has non-finite coordinates")
    return arr


def skeleton_to_capsules(frame: object, bone_map: BoneMap) -> HumanModel:
    """Build the 15 body capsules of one skeleton frame.

    Capsule ``i`` spans the two joints named by bone ``i`` with its radius.

    Raises:
        SkeletonShapeError: On a malformed frame.
    """
    joints = check_frame(frame)
    capsules = CapsuleSet(
        p0=joints[bone_map.joint_a],
        p1=joints[bone_map.joint_b],
        radii=bone_map.radii,
    )
    return HumanModel(capsules=capsules, bone_map=bone_map)


def skeleton_sequence_to_capsules(frames: object, bone_map: BoneMap) -> list[HumanModel]:
    """Body capsules of every frame in a (K, 32, 3) stack."""
    arr = np.asarray(frames, dtype=float)
    if arr.ndim != 3:
        raise SkeletonShapeError(f"frame stack must have shape (K, 32, 3), got {arr.shape}")
    return [skeleton_to_capsules(frame, bone_map) for frame in arr]
