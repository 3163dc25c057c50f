"""Skeleton trajectory CSV reader/writer and the synthetic screw-driver recordings."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from sapsim.dynamics.models import FloatArray
from sapsim.geometry.human import RIGHT_HAND_JOINT
from sapsim.geometry.models import SKELETON_JOINTS
from sapsim.sim.exceptions import TrajectoryFormatError
from sapsim.sim.models import ACTIONS, FRAME_PERIOD, SkeletonTrajectory

logger = logging.getLogger(__name__)

SYNTHETIC_PREFIX = "synthetic:"
JOINT_COLUMNS = [f"j{i}{axis}" for i in range(SKELETON_JOINTS) for axis in "xyz"]
CSV_COLUMNS = ["t", "label", *JOINT_COLUMNS]

# Static body of an operator standing in front of the robot, facing -x; the
# operator's right is +y.
PELVIS = np.array([1.35, 0.0, 0.0])
_BODY = {
    0: (1.35, 0.00, 0.00),
    1: (1.35, 0.10, -0.05),
    2: (1.33, 0.10, -0.45),
    3: (1.35, 0.10, -0.85),
    4: (1.27, 0.10, -0.90),
    5: (1.20, 0.10, -0.90),
    6: (1.35, -0.10, -0.05),
    7: (1.33, -0.10, -0.45),
    8: (1.35, -0.10, -0.85),
    9: (1.27, -0.10, -0.90),
    10: (1.20, -0.10, -0.90),
    11: (1.35, 0.00, 0.18),
    12: (1.35, 0.00, 0.34),
    13: (1.35, 0.00, 0.50),
    14: (1.34, 0.00, 0.60),
    15: (1.34, 0.00, 0.75),
    16: (1.28, 0.00, 0.68),
    17: (1.35, -0.20, 0.45),
    18: (1.32, -0.24, 0.18),
    19: (1.22, -0.24, 0.05),
    20: (1.20, -0.25, 0.04),
    21: (1.19, -0.23, 0.04),
    22: (1.16, -0.24, 0.03),
    23: (1.15, -0.22, 0.03),
    24: (1.17, -0.27, 0.03),
    25: (1.35, 0.20, 0.45),
}
RIGHT_SHOULDER = 25
RIGHT_ELBOW = 26
RIGHT_WRIST = 27
RIGHT_FINGERS = {28: (0.0, 0.02, 0.0), 29: (0.0, -0.02, 0.0), 31: (-0.02, 0.0, 0.02)}
FOREARM_BEND = np.array([0.0, 0.05, -0.10])
WRIST_TO_HAND = 0.07

# Hand keyframes of every variant: phase boundaries in seconds and the
# interactive point the hand is held at for the handover.
_VARIANTS = (
    {"bounds": (0.0, 2.0, 4.5, 6.5, 10.5, 12.5, 14.0), "interactive": (0.85, 0.20, 0.30)},
    {"bounds": (0.0, 1.8, 4.2, 6.2, 10.2, 12.3, 14.0), "interactive": (0.85, 0.12, 0.35)},
    {"bounds": (0.0, 2.2, 4.8, 6.8, 10.6, 12.6, 14.0), "interactive": (0.88, 0.28, 0.25)},
)
REST = np.array([1.20, 0.35, 0.05])
LIFTED = np.array([1.18, 0.38, 0.14])
WORKPIECE = np.array([1.08, 0.02, 0.20])
SCREW_SWING = np.array([0.0, 0.03, 0.0])


def _hand_keyframes(variant: int) -> tuple[FloatArray, FloatArray]:
    shape = _VARIANTS[variant]
    b = shape["bounds"]
    reach = np.asarray(shape["interactive"], dtype=float)
    operate = b[4] - b[3]
    times = [
        b[0],
        b[1],
        b[2],
        b[3],
        b[3] + 0.25 * operate,
        b[3] + 0.5 * operate,
        b[3] + 0.75 * operate,
        b[4],
        b[5],
        b[6],
    ]
    points = [
        REST,
        LIFTED,
        reach,
        reach + np.array([0.01, 0.0, 0.01]),
        WORKPIECE,
        WORKPIECE + SCREW_SWING,
        WORKPIECE - SCREW_SWING,
        WORKPIECE,
        LIFTED,
        REST,
    ]
    return np.asarray(times), np.asarray(points)


def _right_arm(hand: FloatArray) -> dict[int, FloatArray]:
    shoulder = np.asarray(_BODY[RIGHT_SHOULDER])
    along = hand - shoulder
    wrist = hand - WRIST_TO_HAND * along / np.linalg.norm(along)
    elbow = 0.5 * (shoulder + wrist) + FOREARM_BEND
    arm = {RIGHT_ELBOW: elbow, RIGHT_WRIST: wrist, RIGHT_HAND_JOINT: hand}
    for joint, offset in RIGHT_FINGERS.items():
        arm[joint] = hand + np.asarray(offset)
    return arm


def synthetic_trajectory(variant: int = 0) -> SkeletonTrajectory:
    """Scripted screw-driver task through the six labelled subtasks.

    The right hand follows a clamped cubic spline through keyframes; the rest of
    the body stands still.

    Raises:
        TrajectoryFormatError: If ``variant`` is not 0, 1 or 2.
    """
    if not 0 <= variant < len(_VARIANTS):
        raise TrajectoryFormatError(
            f"synthetic variant must be in [0, {len(_VARIANTS) - 1}], got {variant}"
        )
    key_times, key_points = _hand_keyframes(variant)
    spline = CubicSpline(key_times, key_points, axis=0, bc_type="clamped")
    bounds = _VARIANTS[variant]["bounds"]
    count = round((bounds[-1] - bounds[0]) / FRAME_PERIOD) + 1
    times = bounds[0] + FRAME_PERIOD * np.arange(count)
    hands = spline(times)

    body = np.zeros((SKELETON_JOINTS, 3))
    for joint, point in _BODY.items():
        body[joint] = point
    joints = np.repeat(body[None], count, axis=0)
    for k, hand in enumerate(hands):
        for joint, point in _right_arm(hand).items():
            joints[k, joint] = point

    phase = np.searchsorted(np.asarray(bounds[1:-1]), times, side="right")
    labels = tuple(ACTIONS[p] for p in phase)
    return SkeletonTrajectory(times, labels, joints, name=f"synthetic:{variant}")


def read_trajectory(path: str | Path) -> SkeletonTrajectory:
    """Read a skeleton CSV with header ``t,label,j0x,j0y,j0z,...,j31z``.

    Raises:
        TrajectoryFormatError: If the file is missing columns, unparseable or
            violates the frame invariants.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"label": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise TrajectoryFormatError(f"cannot parse {path}: {e}") from e
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise TrajectoryFormatError(f"{path}: missing columns {missing[:3]}")
    try:
        joints = frame[JOINT_COLUMNS].to_numpy(dtype=float)
        times = frame["t"].to_numpy(dtype=float)
    except ValueError as e:
        raise TrajectoryFormatError(f"{path}: non-numeric coordinates") from e
    trajectory = SkeletonTrajectory(
        times=times,
        labels=tuple(frame["label"].astype(str)),
        joints=joints.reshape(-1, SKELETON_JOINTS, 3),
        name=path.stem,
    )
    logger.debug("read %d frames from %s", len(trajectory), path)
    return trajectory


def write_trajectory(trajectory: SkeletonTrajectory, path: str | Path) -> Path:
    """Write ``trajectory`` in the format :func:`read_trajectory` accepts."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(trajectory.joints.reshape(len(trajectory), -1), columns=JOINT_COLUMNS)
    frame.insert(0, "label", list(trajectory.labels))
    frame.insert(0, "t", trajectory.times)
    frame.to_csv(path, index=False)
    return path


def load_trajectory(source: str | Path, offset: object = None) -> SkeletonTrajectory:
    """Recording from ``synthetic:<variant>`` or a CSV path, translated by ``offset``.

    Raises:
        TrajectoryFormatError: On an unknown variant or a malformed file.
    """
    if isinstance(source, str) and source.startswith(SYNTHETIC_PREFIX):
        raw = source.removeprefix(SYNTHETIC_PREFIX)
        try:
            variant = int(raw)
        except ValueError as e:
            raise TrajectoryFormatError(f"invalid synthetic variant {raw!r}") from e
        trajectory = synthetic_trajectory(variant)
    else:
        trajectory = read_trajectory(source)
    if offset is not None and np.any(np.asarray(offset, dtype=float)):
        trajectory = trajectory.shifted(offset)
    return trajectory
