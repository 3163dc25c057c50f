"""Data models for skeleton recordings, predictions and trial metrics."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields
from typing import TYPE_CHECKING, Any

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.geometry.human import RIGHT_HAND_JOINT
from sapsim.geometry.models import SKELETON_JOINTS
from sapsim.sim.exceptions import MissingLabelError, TrajectoryFormatError

if TYPE_CHECKING:
    import pandas as pd

FRAME_PERIOD = 0.05
FRAME_TOL = 1e-6

ACTIONS = (
    "pick up",
    "move forward",
    "take the screw",
    "operate screw-driver",
    "move backward",
    "put down",
)


@dataclass(frozen=True, eq=False)
class SkeletonTrajectory:
    """Labelled 32-joint skeleton recording at 20 Hz.

    Attributes:
        times: Frame timestamps, s, spaced by :data:`FRAME_PERIOD`.
        labels: Action label of every frame.
        joints: Joint positions, shape (K, 32, 3), m.
        name: Source of the recording.
    """

    times: FloatArray
    labels: tuple[str, ...]
    joints: FloatArray
    name: str = "trajectory"

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).reshape(-1)
        joints = np.asarray(self.joints, dtype=float)
        labels = tuple(str(label) for label in self.labels)
        if times.size == 0:
            raise TrajectoryFormatError("trajectory has no frames")
        if joints.shape != (times.size, SKELETON_JOINTS, 3):
            raise TrajectoryFormatError(
                f"joints must have shape ({times.size}, 32, 3), got {joints.shape}"
            )
        if len(labels) != times.size:
            raise TrajectoryFormatError(f"{len(labels)} labels for {times.size} frames")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(joints))):
            raise TrajectoryFormatError("trajectory has non-finite values")
        steps = np.diff(times)
        if np.any(np.abs(steps - FRAME_PERIOD) > FRAME_TOL):
            bad = int(np.argmax(np.abs(steps - FRAME_PERIOD) > FRAME_TOL)) + 1
            raise TrajectoryFormatError(
                f"frame {bad}: timestamps must advance by {FRAME_PERIOD} s"
            )
        unknown = sorted(set(labels) - set(ACTIONS))
        if unknown:
            raise TrajectoryFormatError(f"unknown action labels: {unknown}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "joints", joints)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def duration(self) -> float:
        """Time from the first to the last frame."""
        return float(self.times[-1] - self.times[0])

    @property
    def right_hand(self) -> FloatArray:
        """Right-hand positions, shape (K, 3)."""
        return self.joints[:, RIGHT_HAND_JOINT]

    def frame_index(self, t: float) -> int:
        """Frame at or just before ``t``, clamped to the recording."""
        k = int(np.floor((t - self.times[0]) / FRAME_PERIOD + FRAME_TOL))
        return min(max(k, 0), len(self) - 1)

    def interpolate(self, t: float) -> FloatArray:
        """Joints at time ``t`` by linear interpolation between frames, held at the ends."""
        k = self.frame_index(t)
        if k == len(self) - 1:
            return self.joints[k].copy()
        w = min(max((t - self.times[k]) / FRAME_PERIOD, 0.0), 1.0)
        return (1.0 - w) * self.joints[k] + w * self.joints[k + 1]

    def label_span(self, label: str) -> tuple[float, float]:
        """Start and end time of the first run of ``label``.

        Raises:
            MissingLabelError: If no frame carries ``label``.
        """
        if label not in self.labels:
            raise MissingLabelError(f"trajectory {self.name!r} has no {label!r} frames")
        start = self.labels.index(label)
        end = start
        while end + 1 < len(self) and self.labels[end + 1] == label:
            end += 1
        stop = self.times[end + 1] if end + 1 < len(self) else self.times[end]
        return float(self.times[start]), float(stop)

    def shifted(self, offset: object) -> SkeletonTrajectory:
        """Copy with every joint translated by ``offset``."""
        delta = np.asarray(offset, dtype=float).reshape(3)
        return SkeletonTrajectory(self.times, self.labels, self.joints + delta, self.name)

    def held_at(self, t: float, duration: float) -> SkeletonTrajectory:
        """Copy that ends at ``t`` and then repeats that frame for ``duration`` seconds."""
        k = self.frame_index(t)
        extra = max(0, round(duration / FRAME_PERIOD))
        held = np.repeat(self.joints[k : k + 1], extra, axis=0)
        joints = np.concatenate([self.joints[: k + 1], held])
        times = self.times[0] + FRAME_PERIOD * np.arange(joints.shape[0])
        labels = self.labels[: k + 1] + (self.labels[k],) * extra
        return SkeletonTrajectory(times, labels, joints, self.name)

    def digest(self) -> str:
        """Content hash identifying the recording across trials."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times).tobytes())
        h.update("\n".join(self.labels).encode("utf-8"))
        h.update(np.ascontiguousarray(self.joints).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Prediction:
    """Predicted human motion over the planning horizon.

    Attributes:
        p_rh: Right-hand positions, shape (tau_p, 3).
        p_o: Full skeletons, shape (tau_p, 32, 3).
        horizon: Time covered, s.
    """

    p_rh: FloatArray
    p_o: FloatArray
    horizon: float

    def __post_init__(self) -> None:
        p_rh = np.asarray(self.p_rh, dtype=float)
        p_o = np.asarray(self.p_o, dtype=float)
        if p_o.ndim != 3 or p_o.shape[1:] != (SKELETON_JOINTS, 3):
            raise TrajectoryFormatError(f"p_o must have shape (tau_p, 32, 3), got {p_o.shape}")
        if p_rh.shape != (p_o.shape[0], 3):
            raise TrajectoryFormatError(
                f"p_rh must have shape ({p_o.shape[0]}, 3), got {p_rh.shape}"
            )
        if not (np.all(np.isfinite(p_rh)) and np.all(np.isfinite(p_o))):
            raise TrajectoryFormatError("prediction has non-finite coordinates")
        object.__setattr__(self, "p_rh", p_rh)
        object.__setattr__(self, "p_o", p_o)

    @property
    def frames(self) -> int:
        """Number of predicted frames."""
        return int(self.p_o.shape[0])

    @classmethod
    def from_skeletons(cls, frames: FloatArray) -> Prediction:
        """Prediction whose hand track is the right-hand joint of ``frames``."""
        arr = np.asarray(frames, dtype=float)
        return cls(p_rh=arr[:, RIGHT_HAND_JOINT], p_o=arr, horizon=arr.shape[0] * FRAME_PERIOD)


@dataclass(frozen=True)
class TrialMetrics:
    """Summary of one closed-loop trial, one CSV row.

    Attributes:
        trial: Trial index within a suite.
        controller: ``nmpc_only`` or ``nmpc_ecbf``.
        seed: Seed of the trial.
        trajectory: Name of the human recording.
        trajectory_hash: Content hash of the human recording.
        max_acc: Peak end-effector acceleration, m/s^2.
        min_lambda: Smallest signed robot/human distance over all links, m.
        violation_count: Plant steps with ``lambda < d_safe``.
        h_idl: Human idle time, s.
        r_idl: Robot idle time, s.
        total_time: Simulated or task time, s.
        fallback_count: Braking fallbacks of the safety filter.
        plan_count: Planner solves.
        failed_plans: Solves that ended in a numerical failure.
        degraded_plans: Solves stopped by an iteration cap.
        goal_error: Final tool distance to the handover target, m.
        reached_goal: Whether the tool came within the goal tolerance.
        fault: Error message of an aborted trial, empty otherwise.
    """

    trial: int
    controller: str
    seed: int
    trajectory: str
    trajectory_hash: str
    max_acc: float
    min_lambda: float
    violation_count: int
    h_idl: float = 0.0
    r_idl: float = 0.0
    total_time: float = 0.0
    fallback_count: int = 0
    plan_count: int = 0
    failed_plans: int = 0
    degraded_plans: int = 0
    goal_error: float = float("nan")
    reached_goal: bool = False
    fault: str = ""

    def __post_init__(self) -> None:
        if self.violation_count < 0:
            raise ValueError(f"violation_count must be non-negative, got {self.violation_count}")
        if self.total_time < self.h_idl - 1e-12:
            raise ValueError(
                f"total_time {self.total_time} must not be below h_idl {self.h_idl}"
            )

    @property
    def faulted(self) -> bool:
        """Whether the trial was aborted."""
        return bool(self.fault)

    def to_row(self) -> dict[str, Any]:
        """Flat mapping for a CSV row."""
        return asdict(self)

    @classmethod
    def from_row(cls, row: dict[str, Any]) -> TrialMetrics:
        """Inverse of :meth:`to_row`, tolerant of the types pandas reads back."""
        kwargs: dict[str, Any] = {}
        for f in fields(cls):
            value = row[f.name]
            if f.type == "bool":
                value = str(value).strip().lower() in {"true", "1"}
            elif f.type == "int":
                value = int(value)
            elif f.type == "float":
                value = float(value)
            elif value is None or (isinstance(value, float) and np.isnan(value)):
                # pandas reads an empty string cell back as NaN
                value = ""
            else:
                value = str(value)
            kwargs[f.name] = value
        return cls(**kwargs)


@dataclass(frozen=True, eq=False)
class TrialResult:
    """Metrics plus the per-plant-step log of one trial.

    Attributes:
        metrics: Trial summary.
        log: Tick log, one row per plant step.
        stop_reason: Why the loop ended.
        arrival_time: Time the tool reached the handover target, when measured.
    """

    metrics: TrialMetrics
    log: pd.DataFrame
    stop_reason: str = ""
    arrival_time: float | None = None
