"""Stand-ins for the human motion predictor and the action recognizer."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from sapsim.config import PerceptionSection, Predictor
from sapsim.dynamics.models import FloatArray
from sapsim.sim.exceptions import EndOfTrajectory, TrajectoryFormatError
from sapsim.sim.models import ACTIONS, Prediction, SkeletonTrajectory

logger = logging.getLogger(__name__)


def predict_constant_velocity(history: FloatArray, frames: int) -> FloatArray:
    """Extrapolate every joint linearly from the last two observed frames.

    Frame ``k`` (1-based) lies at ``last + k (last - previous)``; a single
    observed frame is held.
    """
    history = np.asarray(history, dtype=float)
    if history.ndim != 3 or history.shape[0] < 1:
        raise TrajectoryFormatError(f"history must have shape (H, 32, 3), got {history.shape}")
    last = history[-1]
    step = last - history[-2] if history.shape[0] > 1 else np.zeros_like(last)
    k = np.arange(1, frames + 1)[:, None, None]
    return last[None] + k * step[None]


def predict_oracle(
    future: FloatArray,
    frames: int,
    noise_bound: float = 0.0,
    rng: np.random.Generator | None = None,
) -> FloatArray:
    """Recorded future frames, padded with the last one, plus bounded uniform noise.

    Raises:
        EndOfTrajectory: If no recorded frame remains.
    """
    future = np.asarray(future, dtype=float)
    if future.shape[0] == 0:
        raise EndOfTrajectory("no recorded frames left to predict from")
    if future.shape[0] < frames:
        pad = np.repeat(future[-1:], frames - future.shape[0], axis=0)
        future = np.concatenate([future, pad])
    out = future[:frames].copy()
    if noise_bound > 0.0:
        if rng is None:
            raise ValueError("a noisy oracle needs a random generator")
        out += rng.uniform(-noise_bound, noise_bound, size=out.shape)
    return out


def predict(
    mode: Predictor | str,
    history: FloatArray,
    frames: int = 20,
    *,
    future: FloatArray | None = None,
    noise_bound: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Prediction:
    """Predicted skeletons over the next ``frames`` frames.

    Args:
        mode: ``oracle`` replays the recording; ``constant_velocity`` extrapolates.
        history: Observed frames, oldest first, shape (H, 32, 3).
        frames: Number of predicted frames.
        future: Recorded frames after the history; required by the oracle.
        noise_bound: Oracle noise bound per coordinate, m.
        rng: Generator for the oracle noise.

    Raises:
        EndOfTrajectory: If the oracle has nothing left to replay.
    """
    if Predictor(mode) is Predictor.ORACLE:
        if future is None:
            raise EndOfTrajectory("oracle prediction needs the recorded future")
        skeletons = predict_oracle(future, frames, noise_bound, rng)
    else:
        skeletons = predict_constant_velocity(history, frames)
    return Prediction.from_skeletons(skeletons)


def recognize(
    labels: Sequence[str],
    p_err: float = 0.0,
    rng: np.random.Generator | None = None,
    actions: Sequence[str] = ACTIONS,
) -> str:
    """Label of the latest frame, flipped to another action with probability ``p_err``."""
    label = labels[-1]
    if p_err <= 0.0 or rng is None:
        return label
    if rng.random() >= p_err:
        return label
    others = [a for a in actions if a != label]
    return str(others[rng.integers(len(others))]) if others else label


class Perception:
    """Predictor and recognizer of one trial, sharing a seeded generator."""

    def __init__(self, config: PerceptionSection, rng: np.random.Generator) -> None:
        self.config = config
        self.rng = rng

    def recognize(self, trajectory: SkeletonTrajectory, frame: int) -> str:
        """Recognized action at ``frame``."""
        return recognize(trajectory.labels[frame : frame + 1], self.config.p_err, self.rng)

    def predict(self, trajectory: SkeletonTrajectory, frame: int) -> Prediction:
        """Prediction made at ``frame`` from the observed history.

        Raises:
            EndOfTrajectory: If the oracle has nothing left to replay.
        """
        start = max(0, frame + 1 - self.config.history_frames)
        history = trajectory.joints[start : frame + 1]
        return predict(
            self.config.predictor,
            history,
            self.config.prediction_frames,
            future=trajectory.joints[frame + 1 :],
            noise_bound=self.config.noise_bound,
            rng=self.rng,
        )
