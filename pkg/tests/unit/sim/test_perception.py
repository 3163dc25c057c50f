"""Unit tests for the motion predictor and action recognizer stand-ins."""

import numpy as np
import pytest

from sapsim.config import PerceptionSection, Predictor
from sapsim.geometry import SKELETON_JOINTS
from sapsim.sim import (
    ACTIONS,
    EndOfTrajectory,
    Perception,
    predict,
    predict_constant_velocity,
    predict_oracle,
    recognize,
    synthetic_trajectory,
)


def _frames(*xs):
    out = np.zeros((len(xs), SKELETON_JOINTS, 3))
    out[:, :, 0] = np.asarray(xs)[:, None]
    return out


@pytest.mark.unit
class TestConstantVelocity:
    """Tests for predict_constant_velocity."""

    def test_linear_extrapolation(self) -> None:
        """Frame k lies k steps beyond the last observation."""
        out = predict_constant_velocity(_frames(0.0, 0.1, 0.3), 3)
        np.testing.assert_allclose(out[:, 0, 0], [0.5, 0.7, 0.9])

    def test_single_frame_is_held(self) -> None:
        """Without a velocity estimate the last frame repeats."""
        out = predict_constant_velocity(_frames(0.4), 2)
        np.testing.assert_allclose(out[:, :, 0], 0.4)


@pytest.mark.unit
class TestOracle:
    """Tests for predict_oracle."""

    def test_pads_with_last_frame(self) -> None:
        """Fewer recorded frames than requested are padded."""
        out = predict_oracle(_frames(1.0, 2.0), 4)
        np.testing.assert_allclose(out[:, 0, 0], [1.0, 2.0, 2.0, 2.0])

    def test_noise_is_bounded(self, rng: np.random.Generator) -> None:
        """Every coordinate moves by at most the bound."""
        future = _frames(*np.linspace(0.0, 1.0, 20))
        out = predict_oracle(future, 20, 0.02, rng)
        assert np.max(np.abs(out - future)) <= 0.02
        assert np.max(np.abs(out - future)) > 0.0

    def test_noise_needs_generator(self) -> None:
        """A noisy oracle without a generator is a usage error."""
        with pytest.raises(ValueError, match="generator"):
            predict_oracle(_frames(1.0), 2, 0.01)

    def test_end_of_recording(self) -> None:
        """Nothing left to replay raises EndOfTrajectory."""
        with pytest.raises(EndOfTrajectory):
            predict_oracle(np.zeros((0, SKELETON_JOINTS, 3)), 5)


@pytest.mark.unit
class TestPredict:
    """Tests for predict."""

    def test_oracle_without_future(self) -> None:
        """The oracle needs the recorded future."""
        with pytest.raises(EndOfTrajectory):
            predict(Predictor.ORACLE, _frames(0.0))

    def test_constant_velocity_mode(self) -> None:
        """The mode string selects the extrapolator."""
        pred = predict("constant_velocity", _frames(0.0, 0.1), 4)
        assert pred.frames == 4
        np.testing.assert_allclose(pred.p_rh[:, 0], [0.2, 0.3, 0.4, 0.5])


@pytest.mark.unit
class TestRecognize:
    """Tests for recognize."""

    def test_perfect_recognizer(self, rng: np.random.Generator) -> None:
        """p_err = 0 returns the true label."""
        assert recognize(["pick up", "move forward"], 0.0, rng) == "move forward"

    def test_always_wrong(self, rng: np.random.Generator) -> None:
        """p_err = 1 always returns another action."""
        for _ in range(20):
            label = recognize(["take the screw"], 1.0, rng)
            assert label != "take the screw"
            assert label in ACTIONS

    def test_error_rate(self) -> None:
        """The flip frequency matches p_err."""
        rng = np.random.default_rng(7)
        wrong = sum(recognize(["put down"], 0.3, rng) != "put down" for _ in range(4000))
        assert wrong / 4000 == pytest.approx(0.3, abs=0.03)


@pytest.mark.unit
class TestPerception:
    """Tests for the per-trial Perception wrapper."""

    def test_oracle_replays_recording(self) -> None:
        """Without noise the oracle returns the next recorded frames."""
        traj = synthetic_trajectory(0)
        config = PerceptionSection(noise_bound=0.0, prediction_frames=5)
        pred = Perception(config, np.random.default_rng(0)).predict(traj, 10)
        np.testing.assert_array_equal(pred.p_o, traj.joints[11:16])

    def test_recognize_reads_frame_label(self) -> None:
        """The recognizer sees the label of the given frame."""
        traj = synthetic_trajectory(0)
        perception = Perception(PerceptionSection(), np.random.default_rng(0))
        assert perception.recognize(traj, 0) == "pick up"
        assert perception.recognize(traj, 280) == "put down"

    def test_same_seed_same_noise(self) -> None:
        """Two wrappers with equal seeds predict identically."""
        traj = synthetic_trajectory(1)
        config = PerceptionSection(noise_bound=0.05)
        a = Perception(config, np.random.default_rng(3)).predict(traj, 40)
        b = Perception(config, np.random.default_rng(3)).predict(traj, 40)
        np.testing.assert_array_equal(a.p_o, b.p_o)
