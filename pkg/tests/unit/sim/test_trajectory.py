"""Unit tests for synthetic recordings and the skeleton CSV format."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from sapsim.geometry import SKELETON_JOINTS
from sapsim.geometry.human import RIGHT_HAND_JOINT
from sapsim.sim import (
    FRAME_PERIOD,
    TrajectoryFormatError,
    load_trajectory,
    read_trajectory,
    synthetic_trajectory,
    write_trajectory,
)
from sapsim.sim.trajectory import CSV_COLUMNS, RIGHT_WRIST, WRIST_TO_HAND


@pytest.mark.unit
class TestSyntheticTrajectory:
    """Tests for synthetic_trajectory."""

    @pytest.mark.parametrize("variant", [0, 1, 2])
    def test_fourteen_seconds_at_twenty_hertz(self, variant: int) -> None:
        """281 frames from 0 to 14 s."""
        traj = synthetic_trajectory(variant)
        assert len(traj) == 281
        assert traj.duration == pytest.approx(14.0)
        assert traj.name == f"synthetic:{variant}"

    def test_labels_follow_phase_order(self) -> None:
        """Each subtask appears once, in task order, at the scripted times."""
        traj = synthetic_trajectory(0)
        runs = [traj.labels[0]]
        for label in traj.labels[1:]:
            if label != runs[-1]:
                runs.append(label)
        assert runs == [
            "pick up",
            "move forward",
            "take the screw",
            "operate screw-driver",
            "move backward",
            "put down",
        ]
        start, end = traj.label_span("take the screw")
        assert start == pytest.approx(4.5, abs=FRAME_PERIOD + 1e-9)
        assert end == pytest.approx(6.5, abs=FRAME_PERIOD + 1e-9)

    def test_hand_is_smooth(self) -> None:
        """Frame-to-frame hand steps stay below 5 cm."""
        hands = synthetic_trajectory(1).right_hand
        steps = np.linalg.norm(np.diff(hands, axis=0), axis=1)
        assert steps.max() < 0.05

    def test_hand_held_out_for_handover(self) -> None:
        """During the handover the hand reaches towards the robot (smaller x than at rest)."""
        traj = synthetic_trajectory(0)
        start, _ = traj.label_span("take the screw")
        reach = traj.right_hand[traj.frame_index(start)]
        assert reach[0] < traj.right_hand[0, 0] - 0.2

    def test_wrist_trails_hand(self) -> None:
        """The wrist sits a fixed distance from the hand."""
        traj = synthetic_trajectory(2)
        gap = np.linalg.norm(traj.joints[:, RIGHT_WRIST] - traj.joints[:, RIGHT_HAND_JOINT], axis=1)
        np.testing.assert_allclose(gap, WRIST_TO_HAND)

    def test_body_stands_still(self) -> None:
        """The pelvis does not move."""
        traj = synthetic_trajectory(0)
        np.testing.assert_array_equal(traj.joints[:, 0], np.tile(traj.joints[0, 0], (281, 1)))

    def test_unknown_variant(self) -> None:
        """Only three variants exist."""
        with pytest.raises(TrajectoryFormatError, match="variant"):
            synthetic_trajectory(3)


@pytest.mark.unit
class TestTrajectoryCsv:
    """Tests for read_trajectory and write_trajectory."""

    def test_written_file_reads_back(self, tmp_path: Path) -> None:
        """A written recording re-parses to the same frames."""
        traj = synthetic_trajectory(0)
        path = write_trajectory(traj, tmp_path / "out" / "rec.csv")
        back = read_trajectory(path)
        assert back.labels == traj.labels
        np.testing.assert_allclose(back.joints, traj.joints, atol=1e-12)
        assert back.name == "rec"

    def test_header(self, tmp_path: Path) -> None:
        """Columns are t, label and 96 joint coordinates."""
        path = write_trajectory(synthetic_trajectory(0), tmp_path / "rec.csv")
        header = path.read_text().splitlines()[0].split(",")
        assert header == CSV_COLUMNS
        assert len(header) == 2 + 3 * SKELETON_JOINTS

    def test_missing_column(self, tmp_path: Path) -> None:
        """A file without joint columns is rejected."""
        path = tmp_path / "bad.csv"
        pd.DataFrame({"t": [0.0], "label": ["pick up"]}).to_csv(path, index=False)
        with pytest.raises(TrajectoryFormatError, match="missing columns"):
            read_trajectory(path)

    def test_empty_file(self, tmp_path: Path) -> None:
        """An empty file is a format error."""
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(TrajectoryFormatError, match="cannot parse"):
            read_trajectory(path)

    def test_bad_spacing(self, tmp_path: Path) -> None:
        """Frame invariants are enforced on read."""
        frame = pd.read_csv(write_trajectory(synthetic_trajectory(0), tmp_path / "rec.csv"))
        frame.loc[5, "t"] += 0.01
        path = tmp_path / "shifted.csv"
        frame.to_csv(path, index=False)
        with pytest.raises(TrajectoryFormatError, match="frame 5"):
            read_trajectory(path)


@pytest.mark.unit
class TestLoadTrajectory:
    """Tests for load_trajectory."""

    def test_synthetic_source(self) -> None:
        """synthetic:<n> selects a variant."""
        assert load_trajectory("synthetic:1").name == "synthetic:1"

    def test_bad_synthetic_source(self) -> None:
        """A non-integer variant is a format error."""
        with pytest.raises(TrajectoryFormatError, match="invalid synthetic variant"):
            load_trajectory("synthetic:x")

    def test_offset(self) -> None:
        """An offset moves the whole skeleton."""
        base = load_trajectory("synthetic:0")
        moved = load_trajectory("synthetic:0", (0.1, 0.0, 0.0))
        np.testing.assert_allclose(moved.joints - base.joints, np.tile([0.1, 0, 0], (281, 32, 1)))

    def test_file_source(self, tmp_path: Path) -> None:
        """A CSV path is read from disk."""
        path = write_trajectory(synthetic_trajectory(2), tmp_path / "rec.csv")
        assert len(load_trajectory(path)) == 281
