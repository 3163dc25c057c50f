"""Unit tests for robot and human capsule construction."""

import numpy as np
import pytest

from sapsim.dynamics import DimensionError, KinematicChain, chain_pose
from sapsim.geometry import (
    HUMAN_CAPSULES,
    BoneMap,
    Capsule,
    CapsuleError,
    CapsuleSet,
    SkeletonShapeError,
    parse_bone_map,
    robot_link_capsules,
    skeleton_to_capsules,
    uniform_radii,
)


@pytest.mark.unit
class TestCapsuleModels:
    """Tests for Capsule and CapsuleSet validation."""

    def test_rejects_non_positive_radius(self) -> None:
        """Radius must be positive."""
        with pytest.raises(CapsuleError, match="radius"):
            Capsule(p0=[0, 0, 0], p1=[1, 0, 0], radius=0.0)

    def test_rejects_non_finite_endpoint(self) -> None:
        """Endpoints must be finite."""
        with pytest.raises(CapsuleError, match="finite"):
            Capsule(p0=[0, np.inf, 0], p1=[1, 0, 0], radius=0.1)

    def test_set_indexing(self) -> None:
        """Sets round-trip individual capsules."""
        caps = [Capsule([0, 0, 0], [1, 0, 0], 0.1), Capsule([0, 1, 0], [0, 2, 0], 0.2)]
        stacked = CapsuleSet.from_capsules(caps)
        assert len(stacked) == 2
        np.testing.assert_array_equal(stacked[1].p1, [0, 2, 0])
        assert stacked[1].radius == 0.2

    def test_set_shape_mismatch(self) -> None:
        """Endpoint arrays must match the radius count."""
        with pytest.raises(CapsuleError, match="shape"):
            CapsuleSet(p0=np.zeros((2, 3)), p1=np.zeros((3, 3)), radii=np.ones(2))


@pytest.mark.unit
class TestRobotLinkCapsules:
    """Tests for robot_link_capsules."""

    def test_planar_extended(self, planar_chain: KinematicChain) -> None:
        """Extended planar arm gives two collinear capsules."""
        caps = robot_link_capsules(planar_chain, [0.0, 0.0], [0.05, 0.05])
        np.testing.assert_allclose(caps.p0, [[0, 0, 0], [0.5, 0, 0]], atol=1e-15)
        np.testing.assert_allclose(caps.p1, [[0.5, 0, 0], [1.0, 0, 0]], atol=1e-15)
        np.testing.assert_array_equal(caps.radii, [0.05, 0.05])

    def test_endpoints_are_frame_origins(self, reference_arm: KinematicChain) -> None:
        """Endpoints equal consecutive frame origins (tool point last)."""
        q = np.array([0.2, -0.3, 0.4, 1.0, -0.2, 0.5, 0.1])
        caps = robot_link_capsules(reference_arm, q, uniform_radii(reference_arm))
        origins = chain_pose(reference_arm, q).origins
        np.testing.assert_array_equal(caps.p0, origins[:-1])
        np.testing.assert_array_equal(caps.p1, origins[1:])
        assert len(caps) == reference_arm.n

    def test_wrong_radius_count(self, planar_chain: KinematicChain) -> None:
        """Radius list must match the link count."""
        with pytest.raises(DimensionError, match="link radii"):
            robot_link_capsules(planar_chain, [0.0, 0.0], [0.05])


@pytest.mark.unit
class TestSkeletonToCapsules:
    """Tests for skeleton_to_capsules and the bone map."""

    def test_collapsed_skeleton(self, bone_map: BoneMap) -> None:
        """All joints at the origin give 15 spheres at the origin."""
        human = skeleton_to_capsules(np.zeros((32, 3)), bone_map)
        assert len(human.capsules) == HUMAN_CAPSULES
        np.testing.assert_array_equal(human.capsules.p0, 0.0)
        np.testing.assert_array_equal(human.capsules.p1, 0.0)

    def test_forearm_mapping(self, bone_map: BoneMap) -> None:
        """Capsules span the mapped joints with the configured radius."""
        frame = np.zeros((32, 3))
        frame[26] = [0.0, 0.0, 0.0]
        frame[27] = [0.3, 0.0, 0.0]
        human = skeleton_to_capsules(frame, bone_map)
        forearm = human.capsules[bone_map.index("r_forearm")]
        np.testing.assert_array_equal(forearm.p0, [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(forearm.p1, [0.3, 0.0, 0.0])
        assert forearm.radius == 0.05

    def test_wrong_joint_count(self, bone_map: BoneMap) -> None:
        """Frames must have 32 joints."""
        with pytest.raises(SkeletonShapeError, match=r"\(32, 3\)"):
            skeleton_to_capsules(np.zeros((17, 3)), bone_map)

    def test_packaged_bone_map(self, bone_map: BoneMap) -> None:
        """Packaged map has 15 bones with radii between 0.05 and 0.12 m."""
        assert len(bone_map.bones) == HUMAN_CAPSULES
        assert bone_map.radii.min() >= 0.05
        assert bone_map.radii.max() <= 0.12

    def test_bone_map_needs_fifteen_lines(self) -> None:
        """A short bone map is rejected."""
        with pytest.raises(SkeletonShapeError, match="15 capsules"):
            parse_bone_map("head 13 15 0.1\n")

    def test_bone_map_joint_range(self) -> None:
        """Joint indices outside 0..31 are rejected."""
        lines = "\n".join(f"b{i} 0 1 0.05" for i in range(14)) + "\nbad 0 40 0.05"
        with pytest.raises(SkeletonShapeError, match="outside 0..31"):
            parse_bone_map(lines)

    def test_bone_map_malformed_line(self) -> None:
        """Malformed lines name their line number."""
        with pytest.raises(SkeletonShapeError, match="map.txt:2"):
            parse_bone_map("head 13 15 0.1\ntorso 13\n", source="map.txt")
