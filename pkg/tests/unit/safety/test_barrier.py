"""Unit tests for the per-link barrier rows."""

from collections.abc import Callable

import numpy as np
import pytest

from sapsim.dynamics import JointState, KinematicChain, dynamics_terms, forward_kinematics
from sapsim.geometry import (
    SKELETON_JOINTS,
    BoneMap,
    DistanceResult,
    HumanModel,
    skeleton_to_capsules,
    uniform_radii,
)
from sapsim.safety import BarrierRow, WitnessDifferencer, barrier_rows, link_witnesses

Q = np.array([0.3, 0.6])
D_SAFE = 0.1
K_B = (7.0, 7.0)


def _beyond_tip(chain: KinematicChain, offset: float) -> np.ndarray:
    """Point ``offset`` m beyond the planar tip along the last link."""
    heading = np.array([np.cos(Q.sum()), np.sin(Q.sum()), 0.0])
    return forward_kinematics(chain, Q).x + offset * heading


def _rows(chain, state, human):
    terms = dynamics_terms(chain, state)
    return barrier_rows(terms, human, D_SAFE, K_B, uniform_radii(chain))


@pytest.mark.unit
class TestBarrierRows:
    """Tests for barrier_rows."""

    def test_barrier_value_by_hand(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """0.38 m between cores minus 0.06 and 0.12 radii leaves lambda = 0.2, h = 0.03."""
        human = human_at(_beyond_tip(planar_chain, 0.38))
        rows = _rows(planar_chain, JointState.at_rest(Q), human)
        assert len(rows) == 2
        assert rows[1].h == pytest.approx(0.03, abs=1e-9)
        assert not rows[1].penetrating

    def test_static_scene_has_zero_rate(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """Robot at rest and human still: dh/dt = 0."""
        human = human_at(_beyond_tip(planar_chain, 0.3))
        for row in _rows(planar_chain, JointState.at_rest(Q), human):
            assert row.lf_h == 0.0

    def test_rate_matches_finite_difference(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """Lf h equals the central difference of h along the joint velocity."""
        human = human_at(_beyond_tip(planar_chain, 0.33))
        qd = np.array([0.4, -0.3])
        eps = 1e-6
        rows = _rows(planar_chain, JointState(q=Q, qd=qd), human)
        ahead = _rows(planar_chain, JointState.at_rest(Q + eps * qd), human)
        behind = _rows(planar_chain, JointState.at_rest(Q - eps * qd), human)
        for row, up, down in zip(rows, ahead, behind, strict=True):
            assert row.lf_h == pytest.approx((up.h - down.h) / (2 * eps), abs=1e-6)

    def test_human_velocity_enters_rate(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """A human approaching the resting robot makes dh/dt negative."""
        target = _beyond_tip(planar_chain, 0.33)
        heading = target - forward_kinematics(planar_chain, Q).x
        approach = -heading / np.linalg.norm(heading)
        terms = dynamics_terms(planar_chain, JointState.at_rest(Q))
        rows = barrier_rows(
            terms,
            human_at(target),
            D_SAFE,
            K_B,
            uniform_radii(planar_chain),
            support_velocities=np.tile(approach, (2, 1)),
        )
        assert rows[1].lf_h == pytest.approx(-2.0 * 0.15, rel=1e-6)

    def test_force_towards_human_lowers_curvature(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """Pushing the tool at the human has a negative input coefficient on the tip row."""
        target = _beyond_tip(planar_chain, 0.33)
        heading = target - forward_kinematics(planar_chain, Q).x
        rows = _rows(planar_chain, JointState.at_rest(Q), human_at(target))
        assert rows[1].lg_lf_h @ heading < 0.0

    def test_penetration_gives_negative_barrier(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """Overlapping volumes give h below -d_safe^2."""
        human = human_at(_beyond_tip(planar_chain, 0.1))
        rows = _rows(planar_chain, JointState.at_rest(Q), human)
        assert rows[1].penetrating
        assert rows[1].h < -D_SAFE**2

    def test_precomputed_witnesses(
        self, planar_chain: KinematicChain, human_at: Callable[..., HumanModel]
    ) -> None:
        """Passing the witnesses in gives the same rows."""
        human = human_at(_beyond_tip(planar_chain, 0.3))
        terms = dynamics_terms(planar_chain, JointState(q=Q, qd=[0.2, 0.1]))
        radii = uniform_radii(planar_chain)
        witnesses = link_witnesses(terms, human, radii)
        direct = barrier_rows(terms, human, D_SAFE, K_B, radii)
        reused = barrier_rows(terms, human, D_SAFE, K_B, radii, witnesses=witnesses)
        for a, b in zip(direct, reused, strict=True):
            assert a.h == b.h
            assert a.lf2_h == b.lf2_h

    def test_row_bound(self) -> None:
        """The linear row carries -(lf2_h + k2 lf_h + k1 h)."""
        row = BarrierRow(
            link=1, h=0.03, lf_h=-0.1, lf2_h=0.2, lg_lf_h=np.array([1.0, 0.0, 0.0]), k1=7, k2=7
        ).row()
        assert row.bound == pytest.approx(-(0.2 - 0.7 + 0.21))
        assert row.name == "barrier[1]"


@pytest.mark.unit
class TestWitnessDifferencer:
    """Tests for the witness-point velocity estimate."""

    @staticmethod
    def _frame() -> np.ndarray:
        index = np.arange(SKELETON_JOINTS, dtype=float)
        return np.column_stack([0.1 * index, 0.02 * index**2, np.ones(SKELETON_JOINTS)])

    @staticmethod
    def _witness(core: np.ndarray, capsule: int) -> DistanceResult:
        return DistanceResult(
            lam=0.3,
            p_support=core,
            x_witness=np.zeros(3),
            pair=(0, capsule),
            robot_core=np.zeros(3),
            human_core=np.asarray(core, dtype=float),
            normal=np.array([1.0, 0.0, 0.0]),
        )

    def test_first_frame_is_zero(self, bone_map: BoneMap) -> None:
        """No history gives zero velocity."""
        human = skeleton_to_capsules(self._frame(), bone_map)
        diff = WitnessDifferencer()
        diff.update(0, human)
        witnesses = [self._witness(human.capsules.p0[2], 2)]
        assert not diff.tracking
        np.testing.assert_array_equal(diff.velocities(witnesses, human), np.zeros((1, 3)))

    def test_translation_over_one_frame(self, bone_map: BoneMap) -> None:
        """5 cm of body motion over one 50 ms frame is 1 m/s at any witness."""
        before = skeleton_to_capsules(self._frame(), bone_map)
        after = skeleton_to_capsules(self._frame() + [0.05, 0.0, 0.0], bone_map)
        diff = WitnessDifferencer(period=0.05)
        diff.update(3, before)
        diff.update(4, after)
        caps = after.capsules
        witnesses = [
            self._witness(0.5 * (caps.p0[1] + caps.p1[1]), 1),
            self._witness(caps.p1[4], 4),
        ]
        assert diff.tracking
        np.testing.assert_allclose(
            diff.velocities(witnesses, after), [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], atol=1e-9
        )

    def test_witness_switch_on_still_body_reads_zero(self, bone_map: BoneMap) -> None:
        """A witness jumping between capsules of a still body has no velocity."""
        human = skeleton_to_capsules(self._frame(), bone_map)
        diff = WitnessDifferencer()
        diff.update(0, human)
        diff.update(1, human)
        caps = human.capsules
        first = diff.velocities([self._witness(caps.p0[0], 0)], human)
        switched = diff.velocities([self._witness(caps.p1[5], 5)], human)
        np.testing.assert_array_equal(first, np.zeros((1, 3)))
        np.testing.assert_array_equal(switched, np.zeros((1, 3)))

    def test_rate_interpolated_along_capsule(self, bone_map: BoneMap) -> None:
        """Stretching the body reads each endpoint's own rate at that endpoint."""
        frame = self._frame()
        before = skeleton_to_capsules(frame, bone_map)
        after = skeleton_to_capsules(1.1 * frame, bone_map)
        diff = WitnessDifferencer(period=0.05)
        diff.update(0, before)
        diff.update(1, after)
        caps = after.capsules
        j = 2
        rate0 = (caps.p0[j] - before.capsules.p0[j]) / 0.05
        rate1 = (caps.p1[j] - before.capsules.p1[j]) / 0.05
        at_ends = diff.velocities(
            [self._witness(caps.p0[j], j), self._witness(caps.p1[j], j)], after
        )
        np.testing.assert_allclose(at_ends, [rate0, rate1], atol=1e-9)

    def test_held_within_frame(self, bone_map: BoneMap) -> None:
        """Repeated frame indices keep the last rates."""
        frame = self._frame()
        diff = WitnessDifferencer(period=0.05)
        diff.update(0, skeleton_to_capsules(frame, bone_map))
        moved = skeleton_to_capsules(frame + [0.05, 0.0, 0.0], bone_map)
        diff.update(1, moved)
        diff.update(1, skeleton_to_capsules(frame + [0.5, 0.5, 0.5], bone_map))
        witness = [self._witness(moved.capsules.p0[0], 0)]
        np.testing.assert_allclose(diff.velocities(witness, moved), [[1.0, 0.0, 0.0]])

    def test_earlier_frame_restarts(self, bone_map: BoneMap) -> None:
        """Going back in frame index drops the rates."""
        human = skeleton_to_capsules(self._frame(), bone_map)
        diff = WitnessDifferencer()
        diff.update(4, human)
        diff.update(5, human)
        diff.update(0, human)
        assert not diff.tracking

    def test_reset(self, bone_map: BoneMap) -> None:
        """Reset forgets history and rates."""
        human = skeleton_to_capsules(self._frame(), bone_map)
        diff = WitnessDifferencer()
        diff.update(0, human)
        diff.update(1, skeleton_to_capsules(self._frame() + 1.0, bone_map))
        diff.reset()
        assert not diff.tracking
        witness = [self._witness(human.capsules.p0[0], 0)]
        np.testing.assert_array_equal(diff.velocities(witness, human), np.zeros((1, 3)))
