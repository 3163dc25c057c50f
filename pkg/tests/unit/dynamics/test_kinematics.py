"""Unit tests for forward/inverse kinematics and Jacobians."""

from collections.abc import Callable

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from sapsim.dynamics import (
    DimensionError,
    KinematicChain,
    TaskState,
    UnreachableTargetError,
    batch_chain_poses,
    chain_pose,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    jacobian_derivative,
    orientation_error,
)
from sapsim.dynamics.task_space import consistent_inverse


def _homogeneous_tip(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """Compose 4x4 modified-DH transforms link by link."""
    transform = np.eye(4)
    for link, angle in zip(chain.links, q, strict=True):
        ca, sa = np.cos(link.alpha), np.sin(link.alpha)
        theta = angle + link.theta_offset
        ct, st = np.cos(theta), np.sin(theta)
        rot_x = np.array([[1, 0, 0, 0], [0, ca, -sa, 0], [0, sa, ca, 0], [0, 0, 0, 1]])
        trans_x = np.eye(4)
        trans_x[0, 3] = link.a
        rot_z = np.array([[ct, -st, 0, 0], [st, ct, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        trans_z = np.eye(4)
        trans_z[2, 3] = link.d
        transform = transform @ rot_x @ trans_x @ rot_z @ trans_z
    return (transform @ np.append(chain.tool, 1.0))[:3]


@pytest.mark.unit
class TestForwardKinematics:
    """Tests for forward_kinematics."""

    def test_planar_extended(self, planar_chain: KinematicChain) -> None:
        """Fully extended planar arm reaches (1, 0, 0)."""
        state = forward_kinematics(planar_chain, [0.0, 0.0])
        np.testing.assert_allclose(state.x, [1.0, 0.0, 0.0], atol=1e-15)

    def test_planar_rotated(self, planar_chain: KinematicChain) -> None:
        """Rotating the base by pi/2 moves the tip to (0, 1, 0)."""
        state = forward_kinematics(planar_chain, [np.pi / 2, 0.0])
        np.testing.assert_allclose(state.x, [0.0, 1.0, 0.0], atol=1e-12)

    def test_matches_independent_composition(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Tip position equals an independent homogeneous-transform product."""
        for _ in range(20):
            q = sample_q(reference_arm)
            np.testing.assert_allclose(
                forward_kinematics(reference_arm, q).x,
                _homogeneous_tip(reference_arm, q),
                atol=1e-12,
            )

    def test_orientation_is_unit_quaternion(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Orientation is a unit quaternion."""
        state = forward_kinematics(reference_arm, sample_q(reference_arm))
        assert np.linalg.norm(state.orientation) == pytest.approx(1.0, abs=1e-12)

    def test_velocity_from_jacobian(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """xd equals J qd."""
        q = sample_q(reference_arm)
        qd = np.linspace(-0.5, 0.5, reference_arm.n)
        state = forward_kinematics(reference_arm, q, qd)
        np.testing.assert_allclose(state.xd, jacobian(reference_arm, q) @ qd, atol=1e-14)

    def test_out_of_limit_allowed(self, planar_chain: KinematicChain) -> None:
        """Out-of-limit joint vectors are still evaluated."""
        state = forward_kinematics(planar_chain, [3.5, 0.0])
        assert np.all(np.isfinite(state.x))

    def test_dimension_mismatch(self, planar_chain: KinematicChain) -> None:
        """Wrong joint count is an argument error."""
        with pytest.raises(DimensionError):
            forward_kinematics(planar_chain, [0.0])

    def test_batch_matches_single(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Batched poses equal per-vector poses."""
        qs = np.stack([sample_q(reference_arm) for _ in range(5)])
        origins, axes, tip_rot = batch_chain_poses(reference_arm, qs)
        for k, q in enumerate(qs):
            pose = chain_pose(reference_arm, q)
            np.testing.assert_allclose(origins[k], pose.origins, atol=1e-14)
            np.testing.assert_allclose(axes[k], pose.axes, atol=1e-14)
            np.testing.assert_allclose(tip_rot[k], pose.tip_rotation, atol=1e-14)


@pytest.mark.unit
class TestJacobian:
    """Tests for jacobian and jacobian_derivative."""

    def test_planar_base_column(self, planar_chain: KinematicChain) -> None:
        """Base joint sweeps the full arm length tangentially."""
        jac = jacobian(planar_chain, [0.0, 0.0])
        np.testing.assert_allclose(jac[:, 0], [0.0, 1.0, 0.0], atol=1e-15)

    def test_matches_finite_difference(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """J equals the central difference of forward kinematics."""
        step = 1e-6
        for _ in range(10):
            q = sample_q(reference_arm)
            jac = jacobian(reference_arm, q)
            fd = np.empty_like(jac)
            for j in range(reference_arm.n):
                dq = np.zeros(reference_arm.n)
                dq[j] = step
                fd[:, j] = (
                    forward_kinematics(reference_arm, q + dq).x
                    - forward_kinematics(reference_arm, q - dq).x
                ) / (2 * step)
            assert np.linalg.norm(fd - jac) < 1e-5 * np.linalg.norm(jac)

    def test_directional_consistency(
        self,
        reference_arm: KinematicChain,
        sample_q: Callable[[KinematicChain], np.ndarray],
        rng: np.random.Generator,
    ) -> None:
        """One-sided difference along a unit direction agrees with J v."""
        eps = 1e-6
        q = sample_q(reference_arm)
        v = rng.normal(size=reference_arm.n)
        v /= np.linalg.norm(v)
        x0 = forward_kinematics(reference_arm, q).x
        fd = (forward_kinematics(reference_arm, q + eps * v).x - x0) / eps
        assert np.linalg.norm(fd - jacobian(reference_arm, q) @ v) < 1e-4

    def test_derivative_matches_finite_difference(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Analytic Jdot equals the central difference of J along qd."""
        q = sample_q(reference_arm)
        qd = np.array([0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.6])
        eps = 1e-6
        fd = jacobian(reference_arm, q + eps * qd) - jacobian(reference_arm, q - eps * qd)
        fd /= 2 * eps
        np.testing.assert_allclose(jacobian_derivative(reference_arm, q, qd), fd, atol=1e-7)

    def test_singular_pose_detected(self, planar_chain: KinematicChain) -> None:
        """Fully extended planar arm has a vanishing singular value."""
        jac = jacobian(planar_chain, [0.0, 0.0])
        _, _, sigma_min, singular = consistent_inverse(jac, np.eye(2))
        assert sigma_min < 1e-3
        assert singular


@pytest.mark.unit
class TestOrientationError:
    """Tests for orientation_error."""

    def test_zero_when_equal(self) -> None:
        """Error vanishes when orientations coincide."""
        rot = Rotation.from_euler("xyz", [0.3, -0.2, 1.0])
        err, _ = orientation_error(rot.as_matrix(), rot.as_quat())
        np.testing.assert_allclose(err, np.zeros(3), atol=1e-15)

    def test_small_rotation_is_half_angle(self) -> None:
        """A small rotation about z gives a z error of sin(angle / 2)."""
        err, _ = orientation_error(Rotation.from_rotvec([0, 0, 0.1]).as_matrix(), [0, 0, 0, 1])
        np.testing.assert_allclose(err, [0.0, 0.0, np.sin(0.05)], atol=1e-14)

    def test_jacobian_matches_finite_difference(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Orientation error Jacobian matches finite differences."""
        q = sample_q(reference_arm)
        pose = chain_pose(reference_arm, q)
        desired = (
            Rotation.from_matrix(pose.tip_rotation) * Rotation.from_rotvec([0.2, 0.1, -0.3])
        ).as_quat()
        _, jac = orientation_error(pose.tip_rotation, desired, pose.axes)
        assert jac is not None
        step = 1e-6
        for j in range(reference_arm.n):
            dq = np.zeros(reference_arm.n)
            dq[j] = step
            plus, _ = orientation_error(chain_pose(reference_arm, q + dq).tip_rotation, desired)
            minus, _ = orientation_error(chain_pose(reference_arm, q - dq).tip_rotation, desired)
            np.testing.assert_allclose(jac[:, j], (plus - minus) / (2 * step), atol=1e-7)


@pytest.mark.unit
class TestInverseKinematics:
    """Tests for inverse_kinematics."""

    Q0 = np.array([0.1, -0.5, 0.2, 1.2, 0.1, 0.5, 0.2])

    def test_fixed_point(self, reference_arm: KinematicChain) -> None:
        """Seeding at the solution returns it unchanged."""
        target = forward_kinematics(reference_arm, self.Q0)
        q = inverse_kinematics(reference_arm, target, self.Q0)
        np.testing.assert_array_equal(q, self.Q0)

    def test_converges_from_perturbed_seed(self, reference_arm: KinematicChain) -> None:
        """A perturbed seed converges to the target pose."""
        target = forward_kinematics(reference_arm, self.Q0)
        q = inverse_kinematics(reference_arm, target, self.Q0 + 0.1)
        reached = forward_kinematics(reference_arm, q)
        assert np.linalg.norm(reached.x - target.x) < 1e-4
        err, _ = orientation_error(
            Rotation.from_quat(reached.orientation).as_matrix(), target.orientation
        )
        assert 2 * np.linalg.norm(err) < 1e-3
        assert reference_arm.within_limits(q)

    def test_position_only(self, reference_arm: KinematicChain) -> None:
        """Position-only mode ignores the target orientation."""
        target = TaskState(
            x=forward_kinematics(reference_arm, self.Q0).x,
            orientation=np.array([1.0, 0.0, 0.0, 0.0]),
        )
        q = inverse_kinematics(reference_arm, target, self.Q0 + 0.1, position_only=True)
        assert np.linalg.norm(forward_kinematics(reference_arm, q).x - target.x) < 1e-4

    def test_unreachable_target(self, planar_chain: KinematicChain) -> None:
        """Target 10 m away from a 1 m chain is unreachable."""
        target = TaskState(x=np.array([10.0, 0.0, 0.0]), orientation=np.array([0, 0, 0, 1.0]))
        with pytest.raises(UnreachableTargetError) as exc_info:
            inverse_kinematics(planar_chain, target, [0.1, 0.1])
        assert exc_info.value.best_residual == pytest.approx(9.0)

    def test_non_convergence_carries_best_residual(self, planar_chain: KinematicChain) -> None:
        """An unattainable orientation ends with the best residual attached."""
        target = TaskState(
            x=np.array([0.5, 0.5, 0.0]), orientation=Rotation.from_rotvec([1.0, 0, 0]).as_quat()
        )
        with pytest.raises(UnreachableTargetError, match="did not converge") as exc_info:
            inverse_kinematics(planar_chain, target, [0.3, 0.3], max_iterations=20)
        assert exc_info.value.best_residual > 0.0
        assert exc_info.value.best_q is not None
