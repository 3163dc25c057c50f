"""Unit tests for task-space dynamics terms."""

from collections.abc import Callable

import numpy as np
import pytest

from sapsim.dynamics import (
    JointState,
    KinematicChain,
    bias_torque,
    crba,
    dynamics_terms,
    gravity_torque,
    joint_acceleration,
    task_acceleration,
)

Q_WELL_CONDITIONED = np.array([-0.6, -0.4, 0.3, 1.4, 0.2, 0.6, -0.3])


def _mx_along(chain: KinematicChain, q: np.ndarray, qd: np.ndarray, eps: float) -> np.ndarray:
    plus = dynamics_terms(chain, JointState.at_rest(q + eps * qd)).Mx
    minus = dynamics_terms(chain, JointState.at_rest(q - eps * qd)).Mx
    return (plus - minus) / (2 * eps)


@pytest.mark.unit
class TestDynamicsTerms:
    """Tests for dynamics_terms."""

    def test_joint_space_terms(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Joint-space terms agree with the rigid-body routines."""
        q = sample_q(reference_arm)
        qd = np.full(reference_arm.n, 0.2)
        terms = dynamics_terms(reference_arm, JointState(q=q, qd=qd))
        np.testing.assert_allclose(terms.M, crba(reference_arm, q), atol=1e-15)
        np.testing.assert_allclose(terms.g, gravity_torque(reference_arm, q), atol=1e-15)
        np.testing.assert_allclose(terms.bias, bias_torque(reference_arm, q, qd), atol=1e-15)
        np.testing.assert_allclose(terms.M @ terms.M_inv, np.eye(reference_arm.n), atol=1e-9)

    def test_right_inverse(self, reference_arm: KinematicChain) -> None:
        """J Jdag = I away from singularities."""
        terms = dynamics_terms(reference_arm, JointState.at_rest(Q_WELL_CONDITIONED))
        assert not terms.singular
        np.testing.assert_allclose(terms.J @ terms.Jdag, np.eye(3), atol=1e-8)

    def test_task_inertia_is_operational_inertia(self, reference_arm: KinematicChain) -> None:
        """Mx is the inverse of the mobility J M^-1 J^T."""
        terms = dynamics_terms(reference_arm, JointState.at_rest(Q_WELL_CONDITIONED))
        np.testing.assert_allclose(terms.Mx @ terms.Mx_inv, np.eye(3), atol=1e-8)
        assert np.linalg.eigvalsh(terms.Mx)[0] > 0.0

    def test_task_skew_symmetry(self, reference_arm: KinematicChain) -> None:
        """Mx_dot - 2Cx is skew-symmetric."""
        qd = np.array([0.3, -0.2, 0.4, 0.1, -0.3, 0.2, 0.5])
        terms = dynamics_terms(reference_arm, JointState(q=Q_WELL_CONDITIONED, qd=qd))
        mx_dot = _mx_along(reference_arm, Q_WELL_CONDITIONED, qd, 1e-5)
        residual = mx_dot - 2 * terms.Cx
        np.testing.assert_allclose(residual + residual.T, 0.0, atol=1e-7)

    def test_task_skew_symmetry_planar(self, planar_chain: KinematicChain) -> None:
        """Planar chains satisfy the same property on their task plane."""
        q, qd = np.array([0.4, 1.1]), np.array([0.5, -0.7])
        terms = dynamics_terms(planar_chain, JointState(q=q, qd=qd))
        mx_dot = _mx_along(planar_chain, q, qd, 1e-5)
        residual = mx_dot - 2 * terms.Cx
        np.testing.assert_allclose(residual + residual.T, 0.0, atol=1e-8)

    def test_task_joint_equivalence(
        self, reference_arm: KinematicChain, rng: np.random.Generator
    ) -> None:
        """tau = J^T f in joint space and f in task space give the same acceleration."""
        resting = dynamics_terms(reference_arm, JointState.at_rest(Q_WELL_CONDITIONED))
        qd = resting.Jdag @ np.array([0.2, -0.1, 0.15])
        terms = dynamics_terms(reference_arm, JointState(q=Q_WELL_CONDITIONED, qd=qd))
        force = rng.normal(size=3) * 5.0
        qdd = joint_acceleration(terms, terms.J.T @ force)
        xdd_joint = terms.J @ qdd + terms.Jdot @ qd
        np.testing.assert_allclose(task_acceleration(terms, force), xdd_joint, atol=1e-6)

    def test_singular_flag(self, planar_chain: KinematicChain) -> None:
        """Fully extended pose is flagged and damping keeps the terms finite."""
        terms = dynamics_terms(planar_chain, JointState.at_rest([0.0, 0.0]))
        assert terms.singular
        assert terms.sigma_min < 1e-3
        assert np.all(np.isfinite(terms.Jdag))
        assert np.all(np.isfinite(terms.Mx))

    def test_gravity_fully_compensated(self, reference_arm: KinematicChain) -> None:
        """J^T gx plus the null-space part of g recovers g."""
        terms = dynamics_terms(reference_arm, JointState.at_rest(Q_WELL_CONDITIONED))
        recovered = terms.J.T @ terms.gx + terms.null_projector @ terms.g
        np.testing.assert_allclose(recovered, terms.g, atol=1e-10)
