"""Unit tests for Newton-Euler and composite-rigid-body dynamics."""

from collections.abc import Callable

import numpy as np
import pytest

from sapsim.dynamics import (
    KinematicChain,
    bias_torque,
    coriolis_matrix,
    crba,
    gravity_torque,
    potential_energy,
    rnea,
)

QD = np.array([0.4, -0.3, 0.5, 0.2, -0.6, 0.3, 0.7])


@pytest.mark.unit
class TestGravity:
    """Tests for gravity torques."""

    def test_rest_torque_equals_gravity(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Newton-Euler at rest equals g(q)."""
        q = sample_q(reference_arm)
        zeros = np.zeros(reference_arm.n)
        np.testing.assert_allclose(
            rnea(reference_arm, q, zeros, zeros), gravity_torque(reference_arm, q), atol=1e-14
        )

    def test_gravity_is_potential_gradient(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """g(q) equals the finite-difference gradient of the potential energy."""
        for _ in range(5):
            q = sample_q(reference_arm)
            step = 1e-6
            grad = np.empty(reference_arm.n)
            for k in range(reference_arm.n):
                dq = np.zeros(reference_arm.n)
                dq[k] = step
                upper = potential_energy(reference_arm, q + dq)
                grad[k] = (upper - potential_energy(reference_arm, q - dq)) / (2 * step)
            g = gravity_torque(reference_arm, q)
            assert np.linalg.norm(g - grad) < 1e-5 * np.linalg.norm(g)

    def test_planar_gravity_by_hand(self, planar_chain: KinematicChain) -> None:
        """Horizontal planar arm holds both link weights about the base."""
        g = gravity_torque(planar_chain, [0.0, 0.0])
        # base: 1 kg at 0.25 m and 1 kg at 0.75 m; elbow: 1 kg at 0.25 m
        np.testing.assert_allclose(g, [9.81 * 1.0, 9.81 * 0.25], atol=1e-12)

    def test_gravity_override(self, planar_chain: KinematicChain) -> None:
        """A zero gravity override removes the static torque."""
        zeros = np.zeros(2)
        np.testing.assert_allclose(
            rnea(planar_chain, [0.3, 0.2], zeros, zeros, gravity=np.zeros(3)), zeros, atol=1e-15
        )


@pytest.mark.unit
class TestInertiaMatrix:
    """Tests for the composite-rigid-body inertia matrix."""

    def test_matches_newton_euler_columns(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """M equals the matrix of Newton-Euler responses to unit accelerations."""
        for _ in range(5):
            q = sample_q(reference_arm)
            mass = crba(reference_arm, q)
            columns = np.empty_like(mass)
            for k in range(reference_arm.n):
                unit = np.zeros(reference_arm.n)
                unit[k] = 1.0
                columns[:, k] = rnea(
                    reference_arm, q, np.zeros(reference_arm.n), unit, gravity=np.zeros(3)
                )
            np.testing.assert_allclose(mass, columns, atol=1e-10)

    def test_planar_by_hand(self, planar_chain: KinematicChain) -> None:
        """Planar two-link inertia at q2 = 0 matches the textbook expression."""
        mass = crba(planar_chain, [0.4, 0.0])
        izz = 0.0208
        m22 = izz + 0.25**2
        m11 = 2 * izz + 0.25**2 + 0.75**2
        m12 = izz + 0.25 * 0.75
        np.testing.assert_allclose(mass, [[m11, m12], [m12, m22]], atol=1e-12)

    def test_symmetric_positive_definite(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """M is symmetric positive definite on sampled states."""
        for _ in range(200):
            mass = crba(reference_arm, sample_q(reference_arm))
            np.testing.assert_allclose(mass, mass.T, atol=1e-15)
            assert np.linalg.eigvalsh(mass)[0] > 0.0

    @pytest.mark.slow
    def test_positive_definite_over_many_states(self, reference_arm: KinematicChain) -> None:
        """Minimum eigenvalue of M is positive over 10^4 random states."""
        rng = np.random.default_rng(7)
        span = reference_arm.q_max - reference_arm.q_min
        for _ in range(10_000):
            q = reference_arm.q_min + span * rng.random(reference_arm.n)
            assert np.linalg.eigvalsh(crba(reference_arm, q))[0] > 0.0


@pytest.mark.unit
class TestCoriolis:
    """Tests for the Christoffel Coriolis matrix."""

    def test_bias_consistency(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """C qd + g equals the Newton-Euler bias torque."""
        q = sample_q(reference_arm)
        lhs = coriolis_matrix(reference_arm, q, QD) @ QD + gravity_torque(reference_arm, q)
        np.testing.assert_allclose(lhs, bias_torque(reference_arm, q, QD), atol=1e-7)

    def test_mdot_minus_two_c_skew(
        self, reference_arm: KinematicChain, sample_q: Callable[[KinematicChain], np.ndarray]
    ) -> None:
        """Mdot - 2C is skew-symmetric."""
        q = sample_q(reference_arm)
        eps = 1e-6
        mdot = (crba(reference_arm, q + eps * QD) - crba(reference_arm, q - eps * QD)) / (2 * eps)
        residual = mdot - 2 * coriolis_matrix(reference_arm, q, QD)
        np.testing.assert_allclose(residual + residual.T, 0.0, atol=1e-7)

    def test_zero_velocity_gives_zero_matrix(self, planar_chain: KinematicChain) -> None:
        """C vanishes at rest."""
        np.testing.assert_array_equal(coriolis_matrix(planar_chain, [0.3, 0.4], [0, 0]), 0.0)
