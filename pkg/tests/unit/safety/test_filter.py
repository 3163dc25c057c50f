"""Unit tests for the filter tick."""

import logging

import numpy as np
import pytest

from sapsim.dynamics import JointState, dynamics_terms, forward_kinematics
from sapsim.safety import (
    LowLevelGains,
    QpInfeasibleError,
    SafetyFilter,
    braking_force,
    nominal_force,
    safety_filter,
)

Q = np.array([0.3, 0.6])
HEADING = np.array([np.cos(0.9), np.sin(0.9), 0.0])


@pytest.fixture
def scene(planar_chain, human_at):
    """Resting planar arm, human 0.33 m beyond the tip, reference rushing at the human."""
    terms = dynamics_terms(planar_chain, JointState.at_rest(Q))
    tip = forward_kinematics(planar_chain, Q).x
    human = human_at(tip + 0.33 * HEADING)
    reference = (tip, 1.0 * HEADING, np.zeros(3))
    return terms, human, reference


@pytest.mark.unit
class TestSafetyFilter:
    """Tests for SafetyFilter.step."""

    def test_disabled_passes_clamped_nominal(self, planar_chain, scene) -> None:
        """Without filtering u_act is f_h inside the box and no rows are built."""
        terms, human, reference = scene
        output = SafetyFilter(planar_chain, enabled=False).step(terms, *reference, human, 0)
        np.testing.assert_array_equal(output.u_act, output.f_h)
        assert output.rows == ()
        assert output.min_h == np.inf

    def test_far_human_no_intervention(self, planar_chain, human_at) -> None:
        """A distant human leaves the nominal force untouched."""
        terms = dynamics_terms(planar_chain, JointState.at_rest(Q))
        output = SafetyFilter(planar_chain).step(
            terms, terms.x, np.zeros(3), np.zeros(3), human_at((10.0, 10.0, 0.0)), 0
        )
        np.testing.assert_array_equal(output.u_act, output.f_h)
        np.testing.assert_allclose(output.f_h, terms.gx, atol=1e-12)
        assert len(output.rows) == 2
        assert not output.fallback

    def test_close_human_is_filtered(self, planar_chain, scene) -> None:
        """Pushing at a close human is corrected and every barrier row holds."""
        terms, human, reference = scene
        output = SafetyFilter(planar_chain).step(terms, *reference, human, 0)
        assert output.solution is not None
        assert any(name.startswith("barrier") for name in output.solution.active_names)
        assert (output.u_act - output.f_h) @ HEADING < 0.0
        for row in output.rows:
            assert row.row().slack(output.u_act) >= -1e-8
        np.testing.assert_allclose(output.correction, output.f_h - output.u_act)

    def test_infeasible_falls_back_to_braking(
        self, planar_chain, scene, monkeypatch, caplog
    ) -> None:
        """An infeasible QP brakes, counts the event and logs a warning."""
        terms, human, reference = scene

        def infeasible(qp):
            raise QpInfeasibleError("safety QP infeasible at row 'upper_x'", "upper_x")

        monkeypatch.setattr("sapsim.safety.filter.safety_filter", infeasible)
        flt = SafetyFilter(planar_chain)
        with caplog.at_level(logging.WARNING, logger="sapsim.safety.filter"):
            output = flt.step(terms, *reference, human, 0)
        assert output.fallback
        assert output.solution is None
        np.testing.assert_allclose(output.u_act, braking_force(terms, terms.xd, flt.gains))
        assert flt.fallback_count == 1
        assert "braking" in caplog.text
        flt.reset()
        assert flt.fallback_count == 0

    def test_lyapunov_row_dropped_before_braking(
        self, planar_chain, scene, monkeypatch
    ) -> None:
        """An infeasible QP with the Lyapunov row is retried without it."""
        terms, human, reference = scene
        calls = []

        def conflicting(qp):
            calls.append(qp.clf is not None)
            if qp.clf is not None:
                raise QpInfeasibleError("safety QP infeasible at row 'clf'", "clf")
            return safety_filter(qp)

        monkeypatch.setattr("sapsim.safety.filter.safety_filter", conflicting)
        output = SafetyFilter(planar_chain).step(terms, *reference, human, 0, goal=terms.x)
        assert calls == [True, False]
        assert output.clf is None
        assert not output.fallback

    def test_lyapunov_row_near_goal_only(self, planar_chain, human_at) -> None:
        """The Lyapunov row is added inside the activation radius and not outside it."""
        terms = dynamics_terms(planar_chain, JointState(q=Q, qd=[0.2, 0.1]))
        far = human_at((10.0, 10.0, 0.0))
        flt = SafetyFilter(planar_chain)
        near = flt.step(terms, terms.x, np.zeros(3), np.zeros(3), far, 0, goal=terms.x)
        away = flt.step(terms, terms.x, np.zeros(3), np.zeros(3), far, 0, goal=terms.x + 1.0)
        assert near.clf is not None
        assert away.clf is None
        assert near.clf.z @ near.correction >= near.clf.bound - 1e-9

    def test_force_between_ticks(self, planar_chain, scene) -> None:
        """Between ticks the feedback is refreshed and the correction subtracted."""
        terms, human, reference = scene
        flt = SafetyFilter(planar_chain, LowLevelGains())
        output = flt.step(terms, *reference, human, 0)
        np.testing.assert_allclose(
            flt.force_at(output, terms, terms.x, terms.xd, *reference), output.u_act, atol=1e-12
        )
        moved = terms.x + np.array([0.001, 0.0, 0.0])
        expected = nominal_force(terms, moved, terms.xd, *reference, flt.gains) - output.correction
        np.testing.assert_allclose(
            flt.force_at(output, terms, moved, terms.xd, *reference), expected, atol=1e-12
        )
