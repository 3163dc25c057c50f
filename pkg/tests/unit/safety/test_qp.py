"""Unit tests for the dual active-set projection solver."""

import warnings

import numpy as np
import pytest
from scipy import linalg, optimize

from sapsim.safety import (
    BarrierRow,
    ClfRow,
    LowLevelGains,
    QpInfeasibleError,
    SafetyQp,
    safety_filter,
    solve_projection,
)

GAINS = LowLevelGains()


def _row(normal, bound, link=0, k1=7.0):
    """Barrier row whose linear form is ``normal^T u >= bound``."""
    return BarrierRow(
        link=link,
        h=-bound / k1,
        lf_h=0.0,
        lf2_h=0.0,
        lg_lf_h=np.asarray(normal, dtype=float),
        k1=k1,
        k2=7.0,
    )


def _qp(target, rows=(), clf=None):
    return SafetyQp(
        target=np.asarray(target, dtype=float),
        barrier_rows=tuple(rows),
        lower=GAINS.lower,
        upper=GAINS.upper,
        clf=clf,
    )


@pytest.mark.unit
class TestSolveProjection:
    """Tests for solve_projection."""

    def test_no_rows(self) -> None:
        """Without rows the target is returned."""
        solution = solve_projection(np.array([1.0, 2.0, 3.0]), np.zeros((0, 3)), np.zeros(0))
        np.testing.assert_array_equal(solution.u, [1.0, 2.0, 3.0])
        assert solution.active == ()

    def test_half_space_projection(self) -> None:
        """One violated row projects onto its plane by the closed form."""
        a = np.array([1.0, 2.0, 0.0])
        solution = solve_projection(np.zeros(3), a[None, :], np.array([7.0]))
        np.testing.assert_allclose(solution.u, 7.0 / 5.0 * a, atol=1e-12)
        assert solution.multipliers[0] == pytest.approx(1.4)
        assert solution.kkt_residual < 1e-12

    def test_dependent_rows_infeasible(self) -> None:
        """u_x >= 50 against u_x <= 40 has no solution."""
        normals = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        with pytest.raises(QpInfeasibleError) as exc_info:
            solve_projection(np.zeros(3), normals, np.array([50.0, -40.0]), ("lo", "hi"))
        assert exc_info.value.violated == "hi"

    def test_drops_row_that_became_slack(self) -> None:
        """A row added first can leave the active set once a second row dominates."""
        normals = np.array([[1.0, 0.0, 0.0], [0.2, 0.1, 0.0]])
        bounds = np.array([3.0, 1.0])
        solution = solve_projection(np.zeros(3), normals, bounds)
        np.testing.assert_allclose(solution.u, [4.0, 2.0, 0.0], atol=1e-12)
        assert solution.active == (1,)
        assert solution.multipliers[1] == pytest.approx(20.0)
        assert solution.kkt_residual < 1e-12

    def test_nearly_parallel_rows_solve_quietly(self) -> None:
        """Near-parallel active rows resolve without an ill-conditioned solve."""
        delta = 1e-5
        normals = np.array(
            [
                [1.0, 0.0, 0.0],
                [1.0, delta, 0.0],
                [1.0, -delta, 0.0],
                [1.0, 0.0, delta],
                [1.0, 0.0, -delta],
            ]
        )
        bounds = np.array([1.0] + [1.0 + delta] * 4)
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            solution = solve_projection(np.zeros(3), normals, bounds)
        np.testing.assert_allclose(solution.u, [1.0 + delta, 0.0, 0.0], atol=1e-5)
        assert np.all(normals @ solution.u - bounds >= -1e-8)

    def test_random_problems_are_optimal(self, rng: np.random.Generator) -> None:
        """Feasible random problems satisfy KKT to 1e-8 and agree with SLSQP."""
        for _ in range(20):
            m = int(rng.integers(1, 7))
            normals = rng.normal(size=(m, 3))
            anchor = rng.uniform(-5.0, 5.0, 3)
            bounds = normals @ anchor - rng.uniform(0.0, 2.0, m)
            target = rng.uniform(-20.0, 20.0, 3)
            solution = solve_projection(target, normals, bounds)
            assert solution.kkt_residual < 1e-8
            assert np.all(normals @ solution.u - bounds >= -1e-8)
            reference = optimize.minimize(
                lambda u, t=target: 0.5 * np.sum((u - t) ** 2),
                anchor,
                jac=lambda u, t=target: u - t,
                method="SLSQP",
                constraints=[
                    {
                        "type": "ineq",
                        "fun": lambda u, a=normals, b=bounds: a @ u - b,
                        "jac": lambda u, a=normals: a,
                    }
                ],
                options={"ftol": 1e-12, "maxiter": 200},
            )
            np.testing.assert_allclose(solution.u, reference.x, atol=1e-5)


@pytest.mark.unit
class TestSafetyFilter:
    """Tests for safety_filter on assembled QPs."""

    def test_inactive_rows_return_nominal(self) -> None:
        """Every row satisfied at f_h: u_act = f_h."""
        qp = _qp([3.0, -2.0, 1.0], [_row([1.0, 0.0, 0.0], -10.0)])
        solution = safety_filter(qp)
        np.testing.assert_array_equal(solution.u, [3.0, -2.0, 1.0])
        assert solution.active == ()

    def test_box_clamps_nominal(self) -> None:
        """A nominal force outside the box is projected onto it."""
        solution = safety_filter(_qp([55.0, 0.0, -60.0]))
        np.testing.assert_allclose(solution.u, [40.0, 0.0, -40.0])
        assert sorted(solution.active_names) == ["lower_z", "upper_x"]

    def test_barrier_intervention_is_minimal(self) -> None:
        """The filtered force is the projection of f_h onto the barrier half-space."""
        a = np.array([0.0, 1.0, 1.0])
        qp = _qp([5.0, -3.0, 0.0], [_row(a, 2.0)])
        solution = safety_filter(qp)
        f_h = qp.target
        expected = f_h + (2.0 - a @ f_h) / (a @ a) * a
        np.testing.assert_allclose(solution.u, expected, atol=1e-12)
        assert solution.active_names == ["barrier[0]"]

    def test_infeasible_barrier_against_box(self) -> None:
        """u_x >= 50 cannot hold under the 40 N bound."""
        with pytest.raises(QpInfeasibleError) as exc_info:
            safety_filter(_qp(np.zeros(3), [_row([1.0, 0.0, 0.0], 50.0)]))
        assert exc_info.value.violated == "upper_x"

    def test_lyapunov_row_holds(self) -> None:
        """The correction satisfies z^T (f_h - u) >= bound."""
        z = np.array([1.0, -0.5, 0.2])
        clf = ClfRow(z=z, bound=3.0)
        f_h = np.array([2.0, 1.0, 0.0])
        solution = safety_filter(_qp(f_h, clf=clf))
        assert z @ (f_h - solution.u) >= 3.0 - 1e-9
        assert solution.active_names == ["clf"]
