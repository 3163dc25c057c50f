"""Filter tick: nominal force, barrier and Lyapunov rows, QP and fallback."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from sapsim.dynamics.models import DynamicsTerms, FloatArray, KinematicChain
from sapsim.geometry.models import HumanModel
from sapsim.geometry.robot import uniform_radii
from sapsim.logging import format_vector
from sapsim.safety.barrier import WitnessDifferencer, barrier_rows, link_witnesses
from sapsim.safety.controller import braking_force, clf_row, composite_error, nominal_force
from sapsim.safety.exceptions import QpInfeasibleError
from sapsim.safety.models import BarrierRow, ClfRow, LowLevelGains, QpSolution, SafetyQp
from sapsim.safety.qp import safety_filter

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FilterOutput:
    """Result of one filter tick.

    Attributes:
        f_h: Nominal force, N.
        u_act: Applied task force, N.
        correction: ``f_h - u_act``, held until the next tick.
        rows: Barrier rows, empty when filtering is disabled.
        clf: Lyapunov row used, if any.
        solution: QP solution, ``None`` when disabled or on fallback.
        fallback: Whether the braking fallback replaced an infeasible QP.
    """

    f_h: FloatArray
    u_act: FloatArray
    correction: FloatArray
    rows: tuple[BarrierRow, ...] = ()
    clf: ClfRow | None = None
    solution: QpSolution | None = None
    fallback: bool = False

    @property
    def min_h(self) -> float:
        """Smallest barrier value, ``inf`` without rows."""
        return min((r.h for r in self.rows), default=np.inf)


class SafetyFilter:
    """Low-level controller with the ECBF/CLF quadratic-program filter.

    Owns the witness-point differencer, so one instance serves one control loop.
    """

    def __init__(
        self,
        chain: KinematicChain,
        gains: LowLevelGains | None = None,
        d_safe: float = 0.10,
        link_radii: FloatArray | None = None,
        *,
        enabled: bool = True,
        frame_period: float = 0.05,
    ) -> None:
        self.chain = chain
        self.gains = gains or LowLevelGains()
        self.d_safe = d_safe
        self.link_radii = uniform_radii(chain) if link_radii is None else link_radii
        self.enabled = enabled
        self.differencer = WitnessDifferencer(frame_period)
        self.fallback_count = 0

    def reset(self) -> None:
        """Clear the witness history and the fallback counter."""
        self.differencer.reset()
        self.fallback_count = 0

    def step(
        self,
        terms: DynamicsTerms,
        x_d: FloatArray,
        xd_d: FloatArray,
        xdd_d: FloatArray,
        human: HumanModel | None,
        frame_index: int,
        *,
        goal: FloatArray | None = None,
        posture: FloatArray | None = None,
    ) -> FilterOutput:
        """Compute the applied task force at the state of ``terms``.

        Args:
            terms: Dynamics terms at the current state.
            x_d: Desired position.
            xd_d: Desired velocity.
            xdd_d: Desired acceleration.
            human: Current human capsules; ``None`` when no human is tracked.
            frame_index: Perception frame the human belongs to.
            goal: Handover point for the Lyapunov row activation.
            posture: Null-space torque applied alongside ``J^T u``.

        Returns:
            FilterOutput. With filtering disabled ``u_act`` is ``f_h`` clamped to the box
            around the gravity force.
        """
        gains = self.gains
        lower, upper = gains.force_box(terms.gx)
        f_h = nominal_force(terms, terms.x, terms.xd, x_d, xd_d, xdd_d, gains)
        if not self.enabled or human is None:
            u = np.clip(f_h, lower, upper)
            return FilterOutput(f_h=f_h, u_act=u, correction=f_h - u)

        witnesses = link_witnesses(terms, human, self.link_radii)
        self.differencer.update(frame_index, human)
        rows = tuple(
            barrier_rows(
                terms,
                human,
                self.d_safe,
                gains.k_b,
                self.link_radii,
                support_velocities=self.differencer.velocities(witnesses, human),
                extra_torque=posture,
                witnesses=witnesses,
            )
        )
        _, _, z = composite_error(terms.x, terms.xd, x_d, xd_d, gains)
        clf = None
        if goal is not None and np.linalg.norm(terms.x - goal) < gains.clf_radius:
            clf = clf_row(z, gains)

        qp = SafetyQp(target=f_h, barrier_rows=rows, lower=lower, upper=upper, clf=clf)
        try:
            solution = safety_filter(qp)
        except QpInfeasibleError as e:
            if clf is None:
                return self._brake(terms, f_h, rows, e)
            logger.debug("dropping the Lyapunov row: %s", e)
            clf = None
            try:
                solution = safety_filter(SafetyQp(f_h, rows, lower, upper))
            except QpInfeasibleError as e2:
                return self._brake(terms, f_h, rows, e2)
        return FilterOutput(
            f_h=f_h,
            u_act=solution.u,
            correction=f_h - solution.u,
            rows=rows,
            clf=clf,
            solution=solution,
        )

    def _brake(
        self,
        terms: DynamicsTerms,
        f_h: FloatArray,
        rows: tuple[BarrierRow, ...],
        error: QpInfeasibleError,
    ) -> FilterOutput:
        # braking holds the current position: z reduces to the tool velocity
        u = braking_force(terms, terms.xd, self.gains)
        self.fallback_count += 1
        logger.warning("%s; braking with u=%s", error, format_vector(u))
        return FilterOutput(f_h=f_h, u_act=u, correction=f_h - u, rows=rows, fallback=True)

    def force_at(
        self,
        output: FilterOutput,
        terms: DynamicsTerms,
        x: FloatArray,
        xd: FloatArray,
        x_d: FloatArray,
        xd_d: FloatArray,
        xdd_d: FloatArray,
    ) -> FloatArray:
        """Task force between filter ticks.

        The tracking feedback is re-evaluated at the current tool state with the
        held dynamics terms and the held QP correction; a braking force is held as is.
        """
        if output.fallback:
            return output.u_act
        f_now = nominal_force(terms, x, xd, x_d, xd_d, xdd_d, self.gains)
        return np.clip(f_now - output.correction, *self.gains.force_box(terms.gx))
