"""Closed-loop trial: 20 Hz perception and planning, 200 Hz safety filter, 1 kHz plant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sapsim.config import ConfigError, Controller, ScenarioConfig
from sapsim.dynamics.exceptions import UnreachableTargetError
from sapsim.dynamics.kinematics import chain_pose, inverse_kinematics, jacobian_from_pose
from sapsim.dynamics.models import ChainPose, FloatArray, JointState, KinematicChain, TaskState
from sapsim.dynamics.task_space import dynamics_terms
from sapsim.geometry.distance import horizon_distances
from sapsim.geometry.human import skeleton_to_capsules
from sapsim.geometry.models import BoneMap, HumanTrack
from sapsim.logging import format_vector, trial_context
from sapsim.planner.exceptions import PlanningFailedError
from sapsim.planner.models import PlannerInput
from sapsim.planner.nmpc import NmpcPlanner, reachable_goal
from sapsim.planner.reference import ReferenceIntegrator
from sapsim.safety.controller import posture_torque, to_torques
from sapsim.safety.filter import FilterOutput, SafetyFilter
from sapsim.sim.exceptions import EndOfTrajectory, SimulationFault
from sapsim.sim.models import (
    FRAME_PERIOD,
    Prediction,
    SkeletonTrajectory,
    TrialMetrics,
    TrialResult,
)
from sapsim.sim.perception import Perception
from sapsim.sim.plant import forward_dynamics, integrate
from sapsim.sim.trajectory import load_trajectory

logger = logging.getLogger(__name__)

IDENTITY_QUATERNION = np.array([0.0, 0.0, 0.0, 1.0])
HOLD_STATUS = "hold"


@dataclass(frozen=True)
class LoopOptions:
    """Trigger and stop rules of one closed-loop run.

    Attributes:
        start_time: Recording time at which the robot loop starts, s.
        force_planning: Plan every frame instead of only on interactive actions.
        stop_on_action: Stop when the stop action is recognized.
        stop_on_arrival: Stop once the tool reaches the handover target.
        arrival_after: Earliest recording time an arrival counts, s.
    """

    start_time: float = 0.0
    force_planning: bool = False
    stop_on_action: bool = True
    stop_on_arrival: bool = False
    arrival_after: float = 0.0


def horizon_frames(horizon: int, step: float, frames: int) -> np.ndarray:
    """Prediction frame of every horizon step ``k``, at ``t + (k + 1) step``."""
    idx = np.rint((np.arange(horizon) + 1) * step / FRAME_PERIOD).astype(int) - 1
    return np.clip(idx, 0, frames - 1)


def handover_targets(hands: FloatArray, base: FloatArray, offset: float) -> FloatArray:
    """Points ``offset`` metres from each hand position towards the robot base."""
    towards = base[None] - hands
    norms = np.linalg.norm(towards, axis=1, keepdims=True)
    return hands + offset * towards / np.maximum(norms, 1e-12)


def log_columns(n: int) -> list[str]:
    """Tick log header for an ``n``-joint chain."""
    return [
        "t",
        "lambda",
        "acc",
        *(f"q{i}" for i in range(n)),
        "violation_flag",
        "solver_status",
        "filter_status",
        "plan_tick",
        "filter_tick",
        "goal_error",
    ]


def _filter_status(out: FilterOutput, enabled: bool) -> str:
    if not enabled:
        return "off"
    if out.fallback:
        return "fallback"
    if out.solution is not None and out.solution.active:
        return "active"
    return "pass"


@dataclass
class _Episode:
    """Mutable state of one trial."""

    trajectory: SkeletonTrajectory
    state: JointState
    perception: Perception
    planner: NmpcPlanner
    reference: ReferenceIntegrator
    safety: SafetyFilter
    steps: np.ndarray
    options: LoopOptions
    goal: FloatArray
    q_f: FloatArray
    status: str = HOLD_STATUS
    plans: int = 0
    failed: int = 0
    degraded: int = 0
    arrival: float | None = None
    stop_reason: str = "end of trajectory"
    t: float = 0.0
    goal_error: float = float("inf")
    rows: list[tuple[object, ...]] = field(default_factory=list)


class TrialRunner:
    """Runs closed-loop trials of one scenario.

    The chain and bone map are loaded once; every :meth:`run` builds fresh
    planner, filter and perception state, so one runner serves many trials.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        chain: KinematicChain | None = None,
        bone_map: BoneMap | None = None,
    ) -> None:
        self.config = config
        self.chain = chain if chain is not None else config.load_chain()
        self.bone_map = bone_map if bone_map is not None else config.load_bone_map()
        self.radii = config.link_radii(self.chain)
        self.nmpc = config.nmpc(self.chain)
        self.base = self.chain.links[0].offset.copy()
        try:
            self.substeps = config.simulation.substeps(FRAME_PERIOD)
        except ValueError as e:
            raise ConfigError(str(e), "simulation.filter_dt") from e

    def start_configuration(self, rng: np.random.Generator) -> FloatArray:
        """Start joint vector: the configured one or a uniform draw from the start box.

        Raises:
            ConfigError: If the start vector or box does not match the chain.
        """
        robot = self.config.robot
        if robot.start is not None:
            if len(robot.start) != self.chain.n:
                raise ConfigError(f"needs {self.chain.n} entries", "robot.start")
            return np.asarray(robot.start, dtype=float)
        low, high = robot.start_box()
        if low.size != self.chain.n:
            key = "robot.near_low" if robot.near_operator else "robot.start_low"
            raise ConfigError(f"start box needs {self.chain.n} entries", key)
        return np.clip(rng.uniform(low, high), self.chain.q_min, self.chain.q_max)

    def goal_configuration(self, target: FloatArray, seed: FloatArray) -> FloatArray:
        """Joint vector placing the tool at ``target``; the closest pose when unreachable."""
        task = TaskState(x=target, orientation=IDENTITY_QUATERNION)
        try:
            return inverse_kinematics(self.chain, task, seed, position_only=True)
        except UnreachableTargetError as e:
            logger.debug("handover target %s: %s", format_vector(target), e)
            return seed.copy() if e.best_q is None else np.asarray(e.best_q, dtype=float)

    def targets(self, prediction: Prediction, steps: np.ndarray) -> FloatArray:
        """Handover targets over the horizon, or the fixed target when configured."""
        fixed = self.config.planner.target
        if fixed is not None:
            return np.tile(np.asarray(fixed, dtype=float), (steps.size, 1))
        hands = prediction.p_rh[steps]
        return handover_targets(hands, self.base, self.config.planner.handover_offset)

    def run(
        self,
        trajectory: SkeletonTrajectory,
        controller: Controller | str | None = None,
        seed: int | None = None,
        *,
        trial: int = 0,
        options: LoopOptions | None = None,
    ) -> TrialResult:
        """Simulate one trial.

        Args:
            trajectory: Human recording played back as ground truth.
            controller: Control mode; the scenario's when ``None``.
            seed: Seed of the start pose and perception noise; the scenario's when ``None``.
            trial: Index recorded in the metrics.
            options: Trigger and stop rules; when ``None`` planning follows the
                interactive actions and the stop action ends the trial.

        Returns:
            TrialResult with the metrics and one log row per plant step.

        Raises:
            SimulationFault: On a non-finite plant state; carries the log so far.
            ConfigError: If the start configuration does not match the chain.
        """
        cfg = self.config
        mode = Controller(controller or cfg.simulation.controller)
        seed = cfg.simulation.seed if seed is None else seed
        with trial_context(str(mode), trial, seed):
            return self._run(trajectory, mode, seed, trial, options)

    def _run(
        self,
        trajectory: SkeletonTrajectory,
        mode: Controller,
        seed: int,
        trial: int,
        options: LoopOptions | None,
    ) -> TrialResult:
        cfg = self.config
        start_seq, perception_seq = np.random.SeedSequence(seed).spawn(2)
        q0 = self.start_configuration(np.random.default_rng(start_seq))
        ep = _Episode(
            trajectory=trajectory,
            state=JointState.at_rest(q0),
            perception=Perception(cfg.perception, np.random.default_rng(perception_seq)),
            planner=NmpcPlanner(
                self.chain, self.nmpc, cfg.solver, warm_start=cfg.planner.warm_start
            ),
            reference=ReferenceIntegrator(self.chain, q0, self.nmpc.step),
            safety=SafetyFilter(
                self.chain,
                cfg.safety,
                self.nmpc.d_safe,
                self.radii,
                enabled=mode is Controller.NMPC_ECBF,
                frame_period=FRAME_PERIOD,
            ),
            steps=horizon_frames(
                self.nmpc.horizon, self.nmpc.step, cfg.perception.prediction_frames
            ),
            options=options or LoopOptions(),
            goal=chain_pose(self.chain, q0).tip.copy(),
            q_f=q0.copy(),
        )
        logger.info(
            "trial %d: controller=%s seed=%d trajectory=%s q0=%s",
            trial,
            mode,
            seed,
            trajectory.name,
            format_vector(q0, 3),
        )

        try:
            self._loop(ep)
        except SimulationFault as e:
            e.tick_log = self._log(ep)
            logger.warning("trial %d aborted: %s", trial, e)
            raise

        log = self._log(ep)
        goal_error = float(np.linalg.norm(chain_pose(self.chain, ep.state.q).tip - ep.goal))
        empty = log.empty
        metrics = TrialMetrics(
            trial=trial,
            controller=str(mode),
            seed=seed,
            trajectory=trajectory.name,
            trajectory_hash=trajectory.digest(),
            max_acc=0.0 if empty else float(log["acc"].max()),
            min_lambda=float("inf") if empty else float(log["lambda"].min()),
            violation_count=0 if empty else int(log["violation_flag"].sum()),
            total_time=0.0 if empty else float(log["t"].iloc[-1] - log["t"].iloc[0]),
            fallback_count=ep.safety.fallback_count,
            plan_count=ep.plans,
            failed_plans=ep.failed,
            degraded_plans=ep.degraded,
            goal_error=goal_error,
            reached_goal=goal_error < cfg.simulation.goal_tolerance,
        )
        logger.info(
            "trial %d done (%s): max_acc=%.3f min_lambda=%.4f violations=%d fallbacks=%d",
            trial,
            ep.stop_reason,
            metrics.max_acc,
            metrics.min_lambda,
            metrics.violation_count,
            metrics.fallback_count,
        )
        return TrialResult(
            metrics=metrics, log=log, stop_reason=ep.stop_reason, arrival_time=ep.arrival
        )

    def _log(self, ep: _Episode) -> pd.DataFrame:
        return pd.DataFrame.from_records(ep.rows, columns=log_columns(self.chain.n))

    def _loop(self, ep: _Episode) -> None:
        sim = self.config.simulation
        trajectory = ep.trajectory
        first = trajectory.frame_index(ep.options.start_time)
        last = min(len(trajectory) - 1, first + int(sim.max_time / FRAME_PERIOD))
        for frame in range(first, last + 1):
            label = ep.perception.recognize(trajectory, frame)
            if ep.options.stop_on_action and label == self.config.perception.stop_action:
                ep.stop_reason = f"recognized {label!r}"
                return
            planned = ep.options.force_planning or label in self.config.perception.interactive
            observed = trajectory.joints[frame]
            try:
                upcoming = self._plan(ep, frame) if planned else observed
            except EndOfTrajectory:
                ep.stop_reason = "end of trajectory"
                return
            if not planned:
                ep.status = HOLD_STATUS
                ep.reference.hold()
            for j in range(self.substeps[0]):
                self._filter_tick(ep, frame, j, observed, upcoming, planned)
            if ep.arrival is not None:
                ep.stop_reason = "arrived"
                return
        if last < len(trajectory) - 1:
            ep.stop_reason = "time limit"

    def _plan(self, ep: _Episode, frame: int) -> FloatArray:
        """Predict, place the handover target and advance the reference by one plan."""
        prediction = ep.perception.predict(ep.trajectory, frame)
        targets = self.targets(prediction, ep.steps)
        ep.q_f = self.goal_configuration(targets[-1], ep.q_f)
        ep.goal = chain_pose(self.chain, ep.q_f).tip.copy()
        humans = tuple(skeleton_to_capsules(p, self.bone_map) for p in prediction.p_o[ep.steps])
        q_f = reachable_goal(
            self.chain, ep.state.q, ep.q_f, self.nmpc, self.config.planner.terminal_reach
        )
        inp = PlannerInput(q0=ep.state.q, q_f=q_f, p_rh_traj=targets, p_o_traj=humans)
        ep.plans += 1
        try:
            plan = ep.planner.step(inp)
        except PlanningFailedError as e:
            ep.failed += 1
            ep.status = str(e.outcome.status)
            logger.warning("frame %d: %s; holding the reference", frame, e)
            ep.reference.hold()
        else:
            ep.degraded += int(plan.degraded)
            ep.status = str(plan.solver.status)
            ep.reference.advance(plan.u0)
        return prediction.p_o[0]

    def _filter_tick(
        self,
        ep: _Episode,
        frame: int,
        tick: int,
        observed: FloatArray,
        upcoming: FloatArray,
        planned: bool,
    ) -> None:
        """One safety filter tick followed by the plant steps it covers.

        The perceived human moves linearly from the observed frame towards the
        first predicted one; the plant-side distance uses the recording itself.
        """
        sim = self.config.simulation
        elapsed = tick * sim.filter_dt
        w = elapsed / FRAME_PERIOD
        perceived = skeleton_to_capsules((1.0 - w) * observed + w * upcoming, self.bone_map)
        ref = ep.reference.sample(elapsed)
        terms = dynamics_terms(self.chain, ep.state)
        posture = posture_torque(terms, ref.q_d, self.config.safety)
        out = ep.safety.step(
            terms,
            ref.x_d,
            ref.xd_d,
            ref.xdd_d,
            perceived,
            frame,
            goal=ep.goal,
            posture=posture,
        )
        filter_status = _filter_status(out, ep.safety.enabled)
        t_frame = float(ep.trajectory.times[frame])
        x, xd = terms.x, terms.xd
        watch = ep.options.stop_on_arrival
        for p in range(self.substeps[1]):
            t_sub = elapsed + p * sim.plant_dt
            t_now = t_frame + t_sub
            if watch and ep.arrival is None and t_now >= ep.options.arrival_after - 1e-9:
                if float(np.linalg.norm(x - ep.goal)) < sim.arrival_tolerance:
                    ep.arrival = t_now
            if p == 0:
                u = out.u_act
            else:
                r = ep.reference.sample(t_sub)
                u = ep.safety.force_at(out, terms, x, xd, r.x_d, r.xd_d, r.xdd_d)
            tau = to_torques(terms, u) + posture
            qdd = forward_dynamics(self.chain, ep.state, tau)
            ep.state = integrate(self.chain, ep.state, qdd, sim.plant_dt)
            ep.t = t_now + sim.plant_dt
            pose = chain_pose(self.chain, ep.state.q)
            xd_next = jacobian_from_pose(pose) @ ep.state.qd
            acc = float(np.linalg.norm(xd_next - xd)) / sim.plant_dt
            x, xd = pose.tip, xd_next
            lam = self._true_distance(pose, ep.trajectory, ep.t)
            ep.goal_error = float(np.linalg.norm(x - ep.goal))
            ep.rows.append(
                (
                    ep.t,
                    lam,
                    acc,
                    *ep.state.q,
                    lam < self.nmpc.d_safe,
                    ep.status,
                    filter_status,
                    planned and tick == 0 and p == 0,
                    p == 0,
                    ep.goal_error,
                )
            )

    def _true_distance(self, pose: ChainPose, trajectory: SkeletonTrajectory, t: float) -> float:
        human = skeleton_to_capsules(trajectory.interpolate(t), self.bone_map)
        track = HumanTrack.from_models([human])
        return float(horizon_distances(pose.origins[None], self.radii, track).lam[0])


def run_trial(
    config: ScenarioConfig,
    controller: Controller | str | None = None,
    seed: int | None = None,
    *,
    trial: int = 0,
    trajectory: SkeletonTrajectory | None = None,
    runner: TrialRunner | None = None,
) -> TrialResult:
    """Run one closed-loop trial of ``config``.

    Args:
        config: Scenario.
        controller: Control mode; the scenario's when ``None``.
        seed: Seed; the scenario's when ``None``.
        trial: Index recorded in the metrics.
        trajectory: Human recording; loaded from the scenario when ``None``.
        runner: Reused runner holding the loaded chain and bone map.

    Returns:
        TrialResult.

    Raises:
        SimulationFault: On a non-finite plant state.
        ConfigError: If a referenced file is missing or invalid.
    """
    runner = runner or TrialRunner(config)
    if trajectory is None:
        trajectory = load_trajectory(config.trajectory_source(), config.human.offset)
    return runner.run(trajectory, controller, seed, trial=trial)
