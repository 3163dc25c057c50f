"""Turn-taking idle-time comparison with and without motion prediction.

The robot's compute blocks (data loading, prediction and planning) are modelled
as fixed durations from the ``idle`` scenario section so runs stay deterministic.
The human waits at the handover pose from the start of the handover action
until the tool arrives.
"""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from sapsim.config import Controller, ScenarioConfig
from sapsim.sim.models import SkeletonTrajectory, TrialResult
from sapsim.sim.perception import Perception
from sapsim.sim.trial import LoopOptions, TrialRunner

logger = logging.getLogger(__name__)

TRIGGER_ACTION = "pick up"
HANDOVER_ACTION = "take the screw"


def trigger_time(
    trajectory: SkeletonTrajectory, perception: Perception, handover_start: float
) -> float:
    """First time the trigger action is recognized, capped at the handover start."""
    for frame in range(len(trajectory)):
        t = float(trajectory.times[frame])
        if t >= handover_start:
            break
        if perception.recognize(trajectory, frame) == TRIGGER_ACTION:
            return t
    return handover_start


def idle_time_experiment(
    config: ScenarioConfig,
    trajectory: SkeletonTrajectory,
    with_prediction: bool,
    *,
    controller: Controller | str | None = None,
    seed: int | None = None,
    runner: TrialRunner | None = None,
) -> TrialResult:
    """Idle times of one handover under strict turn-taking.

    With prediction the robot is triggered when the trigger action is recognized;
    without it the robot starts only once the human holds the handover pose. In
    both cases motion begins after the modelled robot idle time and the human
    waits at the handover pose until the tool arrives.

    Args:
        config: Scenario; the ``idle`` section holds the compute durations.
        trajectory: Labelled recording covering the trigger and handover actions.
        with_prediction: Whether the robot plans ahead on predicted motion.
        controller: Control mode; the scenario's when ``None``.
        seed: Seed of the start pose and perception noise.
        runner: Reused runner.

    Returns:
        TrialResult whose metrics carry ``h_idl``, ``r_idl`` and ``total_time``.

    Raises:
        MissingLabelError: If the trajectory lacks the trigger or handover action.
    """
    runner = runner or TrialRunner(config)
    seed = config.simulation.seed if seed is None else seed
    trajectory.label_span(TRIGGER_ACTION)
    t_take, _ = trajectory.label_span(HANDOVER_ACTION)
    r_idl = config.idle.robot_idle(with_prediction)

    if with_prediction:
        recognizer = Perception(config.perception, np.random.default_rng(seed))
        t_start = trigger_time(trajectory, recognizer, t_take) + r_idl
    else:
        t_start = t_take + r_idl
    # the operator stays at the handover pose while waiting for the robot
    horizon = t_start - float(trajectory.times[0]) + config.simulation.max_time
    waiting = trajectory.held_at(t_take, horizon)
    options = LoopOptions(
        start_time=t_start,
        force_planning=True,
        stop_on_action=False,
        stop_on_arrival=True,
        arrival_after=t_take,
    )
    result = runner.run(waiting, controller, seed, options=options)

    arrival = result.arrival_time
    if arrival is None:
        arrival = t_start + result.metrics.total_time
        logger.warning(
            "tool did not reach the handover target within %.1f s", config.simulation.max_time
        )
    h_idl = max(0.0, arrival - t_take)
    metrics = replace(
        result.metrics,
        trajectory=trajectory.name,
        trajectory_hash=trajectory.digest(),
        h_idl=h_idl,
        r_idl=r_idl,
        total_time=trajectory.duration + h_idl,
    )
    logger.info(
        "idle (%s prediction): start=%.2f s arrival=%.2f s h_idl=%.2f s r_idl=%.2f s",
        "with" if with_prediction else "without",
        t_start,
        arrival,
        h_idl,
        r_idl,
    )
    return TrialResult(
        metrics=metrics,
        log=result.log,
        stop_reason=result.stop_reason,
        arrival_time=arrival,
    )
