"""Randomized trial suite comparing both controllers on paired seeds."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed

from tqdm import tqdm

from sapsim.config import Controller, ScenarioConfig
from sapsim.dynamics.exceptions import DynamicsError
from sapsim.geometry.exceptions import GeometryError
from sapsim.planner.exceptions import PlannerError
from sapsim.safety.exceptions import SafetyError
from sapsim.sim.exceptions import SimulationError
from sapsim.sim.models import SkeletonTrajectory, TrialMetrics
from sapsim.sim.trajectory import SYNTHETIC_PREFIX, load_trajectory
from sapsim.sim.trial import TrialRunner

logger = logging.getLogger(__name__)

BOTH_CONTROLLERS = (Controller.NMPC_ONLY, Controller.NMPC_ECBF)
TRIAL_ERRORS = (SimulationError, DynamicsError, GeometryError, PlannerError, SafetyError)


def trial_trajectory(config: ScenarioConfig, trial: int) -> SkeletonTrajectory:
    """Human recording of trial ``trial``.

    Synthetic sources cycle through the configured variants; a file source is
    used for every trial.
    """
    source = config.trajectory_source()
    if isinstance(source, str) and source.startswith(SYNTHETIC_PREFIX):
        variants = config.human.variants
        source = f"{SYNTHETIC_PREFIX}{variants[trial % len(variants)]}"
    return load_trajectory(source, config.human.offset)


def fault_row(
    trial: int,
    controller: Controller,
    seed: int,
    trajectory: SkeletonTrajectory | None,
    error: Exception,
) -> TrialMetrics:
    """Metrics row of an aborted trial."""
    return TrialMetrics(
        trial=trial,
        controller=str(controller),
        seed=seed,
        trajectory="" if trajectory is None else trajectory.name,
        trajectory_hash="" if trajectory is None else trajectory.digest(),
        max_acc=float("nan"),
        min_lambda=float("nan"),
        violation_count=0,
        fault=f"{type(error).__name__}: {error}",
    )


def _suite_trial(
    config: ScenarioConfig, trial: int, controllers: Sequence[Controller]
) -> list[TrialMetrics]:
    """Run every controller on one trial with the same seed and recording."""
    seed = config.simulation.seed + trial
    rows: list[TrialMetrics] = []
    try:
        runner = TrialRunner(config)
        trajectory = trial_trajectory(config, trial)
    except TRIAL_ERRORS as e:
        logger.error("trial %d could not be set up: %s", trial, e)
        return [fault_row(trial, c, seed, None, e) for c in controllers]

    for controller in controllers:
        try:
            result = runner.run(trajectory, controller, seed, trial=trial)
        except TRIAL_ERRORS as e:
            logger.warning("trial %d (%s) faulted: %s", trial, controller, e)
            rows.append(fault_row(trial, controller, seed, trajectory, e))
        else:
            rows.append(result.metrics)
    return rows


def run_suite(
    config: ScenarioConfig,
    n_trials: int | None = None,
    jobs: int | None = None,
    *,
    controllers: Sequence[Controller | str] = BOTH_CONTROLLERS,
    progress: bool = True,
) -> list[TrialMetrics]:
    """Run ``n_trials`` trials of every controller.

    Trial ``i`` uses seed ``simulation.seed + i`` for all controllers, so the
    start pose, perception noise and human recording are paired. A fault aborts
    only its own trial and is recorded in that row.

    Args:
        config: Scenario.
        n_trials: Number of trials; ``simulation.trial_count`` when ``None``.
        jobs: Worker processes; ``simulation.jobs`` when ``None``, inline when 1.
        controllers: Control modes compared per trial.
        progress: Show a progress bar.

    Returns:
        Metrics rows sorted by trial, then by the order of ``controllers``.

    Raises:
        ValueError: If ``n_trials`` or ``jobs`` is below 1.
    """
    n_trials = config.simulation.trial_count if n_trials is None else n_trials
    jobs = config.simulation.jobs if jobs is None else jobs
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    modes = tuple(Controller(c) for c in controllers)
    logger.info(
        "suite: %d trials x %s, %d job(s), base seed %d",
        n_trials,
        "/".join(str(m) for m in modes),
        jobs,
        config.simulation.seed,
    )

    rows: list[TrialMetrics] = []
    with tqdm(total=n_trials, desc="Trials", unit="trial", disable=not progress) as pbar:
        if jobs == 1 or n_trials == 1:
            for trial in range(n_trials):
                rows.extend(_suite_trial(config, trial, modes))
                pbar.update(1)
                pbar.set_postfix(faults=sum(r.faulted for r in rows))
        else:
            with ProcessPoolExecutor(max_workers=min(jobs, n_trials)) as executor:
                futures = {
                    executor.submit(_suite_trial, config, trial, modes): trial
                    for trial in range(n_trials)
                }
                for future in as_completed(futures):
                    rows.extend(future.result())
                    pbar.update(1)
                    pbar.set_postfix(last=futures[future], faults=sum(r.faulted for r in rows))

    order = {m: i for i, m in enumerate(modes)}
    rows.sort(key=lambda r: (r.trial, order[Controller(r.controller)]))
    faults = sum(r.faulted for r in rows)
    if faults:
        logger.warning("suite finished with %d faulted run(s)", faults)
    return rows
