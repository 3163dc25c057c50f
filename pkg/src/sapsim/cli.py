"""CLI entry point for the SapSim simulator.

Commands:
- run: one closed-loop trial with a tick log
- suite: randomized trials of both controllers on paired seeds
- idle: turn-taking idle times with and without motion prediction
- check: solver, gradient, distance and dynamics self-checks
- trajectory: export a synthetic recording to CSV
"""

from __future__ import annotations

import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, NoReturn, TypeVar

import click

from sapsim.checks import run_checks
from sapsim.config import (
    ConfigError,
    Controller,
    MissingFileError,
    Predictor,
    ScenarioConfig,
    load_config,
    parse_override,
)
from sapsim.logging import setup_logging
from sapsim.sim.exceptions import MissingLabelError, SimulationFault, TrajectoryFormatError
from sapsim.sim.idle import idle_time_experiment
from sapsim.sim.reports import (
    AGGREGATE_FILE,
    IDLE_FILE,
    METRICS_FILE,
    TICK_LOG_FILE,
    aggregate,
    format_table,
    idle_report,
    write_frame,
    write_metrics,
    write_tick_log,
)
from sapsim.sim.suite import BOTH_CONTROLLERS, run_suite
from sapsim.sim.trajectory import load_trajectory, synthetic_trajectory, write_trajectory
from sapsim.sim.trial import TrialRunner, run_trial

EXIT_FAULT = 1
EXIT_INPUT = 2

F = TypeVar("F", bound=Callable[..., Any])


def scenario_options(command: F) -> F:
    """Options shared by the commands that load a scenario."""
    options = [
        click.option(
            "-c",
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="Scenario YAML (default: packaged scenario)",
        ),
        click.option(
            "--set",
            "settings",
            multiple=True,
            metavar="SECTION.KEY=VALUE",
            help="Override one scenario value; repeatable",
        ),
        click.option(
            "--controller",
            type=click.Choice([c.value for c in Controller]),
            default=None,
            help="Control mode (default: from scenario)",
        ),
        click.option(
            "--predictor",
            type=click.Choice([p.value for p in Predictor]),
            default=None,
            help="Human motion predictor (default: from scenario)",
        ),
        click.option("--seed", type=int, default=None, help="Base seed (default: from scenario)"),
        click.option(
            "--out-dir",
            type=click.Path(file_okay=False, path_type=Path),
            default=Path("results"),
            show_default=True,
            help="Directory for the CSV reports",
        ),
        click.option("-v", "--verbose", is_flag=True, help="Log to the console at DEBUG"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _load(
    config_path: Path | None,
    settings: tuple[str, ...],
    controller: str | None,
    predictor: str | None,
    seed: int | None,
    jobs: int | None = None,
) -> ScenarioConfig:
    """Scenario with ``--set`` values applied, then the dedicated flags."""
    overrides: dict[str, Any] = dict(parse_override(text) for text in settings)
    flags = {
        "simulation.controller": controller,
        "perception.predictor": predictor,
        "simulation.seed": seed,
        "simulation.jobs": jobs,
    }
    overrides.update({key: value for key, value in flags.items() if value is not None})
    return load_config(config_path, overrides)


def _fail(prefix: str, error: Exception, code: int) -> NoReturn:
    click.echo(f"{prefix}: {error}", err=True)
    sys.exit(code)


def _setup(verbose: bool) -> None:
    setup_logging(level="DEBUG" if verbose else None, console=verbose)


@click.group()
@click.version_option()
def main() -> None:
    """SapSim - safety-aware manipulator planning and filtering simulator."""


@main.command()
@scenario_options
def run(
    config_path: Path | None,
    settings: tuple[str, ...],
    controller: str | None,
    predictor: str | None,
    seed: int | None,
    out_dir: Path,
    verbose: bool,
) -> None:
    """Run one closed-loop trial and write its tick log and metrics row."""
    _setup(verbose)
    try:
        config = _load(config_path, settings, controller, predictor, seed)
        result = run_trial(config)
    except MissingFileError as e:
        _fail("Missing file", e, EXIT_INPUT)
    except ConfigError as e:
        _fail("Configuration error", e, EXIT_INPUT)
    except (TrajectoryFormatError, MissingLabelError) as e:
        _fail("Trajectory error", e, EXIT_INPUT)
    except SimulationFault as e:
        if e.tick_log is not None:
            path = write_tick_log(e.tick_log, out_dir / TICK_LOG_FILE)
            click.echo(f"Partial tick log: {path}", err=True)
        _fail("Simulation fault", e, EXIT_FAULT)

    write_tick_log(result.log, out_dir / TICK_LOG_FILE)
    write_metrics([result.metrics], out_dir / METRICS_FILE)
    m = result.metrics
    click.echo(
        f"{m.controller} seed={m.seed}: max_acc={m.max_acc:.3f} m/s^2 "
        f"min_lambda={m.min_lambda:.4f} m violations={m.violation_count} "
        f"fallbacks={m.fallback_count} goal_error={m.goal_error:.4f} m ({result.stop_reason})"
    )
    click.echo(f"Wrote {out_dir / TICK_LOG_FILE} and {out_dir / METRICS_FILE}")


@main.command()
@scenario_options
@click.option("-n", "--trials", type=click.IntRange(min=1), default=None, help="Trial count")
@click.option("-j", "--jobs", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
def suite(
    config_path: Path | None,
    settings: tuple[str, ...],
    controller: str | None,
    predictor: str | None,
    seed: int | None,
    out_dir: Path,
    verbose: bool,
    trials: int | None,
    jobs: int | None,
    no_progress: bool,
) -> None:
    """Run randomized trials of both controllers with paired seeds.

    With --controller only that mode is run.
    A faulted trial is recorded in its row and the suite continues.
    """
    _setup(verbose)
    try:
        config = _load(config_path, settings, controller, predictor, seed, jobs)
        # fail on bad files before any worker starts
        config.load_chain()
        config.load_bone_map()
        load_trajectory(config.trajectory_source(), config.human.offset)
    except MissingFileError as e:
        _fail("Missing file", e, EXIT_INPUT)
    except ConfigError as e:
        _fail("Configuration error", e, EXIT_INPUT)
    except TrajectoryFormatError as e:
        _fail("Trajectory error", e, EXIT_INPUT)

    controllers = (Controller(controller),) if controller else BOTH_CONTROLLERS
    rows = run_suite(config, trials, controllers=controllers, progress=not no_progress)
    summary = aggregate(rows, config.planner.d_safe)
    write_metrics(rows, out_dir / METRICS_FILE)
    write_frame(summary, out_dir / AGGREGATE_FILE)
    click.echo(format_table(summary))
    click.echo(f"Wrote {out_dir / METRICS_FILE} and {out_dir / AGGREGATE_FILE}")
    faults = sum(r.faulted for r in rows)
    if faults:
        click.echo(f"{faults} run(s) faulted; see the fault column", err=True)


@main.command()
@scenario_options
def idle(
    config_path: Path | None,
    settings: tuple[str, ...],
    controller: str | None,
    predictor: str | None,
    seed: int | None,
    out_dir: Path,
    verbose: bool,
) -> None:
    """Compare turn-taking idle times with and without motion prediction."""
    _setup(verbose)
    try:
        config = _load(config_path, settings, controller, predictor, seed)
        trajectory = load_trajectory(config.trajectory_source(), config.human.offset)
        runner = TrialRunner(config)
        with_prediction = idle_time_experiment(config, trajectory, True, runner=runner)
        without_prediction = idle_time_experiment(config, trajectory, False, runner=runner)
    except MissingFileError as e:
        _fail("Missing file", e, EXIT_INPUT)
    except ConfigError as e:
        _fail("Configuration error", e, EXIT_INPUT)
    except (TrajectoryFormatError, MissingLabelError) as e:
        _fail("Trajectory error", e, EXIT_INPUT)
    except SimulationFault as e:
        _fail("Simulation fault", e, EXIT_FAULT)

    report = idle_report(with_prediction.metrics, without_prediction.metrics)
    write_frame(report, out_dir / IDLE_FILE)
    write_metrics(
        [with_prediction.metrics, without_prediction.metrics], out_dir / METRICS_FILE
    )
    click.echo(format_table(report))
    click.echo(f"Wrote {out_dir / IDLE_FILE}")


@main.command()
@click.option(
    "-c",
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Scenario YAML whose chain and bone map are checked",
)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the samples")
@click.option("-v", "--verbose", is_flag=True, help="Log to the console at DEBUG")
def check(config_path: Path | None, seed: int, verbose: bool) -> None:
    """Run the solver, gradient, distance and dynamics self-checks."""
    _setup(verbose)
    try:
        config = load_config(config_path)
        results = run_checks(config.load_chain(), config.load_bone_map(), seed)
    except ConfigError as e:
        _fail("Configuration error", e, EXIT_INPUT)

    width = max(len(r.name) for r in results)
    for result in results:
        status = "ok" if result.passed else "FAILED"
        click.echo(f"  {result.name:<{width}}  {status:<6}  {result.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        click.echo(f"{len(failed)} check(s) failed: {', '.join(failed)}", err=True)
        sys.exit(EXIT_FAULT)
    click.echo(f"All {len(results)} checks passed")


@main.command()
@click.argument("output", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--variant", type=click.IntRange(min=0), default=0, show_default=True, help="Recording set"
)
def trajectory(output: Path, variant: int) -> None:
    """Export a synthetic screw-driver recording to CSV."""
    try:
        recording = synthetic_trajectory(variant)
    except TrajectoryFormatError as e:
        _fail("Trajectory error", e, EXIT_INPUT)
    path = write_trajectory(recording, output)
    click.echo(f"Wrote {len(recording)} frames ({recording.duration:.2f} s) to {path}")


if __name__ == "__main__":
    main()
