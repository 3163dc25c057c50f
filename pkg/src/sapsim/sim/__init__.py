"""Sim - Human playback, perception, plant integration and the experiment harness."""

from sapsim.sim.exceptions import (
    EndOfTrajectory,
    MissingLabelError,
    SimulationError,
    SimulationFault,
    TrajectoryFormatError,
)
from sapsim.sim.idle import idle_time_experiment, trigger_time
from sapsim.sim.models import (
    ACTIONS,
    FRAME_PERIOD,
    Prediction,
    SkeletonTrajectory,
    TrialMetrics,
    TrialResult,
)
from sapsim.sim.perception import (
    Perception,
    predict,
    predict_constant_velocity,
    predict_oracle,
    recognize,
)
from sapsim.sim.plant import forward_dynamics, integrate, plant_step
from sapsim.sim.reports import aggregate, idle_report, read_metrics, write_metrics
from sapsim.sim.suite import run_suite
from sapsim.sim.trajectory import (
    load_trajectory,
    read_trajectory,
    synthetic_trajectory,
    write_trajectory,
)
from sapsim.sim.trial import LoopOptions, TrialRunner, run_trial

__all__ = [
    "ACTIONS",
    "FRAME_PERIOD",
    "EndOfTrajectory",
    "LoopOptions",
    "MissingLabelError",
    "Perception",
    "Prediction",
    "SimulationError",
    "SimulationFault",
    "SkeletonTrajectory",
    "TrajectoryFormatError",
    "TrialMetrics",
    "TrialResult",
    "TrialRunner",
    "aggregate",
    "forward_dynamics",
    "idle_report",
    "idle_time_experiment",
    "integrate",
    "load_trajectory",
    "plant_step",
    "predict",
    "predict_constant_velocity",
    "predict_oracle",
    "read_metrics",
    "read_trajectory",
    "recognize",
    "run_suite",
    "run_trial",
    "synthetic_trajectory",
    "trigger_time",
    "write_metrics",
    "write_trajectory",
]
