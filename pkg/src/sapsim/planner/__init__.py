"""Planner - Receding-horizon NMPC over joint velocities with collision clamps."""

from sapsim.planner.exceptions import (
    PlannerConfigError,
    PlannerError,
    PlannerInputError,
    PlanningFailedError,
)
from sapsim.planner.models import (
    HorizonStates,
    NmpcConfig,
    PlannerInput,
    PlanResult,
    ReferenceState,
)
from sapsim.planner.nmpc import NmpcPlanner, plan_step, reachable_goal, shift_warm_start
from sapsim.planner.ocp import OcpEvaluator, build_ocp, predicted_distances
from sapsim.planner.reference import ReferenceIntegrator, integrate_reference
from sapsim.planner.rollout import joint_rollout, rollout

__all__ = [
    "HorizonStates",
    "NmpcConfig",
    "NmpcPlanner",
    "OcpEvaluator",
    "PlanResult",
    "PlannerConfigError",
    "PlannerError",
    "PlannerInput",
    "PlannerInputError",
    "PlanningFailedError",
    "ReferenceIntegrator",
    "ReferenceState",
    "build_ocp",
    "integrate_reference",
    "joint_rollout",
    "plan_step",
    "predicted_distances",
    "reachable_goal",
    "rollout",
    "shift_warm_start",
]
