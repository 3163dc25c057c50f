"""Safety - Task-space tracking control with the ECBF/CLF quadratic-program filter."""

from sapsim.safety.barrier import WitnessDifferencer, barrier_rows, link_witnesses
from sapsim.safety.controller import (
    braking_force,
    clf_row,
    composite_error,
    nominal_force,
    posture_torque,
    switching_term,
    to_torques,
)
from sapsim.safety.exceptions import QpInfeasibleError, SafetyConfigError, SafetyError
from sapsim.safety.filter import FilterOutput, SafetyFilter
from sapsim.safety.models import (
    BarrierRow,
    ClfRow,
    LinearRow,
    LowLevelGains,
    QpSolution,
    SafetyQp,
)
from sapsim.safety.qp import kkt_residual, safety_filter, solve_projection

__all__ = [
    "BarrierRow",
    "ClfRow",
    "FilterOutput",
    "LinearRow",
    "LowLevelGains",
    "QpInfeasibleError",
    "QpSolution",
    "SafetyConfigError",
    "SafetyError",
    "SafetyFilter",
    "SafetyQp",
    "WitnessDifferencer",
    "barrier_rows",
    "braking_force",
    "clf_row",
    "composite_error",
    "kkt_residual",
    "link_witnesses",
    "nominal_force",
    "posture_torque",
    "safety_filter",
    "solve_projection",
    "switching_term",
    "to_torques",
]
