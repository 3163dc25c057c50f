"""Dynamics - Kinematic and dynamic model of serial manipulators."""

from sapsim.dynamics.exceptions import (
    ChainDefinitionError,
    DimensionError,
    DynamicsError,
    UnreachableTargetError,
)
from sapsim.dynamics.kinematics import (
    batch_chain_poses,
    chain_pose,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    jacobian_derivative,
    orientation_error,
    point_jacobian,
    point_jacobian_derivative,
)
from sapsim.dynamics.loader import load_chain, load_packaged_chain, parse_chain
from sapsim.dynamics.models import (
    ChainPose,
    DynamicsTerms,
    JointState,
    KinematicChain,
    LinkParam,
    TaskState,
)
from sapsim.dynamics.rigid_body import (
    bias_torque,
    coriolis_matrix,
    crba,
    gravity_torque,
    kinetic_energy,
    potential_energy,
    rnea,
)
from sapsim.dynamics.task_space import dynamics_terms, joint_acceleration, task_acceleration

__all__ = [
    "ChainDefinitionError",
    "ChainPose",
    "DimensionError",
    "DynamicsError",
    "DynamicsTerms",
    "JointState",
    "KinematicChain",
    "LinkParam",
    "TaskState",
    "UnreachableTargetError",
    "batch_chain_poses",
    "bias_torque",
    "chain_pose",
    "coriolis_matrix",
    "crba",
    "dynamics_terms",
    "forward_kinematics",
    "gravity_torque",
    "inverse_kinematics",
    "jacobian",
    "jacobian_derivative",
    "joint_acceleration",
    "kinetic_energy",
    "load_chain",
    "load_packaged_chain",
    "orientation_error",
    "parse_chain",
    "point_jacobian",
    "point_jacobian_derivative",
    "potential_energy",
    "rnea",
    "task_acceleration",
]
