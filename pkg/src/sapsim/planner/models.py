"""Data models for the receding-horizon planner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sapsim.dynamics.models import FloatArray, KinematicChain
from sapsim.geometry.models import HumanModel
from sapsim.geometry.robot import DEFAULT_LINK_RADIUS
from sapsim.planner.exceptions import PlannerConfigError, PlannerInputError
from sapsim.solver.models import SolverOutcome, SolverStatus

DEFAULT_QP = (5.0, 5.0, 5.0, 1.0, 1.0, 0.0)
DEFAULT_RP = (3.0, 3.0, 3.0, 0.0, 0.0, 0.0)


def _weights(values: float | tuple[float, ...], size: int, name: str) -> FloatArray:
    arr = np.broadcast_to(np.asarray(values, dtype=float), (size,)).copy()
    if np.any(arr < 0.0):
        raise PlannerConfigError(f"weights '{name}' must be non-negative")
    return arr


@dataclass(frozen=True)
class NmpcConfig:
    """Horizon, weights and safety margin of the NMPC problem.

    Attributes:
        horizon: Number of steps ``N_h``.
        step: Step length ``T_s``, s.
        qp: Terminal pose-error weights (3 position, 3 orientation).
        qv: Terminal input weights, one value or one per joint.
        rp: Stage pose-error weights (3 position, 3 orientation).
        rv: Stage input weights, one value or one per joint.
        d_safe: Safety distance, m.
        u_bounds: Joint speed bounds, rad/s; ``None`` uses the chain speed limits.
        link_radii: Robot capsule radii; ``None`` uses 0.06 m on every link.
    """

    horizon: int = 20
    step: float = 0.05
    qp: tuple[float, ...] = DEFAULT_QP
    qv: float | tuple[float, ...] = 1.0
    rp: tuple[float, ...] = DEFAULT_RP
    rv: float | tuple[float, ...] = 0.1
    d_safe: float = 0.10
    u_bounds: tuple[float, ...] | None = None
    link_radii: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise PlannerConfigError(f"horizon must be at least 1, got {self.horizon}")
        if not self.step > 0.0:
            raise PlannerConfigError(f"step must be positive, got {self.step}")
        if not self.d_safe > 0.0:
            raise PlannerConfigError(f"d_safe must be positive, got {self.d_safe}")
        _weights(self.qp, 6, "qp")
        _weights(self.rp, 6, "rp")
        if self.u_bounds is not None and any(b <= 0.0 for b in self.u_bounds):
            raise PlannerConfigError("joint speed bounds must be positive")

    @property
    def prediction_time(self) -> float:
        """Horizon length ``N_h T_s``, s."""
        return self.horizon * self.step

    def speed_bounds(self, chain: KinematicChain) -> FloatArray:
        """Per-joint speed bound for ``chain``."""
        if self.u_bounds is None:
            return chain.v_max.copy()
        return _weights(self.u_bounds, chain.n, "u_bounds")

    def radii(self, chain: KinematicChain) -> FloatArray:
        """Robot link capsule radii for ``chain``."""
        if self.link_radii is None:
            return np.full(chain.n, DEFAULT_LINK_RADIUS)
        return _weights(self.link_radii, chain.n, "link_radii")

    def weight_vectors(self, n: int) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        """Diagonals ``(Qp, Qv, Rp, Rv)`` sized for ``n`` joints."""
        return (
            _weights(self.qp, 6, "qp"),
            _weights(self.qv, n, "qv"),
            _weights(self.rp, 6, "rp"),
            _weights(self.rv, n, "rv"),
        )


@dataclass(frozen=True, eq=False)
class PlannerInput:
    """Problem data of one planning tick.

    Attributes:
        q0: Current joint vector.
        q_f: Terminal joint set-point.
        p_rh_traj: Target positions over the horizon, shape (N_h, 3); entry ``k``
            belongs to time ``t + (k + 1) T_s``.
        p_o_traj: Predicted human capsules over the horizon, same timing.
        orientation: Desired tool quaternion (x, y, z, w); ``None`` uses the
            orientation reached at ``q_f``.
    """

    q0: FloatArray
    q_f: FloatArray
    p_rh_traj: FloatArray
    p_o_traj: tuple[HumanModel, ...]
    orientation: FloatArray | None = None

    def __post_init__(self) -> None:
        q0 = np.asarray(self.q0, dtype=float).reshape(-1)
        q_f = np.asarray(self.q_f, dtype=float).reshape(-1)
        if q0.shape != q_f.shape:
            raise PlannerInputError(f"q0 and q_f lengths differ: {q0.size} vs {q_f.size}")
        targets = np.asarray(self.p_rh_traj, dtype=float)
        if targets.ndim != 2 or targets.shape[1] != 3:
            raise PlannerInputError(f"p_rh_traj must have shape (N_h, 3), got {targets.shape}")
        frames = tuple(self.p_o_traj)
        if len(frames) != targets.shape[0]:
            raise PlannerInputError(
                f"p_rh_traj has {targets.shape[0]} frames but p_o_traj has {len(frames)}"
            )
        if not (np.all(np.isfinite(q0)) and np.all(np.isfinite(q_f))):
            raise PlannerInputError("joint vectors must be finite")
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q_f", q_f)
        object.__setattr__(self, "p_rh_traj", targets)
        object.__setattr__(self, "p_o_traj", frames)

    @property
    def horizon(self) -> int:
        """Number of predicted frames."""
        return int(self.p_rh_traj.shape[0])

    def check(self, chain: KinematicChain, config: NmpcConfig) -> None:
        """Validate against the chain and the configured horizon.

        Raises:
            PlannerInputError: On a length mismatch.
        """
        if self.q0.size != chain.n:
            raise PlannerInputError(f"q0 must have {chain.n} entries, got {self.q0.size}")
        if self.horizon != config.horizon:
            raise PlannerInputError(
                f"trajectories must have {config.horizon} frames, got {self.horizon}"
            )


@dataclass(frozen=True, eq=False)
class HorizonStates:
    """Predicted joint and Cartesian states ``k = 0..N_h``.

    Attributes:
        q: Joint vectors, shape (N_h + 1, n).
        x: Tool positions, shape (N_h + 1, 3).
    """

    q: FloatArray
    x: FloatArray


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Outcome of one planning tick.

    Attributes:
        u0: First command, rad/s.
        full_sequence: All commands, shape (N_h, n).
        predicted_states: Rollout of ``full_sequence``.
        solver: Solver outcome.
        min_pred_lambda: Minimum predicted signed distance over ``k = 1..N_h``, m.
        predicted_lambdas: Predicted signed distance per step ``k = 1..N_h``, m.
    """

    u0: FloatArray
    full_sequence: FloatArray
    predicted_states: HorizonStates
    solver: SolverOutcome
    min_pred_lambda: float
    predicted_lambdas: FloatArray = field(repr=False)

    @property
    def degraded(self) -> bool:
        """Whether the solver stopped without meeting its tolerances."""
        return self.solver.status is not SolverStatus.CONVERGED


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """Desired joint and Cartesian motion handed to the low-level controller.

    Attributes:
        q_d: Desired joint vector.
        x_d: Desired tool position, m.
        xd_d: Desired tool velocity, m/s.
        xdd_d: Desired tool acceleration, m/s^2.
    """

    q_d: FloatArray
    x_d: FloatArray
    xd_d: FloatArray
    xdd_d: FloatArray
