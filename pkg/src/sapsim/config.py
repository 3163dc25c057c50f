"""Scenario configuration: YAML sections, defaults and command-line overrides."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from sapsim.data import data_path
from sapsim.dynamics import ChainDefinitionError, KinematicChain, load_chain, load_packaged_chain
from sapsim.dynamics.models import FloatArray
from sapsim.geometry import BoneMap, SkeletonShapeError, load_bone_map
from sapsim.planner import NmpcConfig, PlannerConfigError
from sapsim.safety import LowLevelGains, SafetyConfigError
from sapsim.solver import SolverConfig, SolverConfigError

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO = "scenario.yaml"
SYNTHETIC_PREFIX = "synthetic:"
PACKAGED_CHAINS = ("reference_arm", "planar_2link", "pendulum")


class ConfigError(Exception):
    """Scenario file or override is invalid.

    Attributes:
        key: Dotted key at fault, when known.
        line: 1-based line in the scenario file, when known.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None) -> None:
        where = ""
        if key is not None:
            where = f"{key}: " if line is None else f"{key} (line {line}): "
        super().__init__(where + message)
        self.key = key
        self.line = line


class MissingFileError(ConfigError):
    """A file referenced by the scenario does not exist."""

    def __init__(self, path: Path, key: str | None = None, line: int | None = None) -> None:
        super().__init__(f"file not found: {path}", key, line)
        self.path = path


class Controller(StrEnum):
    """Low-level control mode."""

    NMPC_ONLY = "nmpc_only"
    NMPC_ECBF = "nmpc_ecbf"


class Predictor(StrEnum):
    """Human motion predictor."""

    ORACLE = "oracle"
    CONSTANT_VELOCITY = "constant_velocity"


@dataclass(frozen=True)
class RobotSection:
    """Manipulator model and start configuration.

    Attributes:
        chain: Packaged chain name or parameter file path.
        link_radius: Capsule radius of every link, m.
        start: Fixed start joint vector; sampled from the start box when ``None``.
        start_low: Lower corner of the joint-space start box.
        start_high: Upper corner of the joint-space start box.
        near_operator: Sample from the box close to the operator instead.
        near_low: Lower corner of the near-operator box.
        near_high: Upper corner of the near-operator box.
    """

    chain: str = "reference_arm"
    link_radius: float = 0.06
    start: tuple[float, ...] | None = None
    start_low: tuple[float, ...] = (-1.2, -0.5, -0.4, 0.6, -0.4, 0.2, -0.4)
    start_high: tuple[float, ...] = (-0.4, 0.1, 0.4, 1.6, 0.4, 1.0, 0.4)
    near_operator: bool = False
    near_low: tuple[float, ...] = (-0.3, -0.3, -0.3, 0.3, -0.3, 0.0, -0.3)
    near_high: tuple[float, ...] = (0.3, 0.1, 0.3, 0.8, 0.3, 0.6, 0.3)

    def __post_init__(self) -> None:
        if not self.link_radius > 0.0:
            raise ValueError(f"link_radius must be positive, got {self.link_radius}")
        for low, high in ((self.start_low, self.start_high), (self.near_low, self.near_high)):
            if len(low) != len(high) or any(a > b for a, b in zip(low, high, strict=True)):
                raise ValueError("start boxes need matching corners with low <= high")

    def start_box(self) -> tuple[FloatArray, FloatArray]:
        """Corners of the box the start joint vector is drawn from."""
        if self.near_operator:
            return np.asarray(self.near_low), np.asarray(self.near_high)
        return np.asarray(self.start_low), np.asarray(self.start_high)


@dataclass(frozen=True)
class HumanSection:
    """Recorded or synthetic operator motion.

    Attributes:
        trajectory: CSV path, or ``synthetic:<variant>`` for a generated recording.
        variants: Synthetic variants cycled through by the suite.
        bone_map: Bone map file; packaged map when ``None``.
        offset: Translation added to every joint, m.
    """

    trajectory: str = "synthetic:0"
    variants: tuple[int, ...] = (0, 1, 2)
    bone_map: str | None = None
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if len(self.offset) != 3:
            raise ValueError("offset needs three coordinates")
        if not self.variants:
            raise ValueError("variants must not be empty")


@dataclass(frozen=True)
class PerceptionSection:
    """Predictor and recognizer stand-ins.

    Attributes:
        predictor: ``oracle`` or ``constant_velocity``.
        noise_bound: Bound on the oracle noise per coordinate, m.
        p_err: Probability of a recognizer label flip.
        history_frames: Observed frames fed to the predictor.
        prediction_frames: Predicted frames (1 s at 20 Hz).
        interactive: Actions that trigger the planner.
        stop_action: Action that stops the robot.
    """

    predictor: Predictor = Predictor.ORACLE
    noise_bound: float = 0.02
    p_err: float = 0.0
    history_frames: int = 20
    prediction_frames: int = 20
    interactive: tuple[str, ...] = ("pick up", "move forward")
    stop_action: str = "take the screw"

    def __post_init__(self) -> None:
        object.__setattr__(self, "predictor", Predictor(self.predictor))
        if self.noise_bound < 0.0:
            raise ValueError(f"noise_bound must be non-negative, got {self.noise_bound}")
        if not 0.0 <= self.p_err <= 1.0:
            raise ValueError(f"p_err must lie in [0, 1], got {self.p_err}")
        if self.history_frames < 1 or self.prediction_frames < 1:
            raise ValueError("frame counts must be at least 1")


@dataclass(frozen=True)
class PlannerSection:
    """NMPC weights and horizon plus the handover target rule.

    Attributes:
        horizon: Steps ``N_h``.
        step: Step length ``T_s``, s.
        qp: Terminal pose-error weights.
        qv: Terminal input weight.
        rp: Stage pose-error weights.
        rv: Stage input weight.
        d_safe: Safety distance, m.
        u_bounds: Joint speed bounds; chain limits when ``None``.
        handover_offset: Distance of the target from the hand towards the robot base, m.
        target: Fixed target point overriding the predicted hand, m.
        warm_start: Seed each solve with the shifted previous solution.
        terminal_reach: Share of the joint travel within one horizon that the terminal
            set-point may ask for; farther inverse-kinematics goals are approached
            over several ticks.
    """

    horizon: int = 20
    step: float = 0.05
    qp: tuple[float, ...] = (5.0, 5.0, 5.0, 1.0, 1.0, 0.0)
    qv: float = 1.0
    rp: tuple[float, ...] = (3.0, 3.0, 3.0, 0.0, 0.0, 0.0)
    rv: float = 0.1
    d_safe: float = 0.10
    u_bounds: tuple[float, ...] | None = None
    handover_offset: float = 0.3
    target: tuple[float, float, float] | None = None
    warm_start: bool = True
    terminal_reach: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.terminal_reach <= 1.0:
            raise ValueError(f"terminal_reach must lie in (0, 1], got {self.terminal_reach}")
        if self.handover_offset < 0.0:
            raise ValueError(f"handover_offset must be non-negative, got {self.handover_offset}")
        if self.target is not None and len(self.target) != 3:
            raise ValueError("target needs three coordinates")
        self.nmpc(1)

    def nmpc(self, links: int, link_radius: float = 0.06) -> NmpcConfig:
        """NmpcConfig for a chain with ``links`` links."""
        return NmpcConfig(
            horizon=self.horizon,
            step=self.step,
            qp=self.qp,
            qv=self.qv,
            rp=self.rp,
            rv=self.rv,
            d_safe=self.d_safe,
            u_bounds=self.u_bounds,
            link_radii=(link_radius,) * links,
        )


@dataclass(frozen=True)
class SimulationSection:
    """Loop rates, stop rules and suite size.

    Attributes:
        controller: ``nmpc_only`` or ``nmpc_ecbf``.
        seed: Base seed.
        trial_count: Trials in a suite.
        plant_dt: Plant integration step, s.
        filter_dt: Safety filter period, s.
        max_time: Cap on simulated time per trial, s.
        goal_tolerance: Tool distance counted as goal reached, m.
        arrival_tolerance: Tool distance counted as handover arrival, m.
        jobs: Parallel trials in a suite.
    """

    controller: Controller = Controller.NMPC_ECBF
    seed: int = 0
    trial_count: int = 100
    plant_dt: float = 0.001
    filter_dt: float = 0.005
    max_time: float = 20.0
    goal_tolerance: float = 0.01
    arrival_tolerance: float = 0.02
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "controller", Controller(self.controller))
        if self.trial_count < 1:
            raise ValueError(f"trial_count must be at least 1, got {self.trial_count}")
        if not 0.0 < self.plant_dt <= self.filter_dt:
            raise ValueError("rates must satisfy 0 < plant_dt <= filter_dt")
        if not self.max_time > 0.0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")

    def substeps(self, frame_period: float) -> tuple[int, int]:
        """Filter ticks per frame and plant steps per filter tick.

        Raises:
            ValueError: If the periods do not divide evenly.
        """
        filters = frame_period / self.filter_dt
        plants = self.filter_dt / self.plant_dt
        if abs(filters - round(filters)) > 1e-9 or abs(plants - round(plants)) > 1e-9:
            raise ValueError("filter_dt must divide the frame period and plant_dt filter_dt")
        return round(filters), round(plants)


@dataclass(frozen=True)
class IdleSection:
    """Modelled robot idle blocks of the turn-taking comparison, s.

    Attributes:
        load_time: Data loading before the robot can move.
        prediction_time: Motion prediction, spent only when prediction is used.
        planning_time: Path planning before motion starts.
    """

    load_time: float = 0.35
    prediction_time: float = 0.6
    planning_time: float = 1.0

    def __post_init__(self) -> None:
        if min(self.load_time, self.prediction_time, self.planning_time) < 0.0:
            raise ValueError("idle times must be non-negative")

    def robot_idle(self, with_prediction: bool) -> float:
        """Robot idle time before motion starts."""
        extra = self.prediction_time if with_prediction else 0.0
        return self.load_time + extra + self.planning_time


SECTIONS: dict[str, type] = {
    "robot": RobotSection,
    "human": HumanSection,
    "perception": PerceptionSection,
    "planner": PlannerSection,
    "solver": SolverConfig,
    "safety": LowLevelGains,
    "simulation": SimulationSection,
    "idle": IdleSection,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete scenario; every section defaults to the published values."""

    robot: RobotSection = field(default_factory=RobotSection)
    human: HumanSection = field(default_factory=HumanSection)
    perception: PerceptionSection = field(default_factory=PerceptionSection)
    planner: PlannerSection = field(default_factory=PlannerSection)
    solver: SolverConfig = field(default_factory=SolverConfig)
    safety: LowLevelGains = field(default_factory=LowLevelGains)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    idle: IdleSection = field(default_factory=IdleSection)
    root_path: Path = field(default_factory=Path)

    @classmethod
    def from_dict(
        cls,
        data: dict[str, Any],
        root_path: Path,
        lines: dict[str, int] | None = None,
    ) -> ScenarioConfig:
        """Build and validate a scenario from a nested mapping.

        Args:
            data: Mapping of section name to key/value mapping.
            root_path: Directory relative paths are resolved against.
            lines: Dotted key to line number, for diagnostics.

        Returns:
            Parsed scenario.

        Raises:
            ConfigError: On unknown sections or keys, wrong types or values out of range.
        """
        lines = lines or {}
        sections: dict[str, Any] = {}
        for name, values in data.items():
            if name not in SECTIONS:
                raise ConfigError("unknown section", name, lines.get(name))
            if values is None:
                continue
            if not isinstance(values, dict):
                raise ConfigError("section must be a mapping", name, lines.get(name))
            sections[name] = _build_section(SECTIONS[name], name, values, lines)
        return cls(**sections, root_path=root_path)

    def resolve(self, value: str) -> Path:
        """Path of ``value`` relative to the scenario file."""
        path = Path(value)
        return path if path.is_absolute() else self.root_path / path

    def load_chain(self) -> KinematicChain:
        """Manipulator of the scenario.

        Raises:
            MissingFileError: If the parameter file does not exist.
            ConfigError: If it does not parse.
        """
        name = self.robot.chain
        try:
            if name in PACKAGED_CHAINS:
                return load_packaged_chain(name)
            path = self.resolve(name)
            if not path.is_file():
                raise MissingFileError(path, "robot.chain")
            return load_chain(path)
        except ChainDefinitionError as e:
            raise ConfigError(str(e), "robot.chain") from e

    def load_bone_map(self) -> BoneMap:
        """Bone map of the scenario.

        Raises:
            MissingFileError: If the bone map file does not exist.
        """
        if self.human.bone_map is None:
            return load_bone_map()
        path = self.resolve(self.human.bone_map)
        if not path.is_file():
            raise MissingFileError(path, "human.bone_map")
        try:
            return load_bone_map(path)
        except SkeletonShapeError as e:
            raise ConfigError(str(e), "human.bone_map") from e

    def trajectory_source(self) -> str | Path:
        """``synthetic:<variant>`` unchanged, otherwise the resolved CSV path.

        Raises:
            MissingFileError: If the CSV does not exist.
        """
        source = self.human.trajectory
        if source.startswith(SYNTHETIC_PREFIX):
            return source
        path = self.resolve(source)
        if not path.is_file():
            raise MissingFileError(path, "human.trajectory")
        return path

    def nmpc(self, chain: KinematicChain) -> NmpcConfig:
        """Planner configuration for ``chain``."""
        return self.planner.nmpc(chain.n, self.robot.link_radius)

    def link_radii(self, chain: KinematicChain) -> FloatArray:
        """Capsule radius of every link."""
        return np.full(chain.n, self.robot.link_radius)

    def to_dict(self) -> dict[str, Any]:
        """Plain nested mapping that :meth:`from_dict` accepts."""
        out: dict[str, Any] = {}
        for name in SECTIONS:
            section = dataclasses.asdict(getattr(self, name))
            out[name] = {k: _plain(v) for k, v in section.items()}
        return out

    def with_overrides(self, overrides: dict[str, Any]) -> ScenarioConfig:
        """Copy with dotted-key overrides applied.

        Raises:
            ConfigError: On a malformed or unknown key or an invalid value.
        """
        data = self.to_dict()
        for dotted, value in overrides.items():
            section, _, key = dotted.partition(".")
            if not key or section not in SECTIONS:
                raise ConfigError("override keys look like 'section.key'", dotted)
            data[section][key] = value
        return ScenarioConfig.from_dict(data, self.root_path)


def _plain(value: Any) -> Any:
    if isinstance(value, StrEnum):
        return str(value)
    if isinstance(value, tuple):
        return list(value)
    return value


def _coerce(value: Any, default: Any) -> Any:
    """Lists become tuples; ints are accepted where floats are expected."""
    if isinstance(value, list):
        return tuple(value)
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _build_section(cls: type, name: str, values: dict[str, Any], lines: dict[str, int]) -> Any:
    fields = {f.name: f for f in dataclasses.fields(cls)}
    defaults = cls()
    kwargs: dict[str, Any] = {}
    for key, value in values.items():
        dotted = f"{name}.{key}"
        if key not in fields:
            raise ConfigError("unknown key", dotted, lines.get(dotted))
        default = getattr(defaults, key)
        value = _coerce(value, default)
        if (
            default is not None
            and value is not None
            and not isinstance(default, tuple | StrEnum)
            and not isinstance(value, type(default))
        ):
            raise ConfigError(
                f"expected {type(default).__name__}, got {type(value).__name__}",
                dotted,
                lines.get(dotted),
            )
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (
        ValueError,
        TypeError,
        PlannerConfigError,
        SafetyConfigError,
        SolverConfigError,
    ) as e:
        key = next(iter(kwargs), None)
        for candidate in kwargs:
            if candidate in str(e):
                key = candidate
                break
        dotted = f"{name}.{key}" if key else name
        raise ConfigError(str(e), dotted, lines.get(dotted)) from e


def _key_lines(text: str) -> dict[str, int]:
    """Dotted key of every mapping entry to its 1-based line."""
    lines: dict[str, int] = {}
    root = yaml.compose(text)
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        lines[key_node.value] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for sub_key, _ in value_node.value:
                lines[f"{key_node.value}.{sub_key.value}"] = sub_key.start_mark.line + 1
    return lines


def parse_override(text: str) -> tuple[str, Any]:
    """Split ``section.key=value``; the value is read as YAML.

    Raises:
        ConfigError: If there is no ``=``.
    """
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like 'section.key=value', got {text!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid value {raw!r}", key.strip()) from e
    return key.strip(), value


def load_config(
    config_path: Path | str | None = None, overrides: dict[str, Any] | None = None
) -> ScenarioConfig:
    """Load a scenario file and apply overrides.

    Precedence is overrides, then the file, then the built-in defaults.

    Args:
        config_path: Scenario YAML; the packaged defaults when ``None``.
        overrides: Dotted keys such as ``planner.horizon``.

    Returns:
        Parsed scenario.

    Raises:
        MissingFileError: If the file does not exist.
        ConfigError: If it is not a valid scenario.
    """
    path = data_path(DEFAULT_SCENARIO) if config_path is None else Path(config_path)
    if not path.is_file():
        raise MissingFileError(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML in {path}: {e}", str(path), line) from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"scenario must be a YAML mapping, got {type(data).__name__}")
    config = ScenarioConfig.from_dict(data, path.parent, lines)
    if overrides:
        config = config.with_overrides(overrides)
    logger.debug("loaded scenario %s with %d overrides", path, len(overrides or {}))
    return config
