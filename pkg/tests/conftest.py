"""Shared pytest fixtures and configuration."""

from collections.abc import Callable

import numpy as np
import pytest

from sapsim.config import ScenarioConfig, load_config
from sapsim.dynamics import KinematicChain, load_packaged_chain
from sapsim.geometry import (
    SKELETON_JOINTS,
    BoneMap,
    HumanModel,
    load_bone_map,
    skeleton_to_capsules,
)


# Register custom markers
def pytest_configure(config: pytest.Config) -> None:
    """Register custom markers for test categorization."""
    config.addinivalue_line("markers", "unit: fast tests of a single component")
    config.addinivalue_line("markers", "integration: component interaction tests")
    config.addinivalue_line("markers", "e2e: full closed-loop trial and CLI runs")
    config.addinivalue_line("markers", "slow: long closed-loop runs")


# Shared fixtures

SMALL_OVERRIDES = {
    "planner.horizon": 4,
    "solver.max_outer": 3,
    "solver.max_inner": 30,
    "simulation.max_time": 0.1,
    "simulation.trial_count": 2,
}


@pytest.fixture(scope="session")
def planar_chain() -> KinematicChain:
    """Two-link planar chain with 0.5 m links."""
    return load_packaged_chain("planar_2link")


@pytest.fixture(scope="session")
def reference_arm() -> KinematicChain:
    """7-DOF reference arm."""
    return load_packaged_chain("reference_arm")


@pytest.fixture(scope="session")
def pendulum_chain() -> KinematicChain:
    """Point-mass pendulum on a 1 m rod plus a negligible wrist link."""
    return load_packaged_chain("pendulum")


@pytest.fixture(scope="session")
def bone_map() -> BoneMap:
    """Packaged 15-capsule bone map."""
    return load_bone_map()


@pytest.fixture(scope="session")
def small_config() -> ScenarioConfig:
    """Packaged scenario cut down to a short horizon, loose solver and three frames."""
    return load_config(overrides=SMALL_OVERRIDES)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def sample_q(rng: np.random.Generator) -> Callable[[KinematicChain], np.ndarray]:
    """Sampler of joint vectors inside the limits, kept 5 % away from the stops."""

    def _sample(chain: KinematicChain) -> np.ndarray:
        span = chain.q_max - chain.q_min
        return chain.q_min + 0.05 * span + 0.9 * span * rng.random(chain.n)

    return _sample


@pytest.fixture
def human_at(bone_map: BoneMap) -> Callable[..., HumanModel]:
    """Human with every skeleton joint collapsed onto one point."""

    def _human(point: object) -> HumanModel:
        frame = np.tile(np.asarray(point, dtype=float), (SKELETON_JOINTS, 1))
        return skeleton_to_capsules(frame, bone_map)

    return _human
