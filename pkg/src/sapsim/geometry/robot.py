"""Capsules bounding the robot links."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.exceptions import DimensionError
from sapsim.dynamics.kinematics import chain_pose
from sapsim.dynamics.models import ChainPose, FloatArray, KinematicChain
from sapsim.geometry.models import CapsuleSet

DEFAULT_LINK_RADIUS = 0.06


def capsules_from_origins(origins: FloatArray, link_radii: object) -> CapsuleSet:
    """Capsule ``k`` spans ``origins[k]`` to ``origins[k+1]``.

    Args:
        origins: Joint frame origins followed by the tool point, shape (n+1, 3).
        link_radii: One radius per link.

    Raises:
        DimensionError: If the radius count does not match the link count.
    """
    radii = np.asarray(link_radii, dtype=float).reshape(-1)
    links = origins.shape[0] - 1
    if radii.size != links:
        raise DimensionError(f"expected {links} link radii, got {radii.size}")
    return CapsuleSet(p0=origins[:-1], p1=origins[1:], radii=radii)


def capsules_from_pose(pose: ChainPose, link_radii: object) -> CapsuleSet:
    """Link capsules of precomputed chain geometry."""
    return capsules_from_origins(pose.origins, link_radii)


def robot_link_capsules(chain: KinematicChain, q: object, link_radii: object) -> CapsuleSet:
    """Capsules spanning consecutive joint frame origins at ``q``.

    Raises:
        DimensionError: If ``q`` or ``link_radii`` has the wrong length.
    """
    radii = np.asarray(link_radii, dtype=float).reshape(-1)
    if radii.size != chain.n:
        raise DimensionError(f"expected {chain.n} link radii, got {radii.size}")
    return capsules_from_pose(chain_pose(chain, q), radii)


def uniform_radii(chain: KinematicChain, radius: float = DEFAULT_LINK_RADIUS) -> FloatArray:
    """Same radius on every link."""
    return np.full(chain.n, float(radius))
