"""Signed capsule distances and witness points."""

from __future__ import annotations

import numpy as np

from sapsim.dynamics.models import FloatArray
from sapsim.geometry import gjk
from sapsim.geometry.exceptions import EmptyCapsuleSetError
from sapsim.geometry.models import (
    Capsule,
    CapsuleSet,
    DistanceResult,
    HorizonDistances,
    HumanModel,
    HumanTrack,
)


def _result(
    lam: float,
    core_a: FloatArray,
    core_b: FloatArray,
    normal: FloatArray,
    ra: float,
    rb: float,
    pair: tuple[int, int],
) -> DistanceResult:
    return DistanceResult(
        lam=float(lam),
        p_support=core_b - rb * normal,
        x_witness=core_a + ra * normal,
        pair=pair,
        robot_core=core_a,
        human_core=core_b,
        normal=normal,
    )


def capsule_distance(a: Capsule, b: Capsule) -> DistanceResult:
    """Signed distance between two capsules by GJK on their segment cores.

    ``lam`` is the core distance minus both radii. Witness points lie on the swept
    boundaries along the minimising direction: ``x_witness`` on ``a`` and
    ``p_support`` on ``b``.
    """
    lam, core_a, core_b, normal, _ = gjk.capsule_pair(
        a.p0, a.p1, a.radius, b.p0, b.p1, b.radius
    )
    return _result(lam, core_a, core_b, normal, a.radius, b.radius, (0, 0))


def _as_set(shapes: CapsuleSet | HumanModel) -> CapsuleSet:
    return shapes.capsules if isinstance(shapes, HumanModel) else shapes


def distance_matrix(robot: CapsuleSet, human: CapsuleSet | HumanModel) -> FloatArray:
    """Signed distances of every (robot capsule, human capsule) pair."""
    other = _as_set(human)
    if len(robot) == 0 or len(other) == 0:
        raise EmptyCapsuleSetError("distance query needs at least one capsule on each side")
    return gjk.pairwise_distances(robot.p0, robot.p1, robot.radii, other.p0, other.p1, other.radii)


def _pair_result(robot: CapsuleSet, other: CapsuleSet, i: int, j: int) -> DistanceResult:
    lam, core_a, core_b, normal, _ = gjk.capsule_pair(
        robot.p0[i], robot.p1[i], robot.radii[i], other.p0[j], other.p1[j], other.radii[j]
    )
    return _result(lam, core_a, core_b, normal, robot.radii[i], other.radii[j], (i, j))


def min_distance(robot: CapsuleSet, human: CapsuleSet | HumanModel) -> DistanceResult:
    """Minimum signed distance over all robot/human capsule pairs.

    Ties are broken by the lowest (link index, capsule index).

    Raises:
        EmptyCapsuleSetError: If either side has no capsules.
    """
    other = _as_set(human)
    lam = distance_matrix(robot, other)
    i, j = gjk.argmin_pair(lam)
    return _pair_result(robot, other, int(i), int(j))


def link_distances(robot: CapsuleSet, human: CapsuleSet | HumanModel) -> list[DistanceResult]:
    """Closest human capsule for every robot capsule, in link order.

    Raises:
        EmptyCapsuleSetError: If either side has no capsules.
    """
    other = _as_set(human)
    lam = distance_matrix(robot, other)
    best = gjk.argmin_per_row(lam)
    return [_pair_result(robot, other, i, int(best[i])) for i in range(len(robot))]


def horizon_distances(
    origins: FloatArray, link_radii: FloatArray, track: HumanTrack
) -> HorizonDistances:
    """Closest (link, body capsule) pair of every step of a rolled-out chain.

    Args:
        origins: Chain origins per step, shape (K, n + 1, 3); link ``i`` spans
            origins ``i`` and ``i + 1``.
        link_radii: Link radii, shape (n,).
        track: Body capsules of the same K steps.

    Raises:
        EmptyCapsuleSetError: If the step counts differ or a side has no capsules.
    """
    origins = np.ascontiguousarray(origins, dtype=float)
    radii = np.ascontiguousarray(link_radii, dtype=float).reshape(-1)
    if origins.ndim != 3 or origins.shape[1] != radii.size + 1:
        raise EmptyCapsuleSetError(
            f"origins of shape {origins.shape} do not match {radii.size} link radii"
        )
    if origins.shape[0] != len(track):
        raise EmptyCapsuleSetError(
            f"{origins.shape[0]} chain steps against {len(track)} body frames"
        )
    if radii.size == 0 or track.radii.shape[1] == 0:
        raise EmptyCapsuleSetError("distance query needs at least one capsule on each side")
    lam, link, capsule, cores, normals = gjk.horizon_closest_pairs(
        origins, radii, track.p0, track.p1, track.radii
    )
    return HorizonDistances(
        lam=lam, link=link, capsule=capsule, robot_core=cores, normal=normals
    )


def segment_parameter(point: FloatArray, a: FloatArray, b: FloatArray) -> float:
    """Parameter in ``[0, 1]`` of the point of segment ``ab`` closest to ``point``."""
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-24:
        return 0.0
    return min(1.0, max(0.0, float((point - a) @ ab) / denom))


def batch_capsule_distances(a: CapsuleSet, b: CapsuleSet) -> tuple[FloatArray, np.ndarray]:
    """Elementwise signed distances of ``(a[k], b[k])`` and the GJK iteration counts."""
    if len(a) != len(b):
        raise EmptyCapsuleSetError(f"capsule sets differ in size: {len(a)} vs {len(b)}")
    return gjk.batch_capsule_distances(a.p0, a.p1, a.radii, b.p0, b.p1, b.radii)


def _project_to_segment(p: FloatArray, a: FloatArray, b: FloatArray) -> FloatArray:
    return a + segment_parameter(p, a, b) * (b - a)


def segment_segment_reference(
    p0: FloatArray, p1: FloatArray, q0: FloatArray, q1: FloatArray
) -> tuple[FloatArray, FloatArray, float]:
    """Closed-form closest points between two segments.

    Checks the interior stationary point of the squared distance plus the four
    edge cases obtained by fixing one segment parameter; used as the independent
    reference for the GJK kernel.

    Returns:
        Tuple ``(point_on_p, point_on_q, distance)``.
    """
    u = p1 - p0
    v = q1 - q0
    w0 = p0 - q0
    a, b, c = float(u @ u), float(u @ v), float(v @ v)
    d, e = float(u @ w0), float(v @ w0)
    denom = a * c - b * b

    candidates: list[tuple[FloatArray, FloatArray]] = []
    if denom > 1e-12 * max(a * c, 1e-300):
        s = (b * e - c * d) / denom
        t = (a * e - b * d) / denom
        if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
            candidates.append((p0 + s * u, q0 + t * v))
    candidates.append((_project_to_segment(q0, p0, p1), q0))
    candidates.append((_project_to_segment(q1, p0, p1), q1))
    candidates.append((p0, _project_to_segment(p0, q0, q1)))
    candidates.append((p1, _project_to_segment(p1, q0, q1)))

    best = min(candidates, key=lambda pq: float((pq[0] - pq[1]) @ (pq[0] - pq[1])))
    return best[0], best[1], float(np.linalg.norm(best[0] - best[1]))


def capsule_distance_reference(a: Capsule, b: Capsule) -> float:
    """Closed-form signed capsule distance."""
    _, _, dist = segment_segment_reference(a.p0, a.p1, b.p0, b.p1)
    return dist - a.radius - b.radius
