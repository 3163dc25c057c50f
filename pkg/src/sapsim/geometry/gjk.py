"""GJK distance kernels for capsules.

The Minkowski difference of two segments is a planar parallelogram, so the simplex
never needs more than three points. Closest points on the simplex follow the
Voronoi-region tests of Ericson's "Real-Time Collision Detection" with a fallback to
the edges when the triangle is degenerate (parallel segments).

All kernels are compiled with numba and operate on plain float arrays.
"""

from __future__ import annotations

import math

import numba
import numpy as np

GJK_MAX_ITERATIONS = 64
GJK_REL_TOL = 1e-14
GJK_ABS_TOL = 1e-24
DEGENERATE_TOL = 1e-20
TIE_TOL = 1e-12


@numba.njit(cache=True)
def _support(p0: np.ndarray, p1: np.ndarray, direction: np.ndarray) -> int:
    """Index (0 or 1) of the segment endpoint furthest along ``direction``."""
    if np.dot(p1 - p0, direction) > 0.0:
        return 1
    return 0


@numba.njit(cache=True)
def _line_weights(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Barycentric weights of the point of segment ab closest to the origin."""
    ab = b - a
    denom = np.dot(ab, ab)
    if denom <= DEGENERATE_TOL * max(np.dot(a, a), 1.0):
        if np.dot(a, a) <= np.dot(b, b):
            return 1.0, 0.0
        return 0.0, 1.0
    t = -np.dot(a, ab) / denom
    if t <= 0.0:
        return 1.0, 0.0
    if t >= 1.0:
        return 0.0, 1.0
    return 1.0 - t, t


@numba.njit(cache=True)
def _triangle_weights(
    a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> tuple[float, float, float]:
    """Barycentric weights of the point of triangle abc closest to the origin."""
    ab = b - a
    ac = c - a
    bc = c - b
    n = np.cross(ab, ac)
    scale = max(np.dot(ab, ab), np.dot(ac, ac), np.dot(bc, bc))
    if np.dot(n, n) <= DEGENERATE_TOL * scale * scale:
        # collinear, best edge wins
        u, v = _line_weights(a, b)
        p = u * a + v * b
        best = np.dot(p, p)
        wa, wb, wc = u, v, 0.0
        u, v = _line_weights(a, c)
        p = u * a + v * c
        if np.dot(p, p) < best:
            best = np.dot(p, p)
            wa, wb, wc = u, 0.0, v
        u, v = _line_weights(b, c)
        p = u * b + v * c
        if np.dot(p, p) < best:
            wa, wb, wc = 0.0, u, v
        return wa, wb, wc

    d1 = -np.dot(ab, a)
    d2 = -np.dot(ac, a)
    if d1 <= 0.0 and d2 <= 0.0:
        return 1.0, 0.0, 0.0

    d3 = -np.dot(ab, b)
    d4 = -np.dot(ac, b)
    if d3 >= 0.0 and d4 <= d3:
        return 0.0, 1.0, 0.0

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return 1.0 - v, v, 0.0

    d5 = -np.dot(ab, c)
    d6 = -np.dot(ac, c)
    if d6 >= 0.0 and d5 <= d6:
        return 0.0, 0.0, 1.0

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return 1.0 - w, 0.0, w

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return 0.0, 1.0 - w, w

    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return 1.0 - v - w, v, w


@numba.njit(cache=True)
def segment_distance(
    a0: np.ndarray, a1: np.ndarray, b0: np.ndarray, b1: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, int]:
    """Minimum distance between segments ``[a0, a1]`` and ``[b0, b1]`` by GJK.

    Returns:
        Tuple ``(distance, point_a, point_b, iterations)`` with the closest points on
        each segment.
    """
    ys = np.empty((3, 3))
    ps = np.empty((3, 3))
    qs = np.empty((3, 3))
    weights = np.zeros(3)
    ends_a = np.empty((2, 3))
    ends_b = np.empty((2, 3))
    ends_a[0] = a0
    ends_a[1] = a1
    ends_b[0] = b0
    ends_b[1] = b1

    ys[0] = a0 - b0
    ps[0] = a0
    qs[0] = b0
    weights[0] = 1.0
    count = 1
    v = ys[0].copy()
    vv = np.dot(v, v)
    iterations = 0

    while iterations < GJK_MAX_ITERATIONS and vv > GJK_ABS_TOL:
        iterations += 1
        ia = _support(a0, a1, -v)
        ib = _support(b0, b1, v)
        y = ends_a[ia] - ends_b[ib]
        if vv - np.dot(v, y) <= GJK_REL_TOL * vv:
            break
        duplicate = False
        for k in range(count):
            if ys[k, 0] == y[0] and ys[k, 1] == y[1] and ys[k, 2] == y[2]:
                duplicate = True
        # a planar Minkowski set cannot improve on a face-interior triangle point
        if duplicate or count == 3:
            break

        ys[count] = y
        ps[count] = ends_a[ia]
        qs[count] = ends_b[ib]
        count += 1

        if count == 2:
            w0, w1 = _line_weights(ys[0], ys[1])
            new_w = np.array([w0, w1, 0.0])
        else:
            w0, w1, w2 = _triangle_weights(ys[0], ys[1], ys[2])
            new_w = np.array([w0, w1, w2])

        new_v = np.zeros(3)
        for k in range(count):
            new_v += new_w[k] * ys[k]
        new_vv = np.dot(new_v, new_v)
        if new_vv >= vv:
            count -= 1
            break

        # drop vertices that no longer support the closest point
        kept = 0
        for k in range(count):
            if new_w[k] > 0.0:
                ys[kept] = ys[k]
                ps[kept] = ps[k]
                qs[kept] = qs[k]
                weights[kept] = new_w[k]
                kept += 1
        count = kept
        for k in range(count, 3):
            weights[k] = 0.0
        v = new_v
        vv = new_vv

    point_a = np.zeros(3)
    point_b = np.zeros(3)
    total = 0.0
    for k in range(count):
        total += weights[k]
    for k in range(count):
        point_a += (weights[k] / total) * ps[k]
        point_b += (weights[k] / total) * qs[k]
    return math.sqrt(vv), point_a, point_b, iterations


@numba.njit(cache=True)
def _precedes(
    a0: np.ndarray, a1: np.ndarray, ra: float, b0: np.ndarray, b1: np.ndarray, rb: float
) -> bool:
    """Lexicographic order on ``(p0, p1, radius)`` used to canonicalise pairs."""
    for k in range(3):
        if a0[k] != b0[k]:
            return a0[k] < b0[k]
    for k in range(3):
        if a1[k] != b1[k]:
            return a1[k] < b1[k]
    return ra <= rb


@numba.njit(cache=True)
def capsule_pair(
    a0: np.ndarray,
    a1: np.ndarray,
    ra: float,
    b0: np.ndarray,
    b1: np.ndarray,
    rb: float,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, int]:
    """Signed capsule distance and core closest points.

    The pair is evaluated in a canonical order so the result is exactly symmetric.

    Returns:
        Tuple ``(lam, core_a, core_b, normal, iterations)`` where ``normal`` is the
        unit vector from ``core_a`` to ``core_b``.
    """
    if _precedes(a0, a1, ra, b0, b1, rb):
        dist, core_a, core_b, iters = segment_distance(a0, a1, b0, b1)
    else:
        dist, core_b, core_a, iters = segment_distance(b0, b1, a0, a1)
    normal = np.zeros(3)
    if dist > 0.0:
        normal = (core_b - core_a) / dist
    else:
        axis = a1 - a0
        if abs(axis[0]) <= abs(axis[1]) and abs(axis[0]) <= abs(axis[2]):
            normal[0] = 1.0
        elif abs(axis[1]) <= abs(axis[2]):
            normal[1] = 1.0
        else:
            normal[2] = 1.0
        normal = normal - np.dot(normal, axis) / max(np.dot(axis, axis), 1e-300) * axis
        normal = normal / math.sqrt(np.dot(normal, normal))
    return dist - ra - rb, core_a, core_b, normal, iters


@numba.njit(cache=True)
def batch_capsule_distances(
    a0: np.ndarray,
    a1: np.ndarray,
    ra: np.ndarray,
    b0: np.ndarray,
    b1: np.ndarray,
    rb: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise signed distances of capsule pairs ``(a[k], b[k])``.

    Returns:
        Tuple of the distances (K,) and GJK iteration counts (K,).
    """
    count = a0.shape[0]
    lam = np.empty(count)
    iters = np.empty(count, dtype=np.int64)
    for k in range(count):
        value, _, _, _, it = capsule_pair(a0[k], a1[k], ra[k], b0[k], b1[k], rb[k])
        lam[k] = value
        iters[k] = it
    return lam, iters


@numba.njit(cache=True)
def pairwise_distances(
    a0: np.ndarray,
    a1: np.ndarray,
    ra: np.ndarray,
    b0: np.ndarray,
    b1: np.ndarray,
    rb: np.ndarray,
) -> np.ndarray:
    """Signed distances of every pair ``(a[i], b[j])``, shape (A, B)."""
    out = np.empty((a0.shape[0], b0.shape[0]))
    for i in range(a0.shape[0]):
        for j in range(b0.shape[0]):
            value, _, _, _, _ = capsule_pair(a0[i], a1[i], ra[i], b0[j], b1[j], rb[j])
            out[i, j] = value
    return out


@numba.njit(cache=True)
def argmin_pair(lam: np.ndarray) -> tuple[int, int]:
    """Minimising ``(i, j)`` of a distance matrix; the lowest indices win ties."""
    best_i = 0
    best_j = 0
    best = lam[0, 0]
    for i in range(lam.shape[0]):
        for j in range(lam.shape[1]):
            if lam[i, j] < best - TIE_TOL:
                best = lam[i, j]
                best_i = i
                best_j = j
    return best_i, best_j


@numba.njit(cache=True)
def argmin_per_row(lam: np.ndarray) -> np.ndarray:
    """Minimising column of every row; the lowest index wins ties."""
    out = np.zeros(lam.shape[0], dtype=np.int64)
    for i in range(lam.shape[0]):
        best = lam[i, 0]
        for j in range(1, lam.shape[1]):
            if lam[i, j] < best - TIE_TOL:
                best = lam[i, j]
                out[i] = j
    return out


@numba.njit(cache=True)
def _sphere_bound(
    a0: np.ndarray, a1: np.ndarray, ra: float, b0: np.ndarray, b1: np.ndarray, rb: float
) -> float:
    """Lower bound on the signed capsule distance from the bounding spheres."""
    centre = 0.5 * (a0 + a1) - 0.5 * (b0 + b1)
    reach = 0.5 * math.sqrt(np.dot(a1 - a0, a1 - a0)) + 0.5 * math.sqrt(np.dot(b1 - b0, b1 - b0))
    return math.sqrt(np.dot(centre, centre)) - reach - ra - rb


@numba.njit(cache=True)
def horizon_closest_pairs(
    origins: np.ndarray,
    radii: np.ndarray,
    h0: np.ndarray,
    h1: np.ndarray,
    hr: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Closest (link, body capsule) pair at every step of a horizon.

    Link ``i`` of step ``k`` spans ``origins[k, i]`` to ``origins[k, i + 1]``. Pairs
    whose bounding spheres cannot beat the running minimum skip the GJK call; the
    lowest ``(link, capsule)`` wins ties as in :func:`argmin_pair`.

    Args:
        origins: Chain origins per step, shape (K, n + 1, 3).
        radii: Link radii, shape (n,).
        h0: First body capsule endpoints per step, shape (K, H, 3).
        h1: Second body capsule endpoints per step, shape (K, H, 3).
        hr: Body capsule radii per step, shape (K, H).

    Returns:
        Tuple ``(lam, link, capsule, robot_core, normal)`` with shapes (K,), (K,),
        (K,), (K, 3) and (K, 3).
    """
    count = origins.shape[0]
    links = radii.shape[0]
    bodies = h0.shape[1]
    lam = np.empty(count)
    link = np.zeros(count, dtype=np.int64)
    capsule = np.zeros(count, dtype=np.int64)
    cores = np.zeros((count, 3))
    normals = np.zeros((count, 3))
    for k in range(count):
        best = np.inf
        for i in range(links):
            a0 = origins[k, i]
            a1 = origins[k, i + 1]
            for j in range(bodies):
                if _sphere_bound(a0, a1, radii[i], h0[k, j], h1[k, j], hr[k, j]) >= best - TIE_TOL:
                    continue
                value, core_a, _, normal, _ = capsule_pair(
                    a0, a1, radii[i], h0[k, j], h1[k, j], hr[k, j]
                )
                if value < best - TIE_TOL:
                    best = value
                    link[k] = i
                    capsule[k] = j
                    cores[k] = core_a
                    normals[k] = normal
        lam[k] = best
    return lam, link, capsule, cores, normals
