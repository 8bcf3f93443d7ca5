"""Simple-polygon triangulation by ear clipping.

Predicates run on planar chart coordinates: the points themselves in the
euclidean plane and their Klein projections in the hyperbolic plane, where
geodesics are straight chords.  Ear quality is judged intrinsically.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Geometry, GeometryError, TriangleSides, chart, distance, signed_angle, triangle_angles

_EPS = np.finfo(float).eps / 2
_ORIENT_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


class PolygonError(GeometryError):
    pass


class NotSimple(PolygonError):
    pass


class EarSearchFailed(PolygonError):
    pass


def orient2d(a, b, c) -> int:
    """Sign of the turn ``a -> b -> c``: +1 left, -1 right, 0 collinear.

    A floating point filter decides the easy cases; the rest are settled
    exactly with rationals.
    """
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    bound = _ORIENT_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    ax, ay, bx, by, cx, cy = (Fraction(float(x)) for x in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


def _on_segment(p, a, b) -> bool:
    # p collinear with a, b assumed
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_intersect(a, b, c, d) -> bool:
    """Closed segments ``ab`` and ``cd`` share at least one point."""
    o1, o2 = orient2d(a, b, c), orient2d(a, b, d)
    o3, o4 = orient2d(c, d, a), orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _on_segment(c, a, b):
        return True
    if o2 == 0 and _on_segment(d, a, b):
        return True
    if o3 == 0 and _on_segment(a, c, d):
        return True
    if o4 == 0 and _on_segment(b, c, d):
        return True
    return False


def _in_closed_triangle(p, a, b, c) -> bool:
    return orient2d(a, b, p) >= 0 and orient2d(b, c, p) >= 0 and orient2d(c, a, p) >= 0


def signed_shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def check_simple(planar: np.ndarray) -> None:
    n = len(planar)
    if n < 3:
        raise NotSimple(f"polygon needs at least 3 vertices, got {n}")
    for i in range(n):
        a, b = planar[i], planar[(i + 1) % n]
        if a[0] == b[0] and a[1] == b[1]:
            raise NotSimple(f"vertices {i} and {(i + 1) % n} coincide")
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            if segments_intersect(a, b, planar[j], planar[(j + 1) % n]):
                raise NotSimple(f"edges {i} and {j} intersect")
    if signed_shoelace(planar) <= 0.0:
        raise NotSimple("polygon is not positively oriented")


def ear_clip(
    geometry: Geometry,
    points: Sequence[np.ndarray],
    labels: Sequence[int] | None = None,
) -> tuple[list[tuple[int, int, int]], list[tuple[int, int]]]:
    """Triangulate a simple, counterclockwise polygon.

    Returns ``(triangles, diagonals)``, both as indices into ``points``;
    triangles are counterclockwise.  Among the valid ears the one whose
    triangle has the largest minimum angle is clipped.  With ``labels``,
    ears whose new diagonal would join two equal labels are used only as
    a last resort.
    """
    planar = np.array([chart(geometry, p) for p in points], dtype=float)
    check_simple(planar)
    n = len(planar)
    remaining = list(range(n))
    triangles: list[tuple[int, int, int]] = []
    diagonals: list[tuple[int, int]] = []

    def quality(i: int, j: int, k: int) -> float:
        sides = TriangleSides(distance(geometry, points[j], points[k]),
                              distance(geometry, points[k], points[i]),
                              distance(geometry, points[i], points[j]))
        try:
            return min(triangle_angles(geometry, sides))
        except GeometryError:
            return -1.0

    while len(remaining) > 3:
        m = len(remaining)
        best = None
        for pos in range(m):
            i, j, k = remaining[pos - 1], remaining[pos], remaining[(pos + 1) % m]
            if orient2d(planar[i], planar[j], planar[k]) <= 0:
                continue
            blocked = False
            for other in remaining:
                if other in (i, j, k):
                    continue
                if _in_closed_triangle(planar[other], planar[i], planar[j], planar[k]):
                    blocked = True
                    break
            if blocked:
                continue
            q = quality(i, j, k)
            if q <= 0.0:
                continue
            loop = labels is not None and labels[i] == labels[k]
            key = (not loop, q)
            if best is None or key > best[0]:
                best = (key, pos)
        if best is None:
            raise EarSearchFailed(f"no ear among {m} remaining vertices")
        pos = best[1]
        i, j, k = remaining[pos - 1], remaining[pos], remaining[(pos + 1) % m]
        triangles.append((i, j, k))
        diagonals.append((i, k))
        remaining.pop(pos)
    triangles.append(tuple(remaining))
    return triangles, diagonals


def triangulate_polygon(geometry: Geometry, polygon: Sequence[np.ndarray]) -> list[tuple[int, int]]:
    """Diagonals (index pairs) of an ear-clipping triangulation of ``polygon``."""
    return ear_clip(geometry, polygon)[1]


def polygon_area(geometry: Geometry, points: Sequence[np.ndarray]) -> float:
    """Area of a simple counterclockwise polygon.

    Shoelace formula in the plane; in the hyperbolic plane the angle
    defect ``(n - 2) pi - sum of interior angles``.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    n = len(pts)
    if not geometry.is_hyperbolic:
        return signed_shoelace(np.array(pts))
    interior = math.fsum(signed_angle(geometry, pts[i], pts[(i + 1) % n], pts[i - 1]) for i in range(n))
    return (n - 2) * math.pi - interior
