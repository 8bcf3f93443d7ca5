"""Trigonometry of the euclidean plane and the hyperbolic plane.

Every routine takes a :class:`Geometry` selector as its first argument and
works for both model spaces.  Triangles are given by their side lengths;
points (needed only when developing triangles into the model plane) are
numpy arrays, ``(x, y)`` in the euclidean plane and ``(x0, x1, x2)`` on the
upper sheet of the hyperboloid ``-x0^2 + x1^2 + x2^2 = -1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: relative slack below which a triangle is considered degenerate
TRIANGLE_REL_TOL = 1e-12
#: arguments of arcosh in [1 - ARCOSH_CLAMP, 1] are rounded up to 1
ARCOSH_CLAMP = 1e-12
#: placement base and hyperboloid membership tolerance
POINT_TOL = 1e-9

_LN2 = math.log(2.0)


class GeometryError(ValueError):
    """Base class for errors raised by the geometry kernel."""


class InvalidTriangle(GeometryError):
    """Side lengths that violate positivity or the strict triangle inequality."""


class DegeneratePoints(GeometryError):
    """Two of the points passed to a point routine coincide."""


class BaseMismatch(GeometryError):
    """The base points of a placement are not at the requested distance."""


class NumericalInvariantError(AssertionError):
    """A statement that holds mathematically failed in floating point."""


class Kind(enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class Geometry:
    """Model space selector: the euclidean plane (k = 0) or the hyperbolic plane (k = -1)."""

    kind: Kind

    @property
    def k(self) -> int:
        return 0 if self.kind is Kind.EUCLIDEAN else -1

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind is Kind.HYPERBOLIC

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def from_name(cls, name: str) -> "Geometry":
        try:
            return cls(Kind(name.strip().lower()))
        except ValueError:
            raise GeometryError(f"unknown geometry {name!r}") from None

    def __str__(self) -> str:
        return self.kind.value


EUCLIDEAN = Geometry(Kind.EUCLIDEAN)
HYPERBOLIC = Geometry(Kind.HYPERBOLIC)


class TriangleSides(NamedTuple):
    a: float
    b: float
    c: float


class Side(enum.Enum):
    LEFT = 1
    RIGHT = -1


def triangle_slack(a: float, b: float, c: float) -> float:
    """Relative slack of the weakest triangle inequality.

    Positive iff the sides form a non-degenerate triangle under the
    module tolerance.  The value is ``(b + c) - a`` scaled by ``b + c`` for
    the longest side ``a``, minus the tolerance.
    """
    x, y, z = sorted((a, b, c))
    if x <= 0.0:
        return -math.inf
    return (x + y - z) / (x + y) - TRIANGLE_REL_TOL


def check_triangle(a: float, b: float, c: float) -> TriangleSides:
    if not (a > 0.0 and b > 0.0 and c > 0.0) or not all(map(math.isfinite, (a, b, c))):
        raise InvalidTriangle(f"side lengths must be positive and finite, got {(a, b, c)}")
    if triangle_slack(a, b, c) <= 0.0:
        raise InvalidTriangle(f"sides {(a, b, c)} violate the triangle inequality")
    return TriangleSides(float(a), float(b), float(c))


def arcosh(x: float) -> float:
    """``arcosh`` with arguments in ``[1 - 1e-12, 1]`` clamped to 1."""
    if x < 1.0:
        if x < 1.0 - ARCOSH_CLAMP:
            raise GeometryError(f"arcosh argument {x!r} below 1")
        return 0.0
    return math.acosh(x)


def _log_sinh(x):
    # log(sinh(x)) for x > 0 without overflow
    x = np.asarray(x, dtype=float)
    small = np.minimum(x, 20.0)
    return np.where(x > 20.0, x - _LN2 + np.log1p(-np.exp(-2.0 * x)), np.log(np.sinh(small)))


def half_angles(kind: Kind, a, b, c):
    """Angle opposite ``a``; array version without validity checks.

    Uses the half-angle form of the law of cosines,
    ``tan(alpha/2)^2 = f(s-b) f(s-c) / (f(s) f(s-a))`` with ``f = id`` in the
    euclidean plane and ``f = sinh`` in the hyperbolic plane.  This is well
    conditioned for angles near 0 and pi and never overflows.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    sa = 0.5 * (b + c - a)
    sb = 0.5 * (a + c - b)
    sc = 0.5 * (a + b - c)
    s = 0.5 * (a + b + c)
    if kind is Kind.EUCLIDEAN:
        return 2.0 * np.arctan(np.sqrt((sb * sc) / (s * sa)))
    log_t2 = _log_sinh(sb) + _log_sinh(sc) - _log_sinh(s) - _log_sinh(sa)
    return 2.0 * np.arctan(np.exp(0.5 * log_t2))


def angle_opposite(geometry: Geometry, sides: TriangleSides) -> float:
    """Angle in ``(0, pi)`` opposite the first side of a valid triangle."""
    a, b, c = check_triangle(*sides)
    return float(half_angles(geometry.kind, a, b, c))


def triangle_angles(geometry: Geometry, sides: TriangleSides) -> tuple[float, float, float]:
    """Angles opposite ``a``, ``b`` and ``c`` respectively."""
    a, b, c = check_triangle(*sides)
    out = half_angles(geometry.kind, np.array([a, b, c]), np.array([b, c, a]), np.array([c, a, b]))
    return float(out[0]), float(out[1]), float(out[2])


def heron_area(a, b, c):
    """Numerically stable Heron formula (array friendly, no checks)."""
    abc = np.sort(np.stack(np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float))), axis=0)
    z, y, x = abc[0], abc[1], abc[2]  # x >= y >= z
    prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def triangle_area(geometry: Geometry, sides: TriangleSides) -> float:
    """Area of a valid triangle: Heron in the plane, angle defect in H^2."""
    a, b, c = check_triangle(*sides)
    if geometry.kind is Kind.EUCLIDEAN:
        return float(heron_area(a, b, c))
    return math.pi - sum(triangle_angles(geometry, TriangleSides(a, b, c)))


def deform_lengths(kind: Kind, lengths, t: float):
    """Array version of :func:`deform_length`."""
    lengths = np.asarray(lengths, dtype=float)
    if t == 0.0:
        return lengths.copy()
    if kind is Kind.EUCLIDEAN:
        return np.sqrt(lengths * lengths + t)
    # arcosh(e^t cosh l) = t + log1p(2 sinh^2(l/2) + sqrt(sinh^2 l - expm1(-2t)))
    sh = np.sinh(0.5 * lengths)
    return t + np.log1p(2.0 * sh * sh + np.sqrt(np.sinh(lengths) ** 2 - math.expm1(-2.0 * t)))


def deform_length(geometry: Geometry, length: float, t: float) -> float:
    """Length of an edge of the star after the elongation with parameter ``t``.

    Euclidean: ``sqrt(l^2 + t)``.  Hyperbolic: ``arcosh(e^t cosh l)``,
    evaluated in a form that neither overflows for large ``t`` nor loses
    precision for short edges.
    """
    if not length > 0.0:
        raise GeometryError(f"length must be positive, got {length!r}")
    if not t >= 0.0:
        raise GeometryError(f"deformation parameter must be >= 0, got {t!r}")
    return float(deform_lengths(geometry.kind, length, t))


def deformed_triangle(geometry: Geometry, sides: TriangleSides, t: float) -> TriangleSides:
    """Triangle with side ``a`` kept and sides ``b``, ``c`` elongated by ``t``.

    ``b`` and ``c`` are the sides incident to the vertex being deformed.
    """
    a, b, c = check_triangle(*sides)
    out = TriangleSides(a, deform_length(geometry, b, t), deform_length(geometry, c, t))
    try:
        return check_triangle(*out)
    except InvalidTriangle as exc:
        raise NumericalInvariantError(f"deformed triangle {out} from {sides} at t={t} is invalid") from exc


# -- model points ---------------------------------------------------------

def minkowski(x: np.ndarray, y: np.ndarray) -> float:
    return float(-x[0] * y[0] + x[1] * y[1] + x[2] * y[2])


def _lorentz_cross(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Minkowski-orthogonal to x and y, oriented so that (p, u, cross) is positive
    v = np.cross(x, y)
    return np.array([-v[0], v[1], v[2]])


def origin(geometry: Geometry) -> np.ndarray:
    if geometry.is_hyperbolic:
        return np.array([1.0, 0.0, 0.0])
    return np.array([0.0, 0.0])


def point_polar(geometry: Geometry, r: float, phi: float) -> np.ndarray:
    """Point at distance ``r`` from the origin in direction ``phi``."""
    if geometry.is_hyperbolic:
        return np.array([math.cosh(r), math.sinh(r) * math.cos(phi), math.sinh(r) * math.sin(phi)])
    return np.array([r * math.cos(phi), r * math.sin(phi)])


def hyperboloid_point(x1: float, x2: float) -> np.ndarray:
    return np.array([math.sqrt(1.0 + x1 * x1 + x2 * x2), x1, x2])


def check_model_point(geometry: Geometry, p: np.ndarray) -> None:
    p = np.asarray(p, dtype=float)
    if geometry.is_hyperbolic:
        if p.shape != (3,) or abs(minkowski(p, p) + 1.0) > POINT_TOL or p[0] < 1.0 - POINT_TOL:
            raise GeometryError(f"{p} is not on the upper hyperboloid sheet")
    elif p.shape != (2,):
        raise GeometryError(f"{p} is not a planar point")


def to_klein(p: np.ndarray) -> np.ndarray:
    """Projective (Klein) coordinates of a hyperboloid point."""
    return np.array([p[1] / p[0], p[2] / p[0]])


def from_klein(k: np.ndarray) -> np.ndarray:
    r2 = float(k[0] * k[0] + k[1] * k[1])
    if r2 >= 1.0:
        raise GeometryError(f"{k} lies outside the Klein disk")
    x0 = 1.0 / math.sqrt(1.0 - r2)
    return np.array([x0, k[0] * x0, k[1] * x0])


def chart(geometry: Geometry, p: np.ndarray) -> np.ndarray:
    """Planar coordinates in which geodesics are straight lines."""
    return to_klein(p) if geometry.is_hyperbolic else np.asarray(p, dtype=float)


def distance(geometry: Geometry, p: np.ndarray, q: np.ndarray) -> float:
    if not geometry.is_hyperbolic:
        return float(math.hypot(q[0] - p[0], q[1] - p[1]))
    d = p - q
    chord2 = max(minkowski(d, d), 0.0)  # = 4 sinh^2(dist/2)
    return 2.0 * math.asinh(0.5 * math.sqrt(chord2))


def _unit_tangent(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    u = q + minkowski(q, p) * p
    n2 = minkowski(u, u)
    if n2 <= 0.0:
        raise DegeneratePoints("coincident points")
    return u / math.sqrt(n2)


def hyperboloid_angle_oracle(p: np.ndarray, q: np.ndarray, r: np.ndarray, tol: float = 1e-12) -> float:
    """Angle at ``p`` between the geodesics ``pq`` and ``pr``, from the embedding.

    The directions toward ``q`` and ``r`` are projected Minkowski-orthogonally
    onto the tangent plane at ``p``; the angle between the projections is
    measured with ``atan2`` so that it stays accurate near 0 and pi.
    """
    p, q, r = (np.asarray(x, dtype=float) for x in (p, q, r))
    for x, y, label in ((p, q, "p, q"), (p, r, "p, r"), (q, r, "q, r")):
        if distance(HYPERBOLIC, x, y) <= tol:
            raise DegeneratePoints(f"points {label} coincide")
    u = _unit_tangent(p, q)
    w = _unit_tangent(p, r)
    n = _lorentz_cross(p, u)
    return math.atan2(abs(minkowski(n, w)), minkowski(u, w))


def signed_angle(geometry: Geometry, p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
    """Counterclockwise angle in ``[0, 2pi)`` at ``p`` from direction ``pq`` to ``pr``."""
    if geometry.is_hyperbolic:
        u = _unit_tangent(p, q)
        w = _unit_tangent(p, r)
        ang = math.atan2(minkowski(_lorentz_cross(p, u), w), minkowski(u, w))
    else:
        u = q - p
        w = r - p
        ang = math.atan2(u[0] * w[1] - u[1] * w[0], u[0] * w[0] + u[1] * w[1])
    return ang % (2.0 * math.pi)


def place_triangle(
    geometry: Geometry,
    sides: TriangleSides,
    base_p: np.ndarray,
    base_q: np.ndarray,
    side: Side = Side.LEFT,
) -> np.ndarray:
    """Third vertex of a triangle erected on the oriented base ``base_p -> base_q``.

    ``sides.c`` is the base length, ``sides.b`` the distance of the new
    vertex to ``base_p`` and ``sides.a`` its distance to ``base_q``.
    """
    a, b, c = check_triangle(*sides)
    base_p = np.asarray(base_p, dtype=float)
    base_q = np.asarray(base_q, dtype=float)
    d = distance(geometry, base_p, base_q)
    if abs(d - c) > POINT_TOL * max(1.0, c):
        raise BaseMismatch(f"base points are {d!r} apart, expected {c!r}")
    alpha = float(half_angles(geometry.kind, a, b, c))  # angle at base_p
    sgn = float(side.value)
    ca, sa = math.cos(alpha), sgn * math.sin(alpha)
    if geometry.is_hyperbolic:
        u = _unit_tangent(base_p, base_q)
        n = _lorentz_cross(base_p, u)
        direction = ca * u + sa * n
        out = math.cosh(b) * base_p + math.sinh(b) * direction
        # renormalise onto the sheet
        out[0] = math.sqrt(1.0 + out[1] * out[1] + out[2] * out[2])
        return out
    u = (base_q - base_p) / d
    n = np.array([-u[1], u[0]])
    return base_p + b * (ca * u + sa * n)
