"""Elimination of interior cone points.

One step picks a singular interior vertex ``p``, elongates every edge at
``p`` with :func:`~coneflat.geometry.deform_length` until the first moment
``t0`` at which the cone angle of ``p`` or of an interior neighbour reaches
``2 pi``, then removes every flat interior vertex by developing its star
into the model plane and re-triangulating the link polygon.  Boundary edges
are never touched, so the perimeter is preserved, and each elongation
strictly increases the area.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    NumericalInvariantError,
    Side,
    TriangleSides,
    deform_lengths,
    distance,
    half_angles,
    origin,
    place_triangle,
    point_polar,
    triangle_slack,
)
from .mesh import FLAT_TOL, TWO_PI, ConeMesh, Corner, check_negative_curvature, is_disk, validate
from .polygon import ear_clip, polygon_area

logger = logging.getLogger(__name__)

#: accuracy of the event angle at t0
EVENT_ANGLE_TOL = 1e-10
#: relative width of the final bisection bracket
BISECTION_REL_TOL = 1e-12
#: bracketing gives up beyond this parameter
MAX_T = 2.0 ** 60
VERIFY_SAMPLES = 64
MAX_REBRACKETS = 32
CLOSURE_TOL = 1e-7


class FlattenError(RuntimeError):
    pass


class NotSingular(FlattenError):
    pass


class NoBracket(FlattenError):
    pass


class NotFlat(FlattenError):
    pass


class ClosureFailure(FlattenError):
    pass


class NonDisk(FlattenError):
    pass


class UnsupportedStar(FlattenError):
    """The star of the vertex contains a loop edge at the vertex itself."""


class PreconditionError(FlattenError):
    pass


@dataclass(frozen=True)
class DeformationStep:
    """One elimination step.

    Vertex ids refer to the mesh at the start of the step; ``removed`` lists
    the flat vertices deleted at the end of the step, in removal order and
    in the same numbering.
    """

    chosen_vertex: int
    t0: float
    flattened_vertex: int
    area_before: float
    area_after: float
    perimeter: float
    interior_singular_count_after: int
    removed: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "vertex": self.chosen_vertex,
            "t0": self.t0,
            "flattened": self.flattened_vertex,
            "area_before": self.area_before,
            "area_after": self.area_after,
            "perimeter": self.perimeter,
            "interior_singular_count_after": self.interior_singular_count_after,
            "removed": list(self.removed),
        }


@dataclass(frozen=True)
class SurgeryRecord:
    """Bookkeeping of one :func:`remove_flat_vertex` call."""

    vertex: int
    degree: int
    area_before: float
    area_after: float
    star_area: float
    polygon_area: float
    clipped_area: float


@dataclass
class FlattenResult:
    mesh: ConeMesh
    steps: list[DeformationStep]
    surgeries: list[SurgeryRecord] = field(default_factory=list)
    snapshots: list[ConeMesh] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (mesh, steps)
        return iter((self.mesh, self.steps))


# -- vertex selection --------------------------------------------------------

Policy = Callable[[ConeMesh, Sequence[int]], int]


def smallest_degree(mesh: ConeMesh, candidates: Sequence[int]) -> int:
    """Singular vertex with the fewest corners, ties broken by lowest id."""
    return min(candidates, key=lambda v: (len(mesh.vertex_corners[v]), v))


def lowest_id(mesh: ConeMesh, candidates: Sequence[int]) -> int:
    return min(candidates)


def largest_angle(mesh: ConeMesh, candidates: Sequence[int]) -> int:
    return max(candidates, key=lambda v: (float(mesh.vertex_angles[v]), -v))


POLICIES: dict[str, Policy] = {
    "min-degree": smallest_degree,
    "lowest-id": lowest_id,
    "max-angle": largest_angle,
}


# -- star deformation ----------------------------------------------------------

def _star_has_loop(mesh: ConeMesh, p: int) -> bool:
    for t, i in mesh.vertex_corners[p]:
        tv = mesh.tri_verts[t]
        if tv[(i + 1) % 3] == p or tv[(i + 2) % 3] == p:
            return True
    return False


def spoke_edges(mesh: ConeMesh, p: int) -> list[int]:
    """Edges incident to ``p``, sorted."""
    out = set()
    for t, i in mesh.vertex_corners[p]:
        out.add(mesh.tri_edges[t][i])
        out.add(mesh.tri_edges[t][(i + 2) % 3])
    return sorted(out)


def apply_star_deformation(mesh: ConeMesh, p: int, t: float) -> ConeMesh:
    """Mesh with every edge at the interior vertex ``p`` elongated by ``t``."""
    if mesh.is_boundary(p):
        raise PreconditionError(f"vertex {p} is on the boundary")
    if _star_has_loop(mesh, p):
        raise UnsupportedStar(f"star of vertex {p} contains a loop edge")
    if t < 0.0:
        raise PreconditionError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return mesh
    lengths = list(mesh.lengths)
    spokes = spoke_edges(mesh, p)
    for e, new in zip(spokes, deform_lengths(mesh.geometry.kind, [lengths[e] for e in spokes], t)):
        lengths[e] = float(new)
    out = mesh.with_lengths(lengths)
    for tri, _ in mesh.vertex_corners[p]:
        if triangle_slack(*out.side_lengths[tri]) <= 0.0:
            raise NumericalInvariantError(f"triangle {tri} degenerated at t={t}")
    return out


class _StarAngles:
    """Angles of ``p`` and its interior neighbours as functions of ``t``."""

    def __init__(self, mesh: ConeMesh, p: int):
        self.kind = mesh.geometry.kind
        corners = mesh.vertex_corners[p]
        self.tris = sorted({t for t, _ in corners})
        tv = np.asarray([mesh.tri_verts[t] for t in self.tris], dtype=int)
        self.sides = mesh.side_lengths[self.tris].copy()
        # side slot j runs from tv[:, j] to tv[:, j + 1]
        self.spoke = (tv == p) | (np.roll(tv, -1, axis=1) == p)
        self.monitored = [p] + sorted({int(v) for v in tv.ravel()
                                       if v != p and not mesh.is_boundary(int(v))})
        slot = {v: k for k, v in enumerate(self.monitored)}
        self.index = np.array([[slot.get(int(v), len(self.monitored)) for v in row] for row in tv])
        star_part = np.zeros(len(self.monitored) + 1)
        np.add.at(star_part, self.index.ravel(), mesh.corner_angles[self.tris].ravel())
        self.fixed = np.array([mesh.vertex_angles[v] for v in self.monitored]) - star_part[:-1]

    def excess(self, t: float) -> np.ndarray:
        """``angle(v, t) - 2 pi`` for every monitored vertex."""
        s = np.where(self.spoke, deform_lengths(self.kind, self.sides, t), self.sides)
        ang = half_angles(self.kind, s[:, [1, 2, 0]], s, s[:, [2, 0, 1]])
        total = np.zeros(len(self.monitored) + 1)
        np.add.at(total, self.index.ravel(), ang.ravel())
        return self.fixed + total[:-1] - TWO_PI


def find_t0(mesh: ConeMesh, p: int, flat_tol: float = FLAT_TOL) -> tuple[float, int]:
    """First ``t`` at which the angle at ``p`` or an interior neighbour hits ``2 pi``.

    Returns ``(t0, flattened_vertex)``.  The search doubles ``t`` from a
    small scale until the smallest monitored angle drops below ``2 pi``,
    bisects the bracket, and then re-checks ``[0, t0]`` on a uniform grid;
    an earlier dip found there shrinks the bracket and the bisection runs
    again.
    """
    if mesh.is_boundary(p):
        raise PreconditionError(f"vertex {p} is on the boundary")
    if _star_has_loop(mesh, p):
        raise UnsupportedStar(f"star of vertex {p} contains a loop edge")
    omega = float(mesh.vertex_angles[p])
    if omega <= TWO_PI + flat_tol:
        raise NotSingular(f"vertex {p} has angle {omega!r}, not above 2pi")
    star = _StarAngles(mesh, p)

    def g(t: float) -> float:
        return float(star.excess(t).min())

    if g(0.0) < -flat_tol:
        raise PreconditionError(f"a neighbour of {p} has positive curvature")

    spoke_len = star.sides[star.spoke]
    scale = float(np.min(spoke_len)) ** 2
    if mesh.geometry.is_hyperbolic:
        scale = min(scale, 1.0)
    t = 1e-6 * scale
    lo = 0.0
    while g(t) >= 0.0:
        lo = t
        t *= 2.0
        if t > MAX_T:
            raise NoBracket(f"angle at {p} stays above 2pi up to t={MAX_T:g}")
    hi = t

    for _ in range(MAX_REBRACKETS):
        lo, hi = _bisect(g, lo, hi)
        t0 = lo if abs(g(lo)) <= abs(g(hi)) else hi
        dip = None
        prev = 0.0
        for k in range(1, VERIFY_SAMPLES + 1):
            tau = t0 * k / (VERIFY_SAMPLES + 1)
            if g(tau) < -EVENT_ANGLE_TOL:
                dip = tau
                break
            prev = tau
        if dip is None:
            break
        logger.debug("earlier event below t=%g at vertex %d; re-bracketing", t0, p)
        lo, hi = prev, dip
    else:
        raise NoBracket(f"first-event search for vertex {p} did not settle")

    ex = star.excess(t0)
    flattened = star.monitored[int(np.argmin(np.abs(ex)))]
    if abs(float(ex.min())) > EVENT_ANGLE_TOL:
        raise NumericalInvariantError(f"event angle residual {float(ex.min())!r} at t0={t0!r}")
    return t0, flattened


def _bisect(g: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    # invariant: g(lo) >= 0 > g(hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= BISECTION_REL_TOL * hi and min(abs(g(lo)), abs(g(hi))) <= EVENT_ANGLE_TOL:
            break
        if g(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return lo, hi


# -- flat vertex surgery ---------------------------------------------------------

@dataclass(frozen=True)
class StarDevelopment:
    """Star of a flat vertex laid out in the model plane.

    ``points[k]`` is the far end of the ``k``-th spoke, counterclockwise;
    the polygon side from ``points[k]`` to ``points[k + 1]`` is the mesh edge
    ``link_edges[k]``.
    """

    center: np.ndarray
    points: list[np.ndarray]
    link_vertices: tuple[int, ...]
    link_edges: tuple[int, ...]
    corners: tuple[Corner, ...]
    closure_defect: float


def develop_star(mesh: ConeMesh, v: int, tol: float = FLAT_TOL) -> StarDevelopment:
    geometry = mesh.geometry
    if mesh.is_boundary(v):
        raise PreconditionError(f"vertex {v} is on the boundary")
    if _star_has_loop(mesh, v):
        raise UnsupportedStar(f"star of vertex {v} contains a loop edge")
    omega = float(mesh.vertex_angles[v])
    if abs(omega - TWO_PI) > tol:
        raise NotFlat(f"vertex {v} has angle {omega!r}")
    corners = mesh.star(v)
    L = mesh.lengths
    center = origin(geometry)
    t, i = corners[0]
    pts = [point_polar(geometry, L[mesh.tri_edges[t][i]], 0.0)]
    link_vertices, link_edges = [], []
    for t, i in corners:
        te, tv = mesh.tri_edges[t], mesh.tri_verts[t]
        sides = TriangleSides(L[te[(i + 1) % 3]], L[te[(i + 2) % 3]], L[te[i]])
        pts.append(place_triangle(geometry, sides, center, pts[-1], Side.LEFT))
        link_vertices.append(tv[(i + 1) % 3])
        link_edges.append(te[(i + 1) % 3])
    defect = distance(geometry, pts[-1], pts[0])
    if defect > CLOSURE_TOL:
        raise ClosureFailure(f"development of vertex {v} misses closure by {defect:.3e}")
    pts.pop()
    return StarDevelopment(center, pts, tuple(link_vertices), tuple(link_edges), tuple(corners), defect)


def remove_flat_vertex(mesh: ConeMesh, v: int, log: list | None = None, flat_tol: float = FLAT_TOL) -> ConeMesh:
    """Replace the star of the flat interior vertex ``v`` by a triangulation of its link.

    Vertices above ``v`` are renumbered down by one.  Edges keep their
    relative order; the new diagonals are appended.
    """
    geometry = mesh.geometry
    dev = develop_star(mesh, v, flat_tol)
    d = len(dev.points)
    triangles, diagonals = ear_clip(geometry, dev.points, labels=dev.link_vertices)

    spokes = set(spoke_edges(mesh, v))
    star_tris = {t for t, _ in dev.corners}
    keep = [e for e in range(mesh.n_edges) if e not in spokes]
    new_id = {e: k for k, e in enumerate(keep)}
    lengths = [mesh.lengths[e] for e in keep]
    diag_id = {}
    for i, k in diagonals:
        diag_id[frozenset((i, k))] = len(lengths)
        lengths.append(distance(geometry, dev.points[i], dev.points[k]))

    def relabel(w: int) -> int:
        return w - 1 if w > v else w

    tri_verts, tri_edges = [], []
    for t in range(mesh.n_triangles):
        if t in star_tris:
            continue
        tri_verts.append(tuple(relabel(w) for w in mesh.tri_verts[t]))
        tri_edges.append(tuple(new_id[e] for e in mesh.tri_edges[t]))
    for tri in triangles:
        tri_verts.append(tuple(relabel(dev.link_vertices[x]) for x in tri))
        edges = []
        for x, y in zip(tri, tri[1:] + tri[:1]):
            if y == (x + 1) % d:
                edges.append(new_id[dev.link_edges[x]])
            else:
                edges.append(diag_id[frozenset((x, y))])
        tri_edges.append(tuple(edges))

    out = ConeMesh.build(geometry, lengths, tri_verts, tri_edges, mesh.metadata)
    if log is not None:
        star_area = float(mesh.triangle_areas[sorted(star_tris)].sum())
        clipped = float(out.triangle_areas[-len(triangles):].sum())
        log.append(SurgeryRecord(v, d, mesh.total_area(), out.total_area(), star_area,
                                 polygon_area(geometry, dev.points), clipped))
    return out


def _remove_flat_vertices(mesh: ConeMesh, log: list | None, flat_tol: float) -> tuple[ConeMesh, list[int]]:
    # removes every flat interior vertex, lowest current id first
    ids = list(range(mesh.n_vertices))
    removed = []
    while True:
        flat = check_negative_curvature(mesh, flat_tol).flat
        if not flat:
            return mesh, removed
        v = flat[0]
        mesh = remove_flat_vertex(mesh, v, log, flat_tol)
        removed.append(ids.pop(v))


# -- driver -------------------------------------------------------------------------

def flatten(
    mesh: ConeMesh,
    policy: Policy | str | None = None,
    *,
    keep_snapshots: bool = False,
    flat_tol: float = FLAT_TOL,
) -> FlattenResult:
    """Eliminate all interior vertices of a negatively curved cone disk.

    Returns a :class:`FlattenResult` that also unpacks as
    ``(final_mesh, steps)``.
    """
    if policy is None:
        policy = smallest_degree
    elif isinstance(policy, str):
        try:
            policy = POLICIES[policy]
        except KeyError:
            raise ValueError(f"unknown policy {policy!r}; choose from {sorted(POLICIES)}") from None

    violations = validate(mesh)
    if violations:
        raise PreconditionError("invalid mesh: " + "; ".join(map(str, violations)))
    if not is_disk(mesh):
        raise NonDisk(f"mesh is not a disk (chi={mesh.euler_characteristic})")
    curv = check_negative_curvature(mesh, flat_tol)
    if curv.positive:
        raise PreconditionError(f"interior vertices with positive curvature: {list(curv.positive)}")

    L0 = mesh.perimeter()
    result = FlattenResult(mesh, [])
    snap = result.snapshots.append if keep_snapshots else (lambda m: None)
    snap(mesh)

    current, _ = _remove_flat_vertices(mesh, result.surgeries, flat_tol)
    if current is not mesh:
        snap(current)
    budget = len(mesh.interior_vertices)
    while current.interior_vertices:
        if len(result.steps) >= budget:
            raise FlattenError(f"no termination after {budget} steps")
        candidates = [v for v in current.interior_vertices if not _star_has_loop(current, v)]
        if not candidates:
            raise UnsupportedStar("every remaining interior vertex has a loop edge in its star")
        p = policy(current, candidates)
        t0, flattened = find_t0(current, p, flat_tol)
        deformed = apply_star_deformation(current, p, t0)
        area_before, area_after = current.total_area(), deformed.total_area()
        if not area_after > area_before:
            raise NumericalInvariantError(f"area did not increase at vertex {p}: {area_before!r} -> {area_after!r}")
        snap(deformed)
        after, removed = _remove_flat_vertices(deformed, result.surgeries, flat_tol)
        if not removed:
            raise NumericalInvariantError(f"step at vertex {p} (t0={t0!r}) left no flat vertex")
        snap(after)
        L = after.perimeter()
        if abs(L - L0) > 1e-9 * L0:
            raise NumericalInvariantError(f"perimeter drifted from {L0!r} to {L!r}")
        singular = sum(1 for v in after.interior_vertices
                       if abs(float(after.vertex_angles[v]) - TWO_PI) > flat_tol)
        step = DeformationStep(p, t0, flattened, area_before, area_after, L, singular, tuple(removed))
        logger.info("step %d: vertex %d t0=%.12g flattened %d area %.12g -> %.12g",
                    len(result.steps), p, t0, flattened, area_before, area_after)
        result.steps.append(step)
        current = after
    result.mesh = current
    return result
