"""Intrinsic triangulated cone-surfaces.

A :class:`ConeMesh` is pure combinatorics plus edge lengths.  Edges are
first-class records, so two edges may join the same pair of vertices and an
edge may even be a loop.  Triangle ``t`` has vertices ``tri_verts[t]`` and
edges ``tri_edges[t]`` where ``tri_edges[t][i]`` runs from
``tri_verts[t][i]`` to ``tri_verts[t][(i + 1) % 3]``; all triangles are
listed counterclockwise.

Corners are addressed as ``(triangle, slot)``.  The corner at slot ``i`` is
bounded by the sides in slots ``i`` (outgoing) and ``i - 1`` (incoming) and
faces the side in slot ``i + 1``.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .geometry import Geometry, Kind, half_angles, heron_area, triangle_slack

TWO_PI = 2.0 * math.pi
#: interior vertices with |angle - 2pi| below this are flat
FLAT_TOL = 1e-8
MIN_VERTEX_ANGLE = 1e-12
MAX_VERTEX_ANGLE = 1e6

Corner = tuple[int, int]


class MeshError(ValueError):
    pass


class UnknownVertex(MeshError, KeyError):
    pass


class VertexKind(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class VertexReport:
    vertex: int
    kind: VertexKind
    total_angle: float
    curvature: float


@dataclass(frozen=True)
class Violation:
    """One broken mesh invariant.

    ``kind`` is one of ``NonPositiveLength``, ``BadIndex``, ``EdgeUsage``,
    ``EdgeEndpoints``, ``TriangleInequality``, ``Orientation``,
    ``BoundaryCycle``, ``VertexLink``, ``UnusedVertex``, ``Disconnected``,
    ``VertexAngle``.
    """

    kind: str
    ids: tuple[int, ...]
    slack: float = float("nan")
    message: str = ""

    def __str__(self) -> str:
        s = f"{self.kind}{list(self.ids)}"
        if not math.isnan(self.slack):
            s += f" slack={self.slack:.3e}"
        if self.message:
            s += f": {self.message}"
        return s


@dataclass(frozen=True)
class CurvatureCheck:
    """Interior vertices that break the negative-curvature hypothesis."""

    positive: tuple[int, ...]
    flat: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.positive


@dataclass(frozen=True, eq=False)
class ConeMesh:
    geometry: Geometry
    lengths: tuple[float, ...]
    tri_verts: tuple[tuple[int, int, int], ...]
    tri_edges: tuple[tuple[int, int, int], ...]
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def build(
        cls,
        geometry: Geometry,
        lengths: Iterable[float],
        tri_verts: Iterable[Sequence[int]],
        tri_edges: Iterable[Sequence[int]],
        metadata: dict | None = None,
    ) -> "ConeMesh":
        return cls(
            geometry,
            tuple(float(x) for x in lengths),
            tuple(tuple(int(v) for v in tv) for tv in tri_verts),
            tuple(tuple(int(e) for e in te) for te in tri_edges),
            dict(metadata or {}),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConeMesh):
            return NotImplemented
        return (self.geometry == other.geometry and self.lengths == other.lengths
                and self.tri_verts == other.tri_verts and self.tri_edges == other.tri_edges)

    def __hash__(self) -> int:
        return hash((self.geometry, self.lengths, self.tri_verts, self.tri_edges))

    # -- combinatorics ----------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    @property
    def n_triangles(self) -> int:
        return len(self.tri_verts)

    @cached_property
    def n_vertices(self) -> int:
        return 1 + max((v for tv in self.tri_verts for v in tv), default=-1)

    @cached_property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @cached_property
    def edge_sides(self) -> list[list[Corner]]:
        """Triangle sides ``(t, slot)`` referencing each edge."""
        sides: list[list[Corner]] = [[] for _ in range(self.n_edges)]
        for t, te in enumerate(self.tri_edges):
            for i, e in enumerate(te):
                if 0 <= e < self.n_edges:
                    sides[e].append((t, i))
        return sides

    @cached_property
    def boundary_edges(self) -> tuple[int, ...]:
        return tuple(e for e, s in enumerate(self.edge_sides) if len(s) == 1)

    @cached_property
    def vertex_corners(self) -> list[list[Corner]]:
        corners: list[list[Corner]] = [[] for _ in range(self.n_vertices)]
        for t, tv in enumerate(self.tri_verts):
            for i, v in enumerate(tv):
                corners[v].append((t, i))
        return corners

    @cached_property
    def boundary_vertices(self) -> frozenset[int]:
        out = set()
        for e in self.boundary_edges:
            t, i = self.edge_sides[e][0]
            out.add(self.tri_verts[t][i])
            out.add(self.tri_verts[t][(i + 1) % 3])
        return frozenset(out)

    @cached_property
    def interior_vertices(self) -> tuple[int, ...]:
        bd = self.boundary_vertices
        return tuple(v for v in range(self.n_vertices) if v not in bd)

    def is_boundary(self, v: int) -> bool:
        return v in self.boundary_vertices

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        t, i = self.edge_sides[e][0]
        return self.tri_verts[t][i], self.tri_verts[t][(i + 1) % 3]

    def _mate(self, t: int, i: int) -> Corner | None:
        """The other side glued to side ``(t, i)``, or None on the boundary."""
        for side in self.edge_sides[self.tri_edges[t][i]]:
            if side != (t, i):
                return side
        return None

    def star(self, v: int) -> list[Corner]:
        """Corners at ``v`` in counterclockwise order.

        For a boundary vertex the list starts at the corner whose outgoing
        side lies on the boundary.  Raises :class:`MeshError` if the corners
        at ``v`` do not form a single fan.
        """
        self._check_vertex(v)
        corners = self.vertex_corners[v]
        if not corners:
            raise MeshError(f"vertex {v} has no corners")
        start = corners[0]
        if self.is_boundary(v):
            # walk clockwise until the outgoing side is a boundary side
            cur = start
            for _ in range(len(corners) + 1):
                mate = self._mate(cur[0], cur[1])
                if mate is None:
                    break
                cur = (mate[0], (mate[1] + 1) % 3)
            else:
                raise MeshError(f"boundary vertex {v} has a cyclic star")
            start = cur
        order = [start]
        cur = start
        while True:
            mate = self._mate(cur[0], (cur[1] + 2) % 3)
            if mate is None or mate == start:
                break
            if mate in order or len(order) > len(corners):
                raise MeshError(f"corners around vertex {v} do not form a fan")
            order.append(mate)
            cur = mate
        if len(order) != len(corners) or set(order) != set(corners):
            raise MeshError(f"vertex {v} is not a manifold point ({len(order)} of {len(corners)} corners in one fan)")
        return order

    def boundary_cycles(self) -> list[list[int]]:
        """Boundary edges grouped into cycles, each in traversal order.

        Raises :class:`MeshError` if the boundary is not a disjoint union of
        simple cycles.
        """
        out_edge: dict[int, int] = {}
        for e in self.boundary_edges:
            a, _ = self.edge_endpoints(e)
            if a in out_edge:
                raise MeshError(f"vertex {a} starts two boundary edges")
            out_edge[a] = e
        seen: set[int] = set()
        cycles = []
        for e0 in self.boundary_edges:
            if e0 in seen:
                continue
            cycle = []
            e = e0
            while e not in seen:
                seen.add(e)
                cycle.append(e)
                nxt = self.edge_endpoints(e)[1]
                if nxt not in out_edge:
                    raise MeshError(f"boundary is open at vertex {nxt}")
                e = out_edge[nxt]
            if e != e0:
                raise MeshError("boundary edges do not close up into simple cycles")
            cycles.append(cycle)
        return cycles

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n_vertices:
            raise UnknownVertex(f"no vertex {v} (mesh has {self.n_vertices})")

    # -- metric -----------------------------------------------------------

    @cached_property
    def side_lengths(self) -> np.ndarray:
        """``(F, 3)`` array, entry ``[t, i]`` is the length of side slot ``i``."""
        lengths = np.asarray(self.lengths, dtype=float)
        idx = np.asarray(self.tri_edges, dtype=int).reshape(-1, 3)
        return lengths[idx]

    @cached_property
    def corner_angles(self) -> np.ndarray:
        """``(F, 3)`` array of corner angles; the corner at slot ``i`` faces slot ``i + 1``."""
        s = self.side_lengths
        opp = s[:, [1, 2, 0]]
        left = s[:, [0, 1, 2]]
        right = s[:, [2, 0, 1]]
        with np.errstate(invalid="ignore", divide="ignore"):
            return half_angles(self.geometry.kind, opp, left, right)

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        if self.geometry.kind is Kind.EUCLIDEAN:
            s = self.side_lengths
            return heron_area(s[:, 0], s[:, 1], s[:, 2])
        return math.pi - self.corner_angles.sum(axis=1)

    @cached_property
    def vertex_angles(self) -> np.ndarray:
        out = np.zeros(self.n_vertices)
        tv = np.asarray(self.tri_verts, dtype=int).reshape(-1, 3)
        np.add.at(out, tv.ravel(), self.corner_angles.ravel())
        return out

    def vertex_report(self, v: int) -> VertexReport:
        self._check_vertex(v)
        angle = float(self.vertex_angles[v])
        if self.is_boundary(v):
            return VertexReport(v, VertexKind.BOUNDARY, angle, math.pi - angle)
        return VertexReport(v, VertexKind.INTERIOR, angle, TWO_PI - angle)

    def total_area(self) -> float:
        return math.fsum(self.triangle_areas.tolist())

    def perimeter(self) -> float:
        return math.fsum(self.lengths[e] for e in self.boundary_edges)

    def with_lengths(self, lengths: Iterable[float]) -> "ConeMesh":
        return ConeMesh(self.geometry, tuple(float(x) for x in lengths),
                        self.tri_verts, self.tri_edges, dict(self.metadata))


# -- module level API ------------------------------------------------------

def vertex_report(mesh: ConeMesh, v: int) -> VertexReport:
    return mesh.vertex_report(v)


def total_area(mesh: ConeMesh) -> float:
    return mesh.total_area()


def perimeter(mesh: ConeMesh) -> float:
    return mesh.perimeter()


def check_negative_curvature(mesh: ConeMesh, tol: float = FLAT_TOL) -> CurvatureCheck:
    positive, flat = [], []
    for v in mesh.interior_vertices:
        omega = float(mesh.vertex_angles[v])
        if abs(omega - TWO_PI) <= tol:
            flat.append(v)
        elif omega < TWO_PI:
            positive.append(v)
    return CurvatureCheck(tuple(positive), tuple(flat))


def validate(mesh: ConeMesh) -> list[Violation]:
    """List every violated :class:`ConeMesh` invariant (empty when valid)."""
    out: list[Violation] = []
    nE, nF = mesh.n_edges, mesh.n_triangles

    for e, length in enumerate(mesh.lengths):
        if not (length > 0.0 and math.isfinite(length)):
            out.append(Violation("NonPositiveLength", (e,), length, "edge length must be positive"))

    index_ok = True
    for t, (tv, te) in enumerate(zip(mesh.tri_verts, mesh.tri_edges)):
        if len(tv) != 3 or len(te) != 3:
            out.append(Violation("BadIndex", (t,), message="triangle needs three vertices and three edges"))
            index_ok = False
            continue
        for e in te:
            if not 0 <= e < nE:
                out.append(Violation("BadIndex", (t, e), message=f"edge index out of range 0..{nE - 1}"))
                index_ok = False
        for v in tv:
            if v < 0:
                out.append(Violation("BadIndex", (t, v), message="negative vertex index"))
                index_ok = False
    if not index_ok or nF == 0:
        if nF == 0:
            out.append(Violation("BadIndex", (), message="mesh has no triangles"))
        return out

    for e, sides in enumerate(mesh.edge_sides):
        if len(sides) not in (1, 2):
            out.append(Violation("EdgeUsage", (e,), float(len(sides)),
                                 f"edge referenced by {len(sides)} triangle sides"))
            continue
        ends = []
        for t, i in sides:
            ends.append((mesh.tri_verts[t][i], mesh.tri_verts[t][(i + 1) % 3]))
        if len(ends) == 2:
            (a0, b0), (a1, b1) = ends
            if {a0, b0} != {a1, b1}:
                out.append(Violation("EdgeEndpoints", (e,), message=f"sides disagree on endpoints {ends}"))
            elif a0 != b0 and (a0, b0) != (b1, a1):
                out.append(Violation("Orientation", (e,), message="both sides traverse the edge the same way"))

    metric_ok = True
    for t in range(nF):
        s = mesh.side_lengths[t]
        if np.all(s > 0):
            slack = triangle_slack(*s)
            if slack <= 0.0:
                out.append(Violation("TriangleInequality", (t,), slack, f"sides {tuple(s.tolist())}"))
                metric_ok = False
        else:
            metric_ok = False

    used = set(v for tv in mesh.tri_verts for v in tv)
    for v in range(mesh.n_vertices):
        if v not in used:
            out.append(Violation("UnusedVertex", (v,)))

    if any(x.kind in ("EdgeUsage", "EdgeEndpoints") for x in out):
        return out

    try:
        mesh.boundary_cycles()
    except MeshError as exc:
        out.append(Violation("BoundaryCycle", (), message=str(exc)))

    for v in sorted(used):
        try:
            mesh.star(v)
        except MeshError as exc:
            out.append(Violation("VertexLink", (v,), message=str(exc)))

    # connectivity through shared edges
    parent = list(range(nF))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sides in mesh.edge_sides:
        if len(sides) == 2:
            ra, rb = find(sides[0][0]), find(sides[1][0])
            if ra != rb:
                parent[ra] = rb
    components = {find(t) for t in range(nF)}
    if len(components) > 1:
        out.append(Violation("Disconnected", tuple(sorted(components)), float(len(components))))

    if metric_ok:
        for v in sorted(used):
            omega = float(mesh.vertex_angles[v])
            if not MIN_VERTEX_ANGLE <= omega <= MAX_VERTEX_ANGLE:
                out.append(Violation("VertexAngle", (v,), omega, "vertex angle outside [1e-12, 1e6]"))
    return out


def is_disk(mesh: ConeMesh) -> bool:
    try:
        return mesh.euler_characteristic == 1 and len(mesh.boundary_cycles()) == 1
    except MeshError:
        return False
