import math

import numpy as np
import pytest

from coneflat.geometry import EUCLIDEAN, Geometry, distance, hyperboloid_point
from coneflat.mesh import ConeMesh

ACCEPTANCE_LINES: list[str] = []


def planar_mesh(points, triangles, geometry: Geometry = EUCLIDEAN, metadata=None) -> ConeMesh:
    """Mesh whose lengths are measured between explicit points.

    Euclidean points are ``(x, y)``; hyperbolic points are given in
    hyperboloid coordinates ``(x1, x2)`` (``x0`` is filled in).
    """
    if geometry.is_hyperbolic:
        pts = [hyperboloid_point(*p) for p in points]
    else:
        pts = [np.asarray(p, dtype=float) for p in points]
    pairs = sorted({tuple(sorted((t[i], t[(i + 1) % 3]))) for t in triangles for i in range(3)})
    eid = {p: k for k, p in enumerate(pairs)}
    lengths = [distance(geometry, pts[a], pts[b]) for a, b in pairs]
    tri_edges = [tuple(eid[tuple(sorted((t[i], t[(i + 1) % 3])))] for i in range(3)) for t in triangles]
    return ConeMesh.build(geometry, lengths, triangles, tri_edges, metadata)


def hexagon_points():
    return [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)] + [(0.0, 0.0)]


def annulus_mesh() -> ConeMesh:
    outer = [(2 * math.cos(a), 2 * math.sin(a)) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    inner = [(0.5 * math.cos(a), 0.5 * math.sin(a)) for a in (math.pi / 3, math.pi, 5 * math.pi / 3)]
    tris = [(0, 1, 3), (1, 4, 3), (1, 2, 4), (2, 5, 4), (2, 0, 5), (0, 3, 5)]
    return planar_mesh(outer + inner, tris)


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
