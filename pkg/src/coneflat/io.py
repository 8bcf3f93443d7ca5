"""Mesh files, step reports and SVG figures.

A mesh file is JSON with a fixed key order and one edge or triangle record
per line::

    {
      "format_version": 1,
      "geometry": "euclidean",
      "edges": [
        {"length": 1},
        ...
      ],
      "triangles": [
        {"v": [6, 0, 1], "e": [6, 0, 7]},
        ...
      ],
      "metadata": {"generator": "cone"}
    }

Lengths are written with 17 significant digits, which reproduces every
double exactly on reading.
"""

from __future__ import annotations

import json
import math
import os
from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .flatten import DeformationStep
from .geometry import GeometryError, Geometry, Side, TriangleSides, chart, distance, origin, place_triangle, point_polar
from .mesh import ConeMesh, Violation, validate

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, line: int | None, message: str):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ValidationError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(map(str, self.violations)))


def format_length(x: float) -> str:
    return format(x, ".17g")


def dumps(mesh: ConeMesh) -> str:
    lines = ["{", f'  "format_version": {FORMAT_VERSION},', f'  "geometry": {json.dumps(mesh.geometry.name)},']
    edges = [f'    {{"length": {format_length(x)}}}' for x in mesh.lengths]
    lines.append('  "edges": [')
    lines.append(",\n".join(edges))
    lines.append("  ],")
    tris = [f'    {{"v": [{v[0]}, {v[1]}, {v[2]}], "e": [{e[0]}, {e[1]}, {e[2]}]}}'
            for v, e in zip(mesh.tri_verts, mesh.tri_edges)]
    lines.append('  "triangles": [')
    lines.append(",\n".join(tris))
    lines.append("  ],")
    meta = {str(k): str(v) for k, v in sorted(mesh.metadata.items())}
    lines.append(f'  "metadata": {json.dumps(meta, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save(mesh: ConeMesh, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(mesh))


def _record_line(text: str, section: str, index: int) -> int | None:
    # best-effort line of the index-th record inside a top-level array
    lines = text.splitlines()
    start = next((k for k, ln in enumerate(lines) if f'"{section}"' in ln), None)
    if start is None:
        return None
    seen = -1
    for k in range(start, len(lines)):
        seen += lines[k].count("{") if k > start else lines[k].split(f'"{section}"', 1)[1].count("{")
        if seen >= index:
            return k + 1
    return None


def loads(text: str, *, check: bool = True) -> ConeMesh:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(1, "top level must be an object")
    for key in ("format_version", "geometry", "edges", "triangles"):
        if key not in doc:
            raise ParseError(None, f"missing field {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(None, f"unsupported format_version {doc['format_version']!r}")
    try:
        geometry = Geometry.from_name(str(doc["geometry"]))
    except GeometryError as exc:
        raise ParseError(_record_line(text, "geometry", 0), str(exc)) from None

    lengths = []
    for k, rec in enumerate(doc["edges"]):
        try:
            x = rec["length"]
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise TypeError
        except (TypeError, KeyError):
            raise ParseError(_record_line(text, "edges", k), f"edge {k}: expected {{\"length\": number}}") from None
        lengths.append(float(x))
    n_edges = len(lengths)

    tri_verts, tri_edges = [], []
    for k, rec in enumerate(doc["triangles"]):
        line = _record_line(text, "triangles", k)
        try:
            v, e = rec["v"], rec["e"]
        except (TypeError, KeyError):
            raise ParseError(line, f"triangle {k}: expected fields 'v' and 'e'") from None
        if (not isinstance(v, list) or not isinstance(e, list) or len(v) != 3 or len(e) != 3
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in v + e)):
            raise ParseError(line, f"triangle {k}: 'v' and 'e' must be lists of three integers")
        for x in e:
            if not 0 <= x < n_edges:
                raise ParseError(line, f"triangle {k} references edge {x}, but there are {n_edges} edges")
        for x in v:
            if x < 0:
                raise ParseError(line, f"triangle {k} references negative vertex {x}")
        tri_verts.append(v)
        tri_edges.append(e)

    meta = doc.get("metadata") or {}
    if not isinstance(meta, dict):
        raise ParseError(None, "metadata must be an object")
    mesh = ConeMesh.build(geometry, lengths, tri_verts, tri_edges, {str(k): str(x) for k, x in meta.items()})
    if check:
        violations = validate(mesh)
        if violations:
            raise ValidationError(violations)
    return mesh


def load(path: str | os.PathLike, *, check: bool = True) -> ConeMesh:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), check=check)


def write_report(steps: Iterable[DeformationStep], path: str | os.PathLike) -> None:
    """One JSON object per line, one line per step."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for step in steps:
            fh.write(json.dumps(step.as_dict()) + "\n")


def read_report(path: str | os.PathLike) -> list[DeformationStep]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            out.append(DeformationStep(d["vertex"], d["t0"], d["flattened"], d["area_before"],
                                       d["area_after"], d["perimeter"], d["interior_singular_count_after"],
                                       tuple(d.get("removed", ()))))
    return out


# -- SVG ---------------------------------------------------------------------------

def develop_mesh(mesh: ConeMesh) -> list[np.ndarray]:
    """Lay out every triangle in the model plane, breadth first from a boundary edge.

    Returns one ``(3, dim)`` array of model points per triangle.  Triangles
    are placed across already placed neighbours, so cone points and
    self-overlaps show up as gaps or overlaps in the picture.
    """
    geometry = mesh.geometry
    L = mesh.lengths
    placed: dict[int, np.ndarray] = {}
    seeds = list(mesh.boundary_edges) or [0]
    queue: deque[int] = deque()

    def place_first(t: int, slot: int) -> None:
        te = mesh.tri_edges[t]
        p0 = origin(geometry)
        p1 = point_polar(geometry, L[te[slot]], 0.0)
        sides = TriangleSides(L[te[(slot + 1) % 3]], L[te[(slot + 2) % 3]], L[te[slot]])
        p2 = place_triangle(geometry, sides, p0, p1, Side.LEFT)
        pos = [None, None, None]
        pos[slot], pos[(slot + 1) % 3], pos[(slot + 2) % 3] = p0, p1, p2
        placed[t] = np.array(pos)
        queue.append(t)

    for e in seeds:
        t, slot = mesh.edge_sides[e][0]
        if t not in placed:
            place_first(t, slot)
        while queue:
            t = queue.popleft()
            for slot in range(3):
                for u, j in mesh.edge_sides[mesh.tri_edges[t][slot]]:
                    if u in placed:
                        continue
                    # side (u, j) runs opposite to side (t, slot)
                    a, b = placed[t][(slot + 1) % 3], placed[t][slot]
                    ue = mesh.tri_edges[u]
                    sides = TriangleSides(L[ue[(j + 1) % 3]], L[ue[(j + 2) % 3]], L[ue[j]])
                    c = place_triangle(geometry, sides, a, b, Side.LEFT)
                    pos = [None, None, None]
                    pos[j], pos[(j + 1) % 3], pos[(j + 2) % 3] = a, b, c
                    placed[u] = np.array(pos)
                    queue.append(u)
        for t in range(mesh.n_triangles):
            if t not in placed:
                place_first(t, 0)
    return [placed[t] for t in range(mesh.n_triangles)]


def to_svg(mesh: ConeMesh, size: int = 600) -> str:
    tris = [np.array([chart(mesh.geometry, p) for p in tri]) for tri in develop_mesh(mesh)]
    pts = np.concatenate(tris) if tris else np.zeros((1, 2))
    if mesh.geometry.is_hyperbolic:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    else:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    margin = 0.05 * size
    scale = (size - 2 * margin) / span

    def screen(p) -> tuple[float, float]:
        return margin + (p[0] - lo[0]) * scale, size - (margin + (p[1] - lo[1]) * scale)

    def xy(p) -> str:
        x, y = screen(p)
        return f"{x:.3f},{y:.3f}"

    boundary = set(mesh.boundary_edges)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<!-- {mesh.geometry.name} development, triangle by triangle from a boundary edge;"
        " cone points and self-overlaps are drawn as they fall -->",
    ]
    if mesh.geometry.is_hyperbolic:
        out.append(f'<circle cx="{size / 2}" cy="{size / 2}" r="{(size - 2 * margin) / 2}" '
                   'fill="none" stroke="#bbb" stroke-dasharray="4 3"/>')
    for t, tri in enumerate(tris):
        out.append(f'<polygon points="{" ".join(xy(p) for p in tri)}" fill="#4a90d9" fill-opacity="0.15" '
                   'stroke="none"/>')
        for slot in range(3):
            (x1, y1), (x2, y2) = screen(tri[slot]), screen(tri[(slot + 1) % 3])
            bd = mesh.tri_edges[t][slot] in boundary
            out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                       f'stroke="{"#000" if bd else "#555"}" stroke-width="{1.6 if bd else 0.6}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(mesh: ConeMesh, path: str | os.PathLike, size: int = 600) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_svg(mesh, size))
