"""Test-instance factories: symmetric cone disks and seeded random disks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .geometry import EUCLIDEAN, HYPERBOLIC, Geometry, GeometryError, InvalidTriangle, distance, from_klein, triangle_slack
from .mesh import TWO_PI, ConeMesh, check_negative_curvature, validate

RNG_ALGORITHM = "numpy.random.PCG64"
MAX_ROUNDS = 10_000
#: required excess of every interior cone angle over 2pi
CURVATURE_MARGIN = 1e-3
#: upper end of the multiplicative perturbation of interior edges
MAX_PERTURBATION = 1.6


class InvalidSpec(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class ConeDiskSpec:
    """Fan of ``sectors`` isosceles triangles around one interior apex.

    Give either the ``base`` length or the ``apex_angle`` of one sector.
    """

    geometry: Geometry
    sectors: int
    legs: float
    base: float | None = None
    apex_angle: float | None = None

    def base_length(self) -> float:
        if (self.base is None) == (self.apex_angle is None):
            raise InvalidSpec("give exactly one of base and apex_angle")
        if self.base is not None:
            return float(self.base)
        theta = float(self.apex_angle)
        if not 0.0 < theta < math.pi:
            raise InvalidSpec(f"apex angle {theta} outside (0, pi)")
        r = self.legs
        if self.geometry.is_hyperbolic:
            # law of cosines, with cosh r^2 - sinh r^2 cos = 1 + 2 sinh^2 r sin^2(theta/2)
            x = 2.0 * (math.sinh(r) * math.sin(0.5 * theta)) ** 2
            return math.acosh(1.0 + x)
        return 2.0 * r * math.sin(0.5 * theta)

    @property
    def cone_angle(self) -> float:
        from .geometry import TriangleSides, angle_opposite
        return self.sectors * angle_opposite(self.geometry, TriangleSides(self.base_length(), self.legs, self.legs))


def gen_cone_disk(spec: ConeDiskSpec) -> ConeMesh:
    """Cone disk with the apex as vertex ``n`` and rim vertices ``0..n-1``.

    Edges ``0..n-1`` are the rim (edge ``i`` joins ``i`` and ``i+1``),
    edges ``n..2n-1`` the legs (edge ``n+i`` joins the apex and ``i``).
    """
    n = spec.sectors
    if n < 3:
        raise InvalidSpec(f"need at least 3 sectors, got {n}")
    if not spec.legs > 0.0:
        raise InvalidSpec(f"legs must be positive, got {spec.legs}")
    try:
        s = spec.base_length()
    except GeometryError as exc:
        raise InvalidSpec(str(exc)) from exc
    if not s > 0.0 or triangle_slack(s, spec.legs, spec.legs) <= 0.0:
        raise InvalidSpec(f"sector triangle ({s}, {spec.legs}, {spec.legs}) is degenerate")
    lengths = [s] * n + [float(spec.legs)] * n
    apex = n
    tri_verts = [(apex, i, (i + 1) % n) for i in range(n)]
    tri_edges = [(n + i, i, n + (i + 1) % n) for i in range(n)]
    meta = {"generator": "cone", "sectors": str(n), "legs": repr(float(spec.legs)), "base": repr(s)}
    return ConeMesh.build(spec.geometry, lengths, tri_verts, tri_edges, meta)


def cone_disk_closed_form(n: int, legs: float, base: float) -> dict[str, float]:
    """Euclidean closed forms for the symmetric cone disk."""
    return {
        "cone_angle": 2.0 * n * math.asin(base / (2.0 * legs)),
        "area": n * 0.25 * base * math.sqrt(4.0 * legs * legs - base * base),
        "perimeter": n * base,
        "t0": (base / (2.0 * math.sin(math.pi / n))) ** 2 - legs * legs,
    }


# -- random disks ----------------------------------------------------------------

def _flat_hyperbolic_disk(rng: np.random.Generator, interior: int, boundary: int):
    """Geodesic triangulation of a hyperbolic polygon, as Klein points plus triangles.

    Boundary points lie on a circle centred at the origin; interior points
    are sampled in the boundary polygon shrunk by 10% towards the origin.
    """
    radius = math.tanh(rng.uniform(1.5, 2.5))  # Klein radius of the rim
    gaps = rng.uniform(0.6, 1.4, size=boundary)
    angles = np.cumsum(gaps / gaps.sum() * TWO_PI)
    # increasing and spanning less than 2pi, so the rim is counterclockwise
    angles = angles - angles[0] + rng.uniform(0.0, TWO_PI)
    rim = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    inner = 0.9 * rim
    edges = np.roll(inner, -1, axis=0) - inner
    pts = [p for p in rim]
    min_sep = 0.25 * radius / math.sqrt(max(interior, 1))
    tries = 0
    while len(pts) < boundary + interior:
        tries += 1
        if tries > 10_000:
            return None
        q = rng.uniform(-radius, radius, size=2)
        rel = q - inner
        if np.any(edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0] <= 0.0):
            continue
        if all(np.hypot(*(q - p)) > min_sep for p in pts):
            pts.append(q)
    pts = np.array(pts)
    tri = Delaunay(pts)
    hull = set(int(v) for v in tri.convex_hull.ravel())
    if hull != set(range(boundary)):
        return None
    simplices = []
    for a, b, c in tri.simplices.tolist():
        pa, pb, pc = pts[a], pts[b], pts[c]
        cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        if cross == 0.0:
            return None
        simplices.append((a, b, c) if cross > 0 else (a, c, b))
    return pts, simplices


def _assemble(geometry: Geometry, lengths_by_pair: dict, simplices, metadata) -> ConeMesh:
    pairs = sorted(lengths_by_pair)
    eid = {p: k for k, p in enumerate(pairs)}
    tri_verts, tri_edges = [], []
    for s in sorted(simplices, key=lambda s: (min(s), s)):
        # rotate so that the smallest id comes first; keeps orientation
        k = s.index(min(s))
        s = s[k:] + s[:k]
        tri_verts.append(s)
        tri_edges.append(tuple(eid[tuple(sorted((s[i], s[(i + 1) % 3])))] for i in range(3)))
    return ConeMesh.build(geometry, [lengths_by_pair[p] for p in pairs], tri_verts, tri_edges, metadata)


def gen_random_disk(seed: int, interior_count: int, boundary_count: int,
                    geometry: Geometry = EUCLIDEAN) -> ConeMesh:
    """Seeded random triangulated disk whose interior vertices all have angle > 2pi + 1e-3.

    A geodesic triangulation of a convex hyperbolic polygon is drawn first;
    its interior vertices are flat in the hyperbolic plane.  Shrinking all
    lengths by a factor below one and reading them in the hyperbolic plane,
    or reading them unchanged in the euclidean plane, strictly enlarges
    every corner angle, so every interior vertex becomes a cone point of
    negative curvature; point sets whose margin is still below 1e-3 are
    redrawn.  Interior edges are then scaled by random factors in
    ``[1, 1.6]``, with the amplitude halved after each rejected round.
    """
    if interior_count < 0 or boundary_count < 3:
        raise InvalidSpec(f"need interior >= 0 and boundary >= 3, got {interior_count}, {boundary_count}")
    rng = np.random.Generator(np.random.PCG64(seed))
    meta = {
        "generator": "random",
        "rng": RNG_ALGORITHM,
        "seed": str(seed),
        "interior": str(interior_count),
        "boundary": str(boundary_count),
    }
    for _ in range(100):
        flat = _flat_hyperbolic_disk(rng, interior_count, boundary_count)
        if flat is None:
            continue
        pts, simplices = flat
        H = [from_klein(p) for p in pts]
        base: dict[tuple[int, int], float] = {}
        for s in simplices:
            for i in range(3):
                a, b = sorted((s[i], s[(i + 1) % 3]))
                base[(a, b)] = distance(HYPERBOLIC, H[a], H[b])
        shrink = float(rng.uniform(0.5, 0.8)) if geometry.is_hyperbolic else 1.0
        base = {p: shrink * v for p, v in base.items()}
        # the unperturbed lengths must already be admissible, so halving converges
        if _acceptable(_assemble(geometry, base, simplices, meta)):
            break
    else:
        raise GenerationFailed(f"seed {seed}: could not triangulate sample points")
    rim = {tuple(sorted((i, (i + 1) % boundary_count))) for i in range(boundary_count)}
    interior_edges = [p for p in sorted(base) if p not in rim]

    amplitude = MAX_PERTURBATION - 1.0
    for rounds in range(1, MAX_ROUNDS + 1):
        factors = 1.0 + amplitude * rng.uniform(0.0, 1.0, size=len(interior_edges))
        lengths = dict(base)
        for p, f in zip(interior_edges, factors):
            lengths[p] *= float(f)
        mesh = _assemble(geometry, lengths, simplices, {**meta, "rounds": str(rounds)})
        if _acceptable(mesh):
            return mesh
        amplitude *= 0.5
    raise GenerationFailed(f"seed {seed}: no admissible length assignment after {MAX_ROUNDS} rounds")


def _acceptable(mesh: ConeMesh) -> bool:
    try:
        if validate(mesh):
            return False
    except InvalidTriangle:
        return False
    if not check_negative_curvature(mesh).ok:
        return False
    return all(mesh.vertex_angles[v] > TWO_PI + CURVATURE_MARGIN for v in mesh.interior_vertices)
