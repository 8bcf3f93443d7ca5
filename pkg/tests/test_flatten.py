import math

import numpy as np
import pytest

from coneflat.flatten import (
    NonDisk,
    NotFlat,
    NotSingular,
    POLICIES,
    PreconditionError,
    apply_star_deformation,
    develop_star,
    find_t0,
    flatten,
    remove_flat_vertex,
)
from coneflat.gen import ConeDiskSpec, cone_disk_closed_form, gen_cone_disk, gen_random_disk
from coneflat.geometry import EUCLIDEAN, HYPERBOLIC, distance, signed_angle
from coneflat.mesh import TWO_PI, check_negative_curvature, validate
from coneflat.verify import check_isoperimetric, gauss_bonnet_residual

from conftest import annulus_mesh, planar_mesh

HEX_AREA = 3 * math.sqrt(3) / 2


@pytest.fixture
def cone():
    return gen_cone_disk(ConeDiskSpec(EUCLIDEAN, 6, 0.9, 1.0))


@pytest.fixture
def hexagon():
    return gen_cone_disk(ConeDiskSpec(EUCLIDEAN, 6, 1.0, 1.0))


def degree3(geometry):
    # one interior point inside a triangle; hyperbolic points are hyperboloid (x1, x2)
    pts = [(0.0, 0.0), (1.5, 0.0), (0.2, 1.3), (0.55, 0.45)]
    return planar_mesh(pts, [(3, 0, 1), (3, 1, 2), (3, 2, 0)], geometry)


def hyperbolic_cone_t0(n, r, s):
    # legs r_t with the sector angle 2pi/n: cosh s = 1 + 2 sinh^2 r_t sin^2(pi/n)
    sinh_rt = math.sqrt((math.cosh(s) - 1.0) / (2.0 * math.sin(math.pi / n) ** 2))
    return math.log(math.sqrt(1.0 + sinh_rt ** 2) / math.cosh(r))


class TestFindT0:
    def test_cone_closed_form(self, cone):
        t0, flat = find_t0(cone, 6)
        assert t0 == pytest.approx(0.19, abs=1e-9)
        assert t0 == pytest.approx(cone_disk_closed_form(6, 0.9, 1.0)["t0"], abs=1e-9)
        assert flat == 6

    def test_flat_center_is_not_singular(self, hexagon):
        with pytest.raises(NotSingular):
            find_t0(hexagon, 6)

    def test_boundary_vertex_rejected(self, cone):
        with pytest.raises(PreconditionError):
            find_t0(cone, 0)

    @pytest.mark.parametrize("n,r,theta", [(8, 1.0, math.pi / 3), (7, 0.4, 1.0), (12, 2.5, 0.6), (5, 0.05, 1.4)])
    def test_hyperbolic_symmetric_cone(self, n, r, theta):
        mesh = gen_cone_disk(ConeDiskSpec(HYPERBOLIC, n, r, apex_angle=theta))
        t0, flat = find_t0(mesh, n)
        assert flat == n
        # oracle 1: recompute the apex angle after deforming
        omega = float(apply_star_deformation(mesh, n, t0).vertex_angles[n])
        assert abs(omega - TWO_PI) < 1e-10
        # oracle 2: closed form for the symmetric star
        s = mesh.lengths[0]
        assert t0 == pytest.approx(hyperbolic_cone_t0(n, r, s), rel=1e-9)

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_first_event_on_random_disks(self, seed, geometry):
        mesh = gen_random_disk(seed, 6, 9, geometry)
        for p in mesh.interior_vertices:
            t0, flat = find_t0(mesh, p)
            assert t0 > 0
            after = apply_star_deformation(mesh, p, t0)
            assert abs(float(after.vertex_angles[flat]) - TWO_PI) <= 1e-10
            # no interior angle went below 2pi on a fine grid before t0
            for tau in np.linspace(0.0, t0, 101)[1:-1]:
                m = apply_star_deformation(mesh, p, float(tau))
                assert min(float(m.vertex_angles[v]) for v in m.interior_vertices) >= TWO_PI - 1e-10


class TestApplyStarDeformation:
    def test_zero_is_identity(self, cone):
        assert apply_star_deformation(cone, 6, 0.0) == cone

    def test_cone_becomes_hexagon(self, cone, hexagon):
        out = apply_star_deformation(cone, 6, 0.19)
        assert cone.total_area() == pytest.approx(2.2449944320643649, rel=1e-12)
        for e in range(6, 12):
            assert out.lengths[e] == pytest.approx(1.0, abs=1e-15)
        assert out.total_area() == pytest.approx(hexagon.total_area(), rel=1e-12)
        assert out.perimeter() == cone.perimeter()

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_area_grows_perimeter_fixed(self, seed, geometry):
        mesh = gen_random_disk(seed, 4, 8, geometry)
        for p in mesh.interior_vertices:
            for t in (1e-6, 0.01, 0.3, 2.0):
                out = apply_star_deformation(mesh, p, t)
                assert validate(out) == []
                assert out.total_area() > mesh.total_area()
                assert out.perimeter() == mesh.perimeter()

    def test_negative_t_rejected(self, cone):
        with pytest.raises(PreconditionError):
            apply_star_deformation(cone, 6, -1.0)


class TestDevelopStar:
    def test_hexagon_is_regular(self, hexagon):
        dev = develop_star(hexagon, 6)
        pts = np.array(dev.points)
        assert len(pts) == 6
        np.testing.assert_allclose(np.linalg.norm(pts - dev.center, axis=1), 1.0, atol=1e-14)
        # consecutive points a unit apart and turning by pi/3 about the center
        for k in range(6):
            assert np.linalg.norm(pts[(k + 1) % 6] - pts[k]) == pytest.approx(1.0, abs=1e-14)
            turn = signed_angle(EUCLIDEAN, dev.center, pts[k], pts[(k + 1) % 6])
            assert turn == pytest.approx(math.pi / 3, abs=1e-14)
        assert dev.closure_defect < 1e-12

    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_degree3_contains_center(self, geometry):
        mesh = degree3(geometry)
        dev = develop_star(mesh, 3)
        assert len(dev.points) == 3
        # center strictly left of each directed side
        for k in range(3):
            a = signed_angle(geometry, dev.points[k], dev.points[(k + 1) % 3], dev.center)
            assert 0 < a < math.pi

    @pytest.mark.parametrize("seed", range(8))
    def test_hyperbolic_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 9))
        ang = np.sort((np.arange(n) + rng.uniform(-0.3, 0.3, n)) * TWO_PI / n)
        rad = rng.uniform(0.2, 2.0, n)
        pts = [(0.0, 0.0)] + [(math.sinh(r) * math.cos(a), math.sinh(r) * math.sin(a)) for r, a in zip(rad, ang)]
        tris = [(0, 1 + k, 1 + (k + 1) % n) for k in range(n)]
        mesh = planar_mesh(pts, tris, HYPERBOLIC)
        dev = develop_star(mesh, 0)
        for (t, i), e, k in zip(dev.corners, dev.link_edges, range(n)):
            measured = distance(HYPERBOLIC, dev.points[k], dev.points[(k + 1) % n])
            assert measured == pytest.approx(mesh.lengths[e], abs=1e-9)

    def test_not_flat(self, cone):
        with pytest.raises(NotFlat):
            develop_star(cone, 6)


class TestRemoveFlatVertex:
    def test_hexagon(self, hexagon):
        log = []
        out = remove_flat_vertex(hexagon, 6, log)
        assert out.n_triangles == 4 and out.n_vertices == 6
        assert out.interior_vertices == ()
        assert out.total_area() == pytest.approx(HEX_AREA, rel=1e-9)
        assert out.perimeter() == hexagon.perimeter()
        assert validate(out) == []
        (rec,) = log
        assert rec.degree == 6 and rec.clipped_area == pytest.approx(rec.polygon_area, rel=1e-9)

    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_degree3_merges_to_one_triangle(self, geometry):
        mesh = degree3(geometry)
        out = remove_flat_vertex(mesh, 3)
        assert out.n_triangles == 1 and out.n_edges == 3
        link = {mesh.lengths[e] for e in mesh.boundary_edges}
        assert set(out.lengths) == link
        assert out.total_area() == pytest.approx(mesh.total_area(), rel=1e-9)
        assert abs(gauss_bonnet_residual(out)) < 1e-8

    def test_renumbers_vertices_above(self):
        # interior vertex 0 with link 1..6; after removal the rim is 0..5
        pts = [(0.0, 0.0)] + [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
        mesh = planar_mesh(pts, [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)])
        out = remove_flat_vertex(mesh, 0)
        assert sorted({v for tri in out.tri_verts for v in tri}) == list(range(6))
        assert validate(out) == []

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_flat_planar_meshes_collapse(self, seed, geometry):
        # triangulations of actual point sets are flat everywhere inside; hyperbolic
        # points are taken in the Klein chart, where geodesics are straight
        from scipy.spatial import Delaunay
        rng = np.random.default_rng(seed)
        n_rim = 7
        ang = (np.arange(n_rim) + rng.uniform(-0.4, 0.4, n_rim)) * TWO_PI / n_rim
        rim = [(0.9 * math.cos(a), 0.9 * math.sin(a)) for a in ang]
        inner = [(r * math.cos(a), r * math.sin(a))
                 for r, a in zip(rng.uniform(0.05, 0.45, 4), rng.uniform(0, TWO_PI, 4))]
        pts = np.array(rim + inner)
        tris = []
        for s in Delaunay(pts).simplices:
            a, b, c = (int(x) for x in s)
            cross = (pts[b] - pts[a])[0] * (pts[c] - pts[a])[1] - (pts[b] - pts[a])[1] * (pts[c] - pts[a])[0]
            tris.append((a, b, c) if cross > 0 else (a, c, b))
        if geometry.is_hyperbolic:
            pts = pts / np.sqrt(1.0 - (pts ** 2).sum(axis=1))[:, None]
        mesh = planar_mesh([tuple(p) for p in pts], tris, geometry)
        assert len(mesh.interior_vertices) == 4
        area0 = mesh.total_area()
        while mesh.interior_vertices:
            mesh = remove_flat_vertex(mesh, mesh.interior_vertices[0])
            assert abs(mesh.total_area() - area0) < 1e-9 * area0
            assert abs(gauss_bonnet_residual(mesh)) < 1e-8
            assert validate(mesh) == []


class TestFlatten:
    def test_cone(self, cone):
        result = flatten(cone)
        final, steps = result
        assert len(steps) == 1
        (step,) = steps
        assert step.chosen_vertex == 6 and step.flattened_vertex == 6
        assert step.t0 == pytest.approx(0.19, abs=1e-9)
        assert step.interior_singular_count_after == 0
        assert final.total_area() == pytest.approx(HEX_AREA, abs=1e-9)
        assert final.perimeter() == pytest.approx(6.0, abs=1e-12)
        rep = check_isoperimetric(final)
        assert rep.slack("Eq1") == pytest.approx(36 - 6 * math.sqrt(3) * math.pi, abs=1e-8)

    def test_no_interior_is_identity(self):
        mesh = gen_random_disk(7, 0, 4, EUCLIDEAN)
        final, steps = flatten(mesh)
        assert steps == [] and final == mesh

    def test_flat_center_removed_without_steps(self, hexagon):
        result = flatten(hexagon)
        assert result.steps == [] and result.mesh.interior_vertices == ()
        assert len(result.surgeries) == 1

    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_seed_42(self, geometry):
        mesh = gen_random_disk(42, 5, 8, geometry)
        final, steps = flatten(mesh)
        assert 1 <= len(steps) <= 5
        assert final.interior_vertices == ()
        L0 = mesh.perimeter()
        prev_area = mesh.total_area()
        prev_count = len(mesh.interior_vertices)
        for s in steps:
            assert s.area_after > s.area_before >= prev_area - 1e-9 * prev_area
            assert abs(s.perimeter - L0) < 1e-9 * L0
            assert s.interior_singular_count_after < prev_count
            prev_area, prev_count = s.area_after, s.interior_singular_count_after
        assert check_isoperimetric(final).slack(check_isoperimetric(final).main_key) >= -1e-9 * L0 ** 2
        assert check_isoperimetric(final).A >= check_isoperimetric(mesh).A

    @pytest.mark.parametrize("policy", sorted(POLICIES))
    def test_policies_agree_on_invariants(self, policy):
        mesh = gen_random_disk(3, 6, 10, HYPERBOLIC)
        result = flatten(mesh, policy, keep_snapshots=True)
        assert result.mesh.interior_vertices == ()
        assert abs(result.mesh.perimeter() - mesh.perimeter()) < 1e-9 * mesh.perimeter()
        for snap in result.snapshots:
            assert abs(gauss_bonnet_residual(snap)) < 1e-8
            # curvature safety: nothing went positive
            assert check_negative_curvature(snap).positive == ()

    def test_annulus_is_not_a_disk(self):
        with pytest.raises(NonDisk):
            flatten(annulus_mesh())

    def test_positive_curvature_rejected(self):
        mesh = gen_cone_disk(ConeDiskSpec(EUCLIDEAN, 4, 1.0, apex_angle=math.pi / 4))
        with pytest.raises(PreconditionError):
            flatten(mesh)

    def test_unknown_policy(self, cone):
        with pytest.raises(ValueError):
            flatten(cone, "nope")
