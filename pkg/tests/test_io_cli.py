import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from coneflat import io
from coneflat.cli import main
from coneflat.flatten import flatten
from coneflat.gen import ConeDiskSpec, gen_cone_disk, gen_random_disk
from coneflat.geometry import EUCLIDEAN, HYPERBOLIC, distance

from conftest import annulus_mesh

TRIANGLE_6_EDGES = """{
  "format_version": 1,
  "geometry": "euclidean",
  "edges": [
    {"length": 1}, {"length": 1}, {"length": 1},
    {"length": 1}, {"length": 1}, {"length": 1}
  ],
  "triangles": [
    {"v": [0, 1, 2], "e": [0, 1, 2]},
    {"v": [2, 1, 3], "e": [1, 999, 4]}
  ]
}
"""


@pytest.fixture
def hexagon():
    return gen_cone_disk(ConeDiskSpec(EUCLIDEAN, 6, 1.0, 1.0))


class TestSerialization:
    def test_hexagon_round_trip(self, hexagon, tmp_path):
        path = tmp_path / "hex.json"
        io.save(hexagon, path)
        back = io.load(path)
        assert back == hexagon
        assert back.metadata == hexagon.metadata

    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_lengths_bit_exact(self, geometry):
        mesh = gen_random_disk(5, 6, 11, geometry)
        back = io.loads(io.dumps(mesh))
        assert all(a.hex() == b.hex() for a, b in zip(mesh.lengths, back.lengths))
        assert back.tri_verts == mesh.tri_verts and back.tri_edges == mesh.tri_edges

    def test_awkward_floats_round_trip(self):
        rng = np.random.default_rng(0)
        for x in list(rng.uniform(0, 10, 200)) + [5e-324, 1.7976931348623157e308, 0.1, 1 / 3, 2.0 ** -40, 1e15 + 0.5]:
            assert float(io.format_length(float(x))) == float(x)

    def test_canonical_text(self, hexagon):
        assert io.dumps(hexagon) == io.dumps(io.loads(io.dumps(hexagon)))

    def test_edge_out_of_range(self):
        with pytest.raises(io.ParseError) as info:
            io.loads(TRIANGLE_6_EDGES)
        err = info.value
        assert "triangle 1" in str(err) and "999" in str(err)
        assert err.line == 10

    def test_triangle_inequality(self):
        text = json.dumps({"format_version": 1, "geometry": "euclidean",
                           "edges": [{"length": 1}, {"length": 1}, {"length": 2.5}],
                           "triangles": [{"v": [0, 1, 2], "e": [0, 1, 2]}]})
        with pytest.raises(io.ValidationError) as info:
            io.loads(text)
        (v,) = info.value.violations
        assert v.kind == "TriangleInequality" and v.ids == (0,)

    @pytest.mark.parametrize("text", [
        "{not json",
        "[]",
        '{"format_version": 1, "geometry": "euclidean", "edges": []}',
        '{"format_version": 2, "geometry": "euclidean", "edges": [], "triangles": []}',
        '{"format_version": 1, "geometry": "spherical", "edges": [], "triangles": []}',
        '{"format_version": 1, "geometry": "euclidean", "edges": [{"length": "x"}], "triangles": []}',
        '{"format_version": 1, "geometry": "euclidean", "edges": [{"length": 1}], "triangles": [{"v": [0, 1]}]}',
    ])
    def test_malformed(self, text):
        with pytest.raises(io.ParseError):
            io.loads(text)

    def test_report_round_trip(self, tmp_path):
        steps = flatten(gen_random_disk(42, 5, 8, EUCLIDEAN)).steps
        path = tmp_path / "r.jsonl"
        io.write_report(steps, path)
        assert io.read_report(path) == steps
        assert len(path.read_text().splitlines()) == len(steps)


class TestSvg:
    @pytest.mark.parametrize("geometry", [EUCLIDEAN, HYPERBOLIC])
    def test_parses_as_xml(self, geometry):
        mesh = gen_random_disk(2, 4, 7, geometry)
        root = ET.fromstring(io.to_svg(mesh))
        assert root.tag.endswith("svg")
        lines = [e for e in root.iter() if e.tag.endswith("line")]
        assert len(lines) == 3 * mesh.n_triangles

    def test_development_is_isometric(self):
        mesh = gen_random_disk(4, 3, 6, HYPERBOLIC)
        for t, tri in enumerate(io.develop_mesh(mesh)):
            for slot in range(3):
                d = distance(HYPERBOLIC, tri[slot], tri[(slot + 1) % 3])
                assert d == pytest.approx(mesh.lengths[mesh.tri_edges[t][slot]], abs=1e-9)


class TestCli:
    def test_cone_pipeline(self, tmp_path, capsys):
        c, f, r = tmp_path / "c.json", tmp_path / "f.json", tmp_path / "r.json"
        assert main(["gen", "cone", "--geometry", "euclidean", "--sectors", "6", "--legs", "0.9",
                     "--base", "1", "-o", str(c)]) == 0
        assert main(["flatten", str(c), "-o", str(f), "--report", str(r)]) == 0
        steps = [json.loads(line) for line in r.read_text().splitlines()]
        assert len(steps) == 1
        assert abs(steps[0]["t0"] - 0.19) < 1e-9
        assert {"vertex", "t0", "area_before", "area_after", "perimeter"} <= set(steps[0])
        capsys.readouterr()
        assert main(["check", str(f)]) == 0
        out = capsys.readouterr().out
        slack = float(out.split("Eq1:")[1].split("slack=")[1].split()[0])
        assert slack == pytest.approx(36 - 6 * math.sqrt(3) * math.pi, abs=1e-8)
        assert "3.35" in out

    def test_check_alexandrov_and_jobs(self, tmp_path, capsys):
        paths = []
        for seed in range(3):
            p = tmp_path / f"m{seed}.json"
            io.save(gen_random_disk(seed, 3, 6, HYPERBOLIC), p)
            paths.append(str(p))
        assert main(["check", "--alexandrov", "--jobs", "3", *paths]) == 0
        parallel = capsys.readouterr().out
        assert main(["check", "--alexandrov", *paths]) == 0
        assert capsys.readouterr().out == parallel
        assert parallel.count("Eq3:") == 3 and parallel.count("Eq2:") == 3

    def test_gen_random_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert main(["gen", "random", "--seed", "9", "--interior", "4", "--boundary", "7",
                         "--geometry", "hyperbolic", "-o", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_validate(self, tmp_path, capsys):
        good, bad = tmp_path / "good.json", tmp_path / "bad.json"
        io.save(gen_random_disk(1, 2, 5, EUCLIDEAN), good)
        bad.write_text(json.dumps({"format_version": 1, "geometry": "euclidean",
                                   "edges": [{"length": 1}, {"length": 1}, {"length": 2.5}],
                                   "triangles": [{"v": [0, 1, 2], "e": [0, 1, 2]}]}))
        assert main(["validate", str(good)]) == 0
        assert main(["validate", str(bad)]) == 2
        assert "TriangleInequality" in capsys.readouterr().out

    def test_flatten_annulus_is_nondisk(self, tmp_path, capsys):
        p = tmp_path / "annulus.json"
        io.save(annulus_mesh(), p)
        assert main(["flatten", str(p), "-o", str(tmp_path / "out.json")]) == 3
        assert "NonDisk" in capsys.readouterr().err

    def test_parse_error_exit(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text(TRIANGLE_6_EDGES)
        assert main(["flatten", str(p), "-o", str(tmp_path / "o.json")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.json")]) == 1

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["gen", "cone", "--sectors", "6"],
                                      ["gen", "cone", "--geometry", "flat", "--sectors", "6", "--legs", "1",
                                       "--base", "1", "-o", "x"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 1

    def test_export_svg(self, tmp_path):
        m, s = tmp_path / "m.json", tmp_path / "m.svg"
        io.save(gen_random_disk(3, 5, 9, HYPERBOLIC), m)
        assert main(["export-svg", str(m), "-o", str(s)]) == 0
        ET.parse(s)

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "c.json"
        proc = subprocess.run([sys.executable, "-m", "coneflat", "gen", "cone", "--geometry", "hyperbolic",
                               "--sectors", "8", "--legs", "1", "--apex-angle", str(math.pi / 3), "-o", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert io.load(out).geometry == HYPERBOLIC
