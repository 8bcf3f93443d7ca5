"""Command line driver.

Exit codes: 0 success, 1 usage, 2 parse or validation failure, 3 algorithmic
failure.  ``CONE_FLATTEN_LOG`` (quiet, info, debug) sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import io
from .flatten import POLICIES, FlattenError, NonDisk, flatten
from .gen import ConeDiskSpec, GenerationFailed, InvalidSpec, gen_cone_disk, gen_random_disk
from .geometry import Geometry, GeometryError, NumericalInvariantError
from .mesh import FLAT_TOL, validate
from .polygon import PolygonError
from .verify import EQ3, check_alexandrov, check_isoperimetric, gauss_bonnet_residual

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_ALGO = 0, 1, 2, 3

logger = logging.getLogger("coneflat")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _geometry(name: str) -> Geometry:
    try:
        return Geometry.from_name(name)
    except GeometryError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coneflat", description="Eliminate negatively curved cone points from cone disks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check mesh invariants")
    p.add_argument("mesh")

    p = sub.add_parser("flatten", help="eliminate all interior cone points")
    p.add_argument("mesh")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--tol", type=float, default=FLAT_TOL, help="flat-vertex tolerance (default %(default)g)")
    p.add_argument("--report", help="write one JSON line per deformation step")
    p.add_argument("--policy", choices=sorted(POLICIES), default="min-degree")

    p = sub.add_parser("check", help="isoperimetric slack and Gauss-Bonnet residual")
    p.add_argument("mesh", nargs="+")
    p.add_argument("--alexandrov", action="store_true", help="also evaluate Eq3")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gen", help="write a generated mesh")
    gsub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    c = gsub.add_parser("cone")
    c.add_argument("--geometry", type=_geometry, required=True)
    c.add_argument("--sectors", type=int, required=True)
    c.add_argument("--legs", type=float, required=True)
    grp = c.add_mutually_exclusive_group(required=True)
    grp.add_argument("--base", type=float)
    grp.add_argument("--apex-angle", type=float, help="sector angle at the apex, radians")
    c.add_argument("-o", "--output", required=True)
    r = gsub.add_parser("random")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--interior", type=int, required=True)
    r.add_argument("--boundary", type=int, required=True)
    r.add_argument("--geometry", type=_geometry, required=True)
    r.add_argument("-o", "--output", required=True)

    p = sub.add_parser("export-svg", help="draw a development of the mesh")
    p.add_argument("mesh")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=int, default=600)
    return parser


def _check_text(path: str, alexandrov: bool) -> str:
    mesh = io.load(path)
    rep = check_isoperimetric(mesh)
    lines = [
        f"file: {path}",
        f"geometry: {rep.geometry.name}",
        f"L: {rep.L!r}",
        f"A: {rep.A!r}",
        f"kappa_plus: {rep.kappa_plus!r}",
    ]
    entries = dict(rep.entries)
    if alexandrov:
        entries[EQ3] = check_alexandrov(mesh)
    for key, e in entries.items():
        lines.append(f"{key}: lhs={e.lhs!r} rhs={e.rhs!r} slack={e.slack!r}")
    lines.append(f"gauss_bonnet_residual: {gauss_bonnet_residual(mesh)!r}")
    return "\n".join(lines)


def _run(args) -> int:
    if args.command == "validate":
        mesh = io.load(args.mesh, check=False)
        violations = validate(mesh)
        for v in violations:
            print(v)
        if violations:
            return EXIT_INPUT
        print(f"ok: {mesh.n_vertices} vertices, {mesh.n_edges} edges, {mesh.n_triangles} triangles")
        return EXIT_OK

    if args.command == "flatten":
        mesh = io.load(args.mesh)
        result = flatten(mesh, args.policy, flat_tol=args.tol)
        io.save(result.mesh, args.output)
        if args.report:
            io.write_report(result.steps, args.report)
        print(f"{len(result.steps)} steps; area {mesh.total_area()!r} -> {result.mesh.total_area()!r}; "
              f"perimeter {result.mesh.perimeter()!r}")
        return EXIT_OK

    if args.command == "check":
        if args.jobs > 1 and len(args.mesh) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                texts = list(pool.map(lambda p: _check_text(p, args.alexandrov), args.mesh))
        else:
            texts = [_check_text(p, args.alexandrov) for p in args.mesh]
        print("\n\n".join(texts))
        return EXIT_OK

    if args.command == "gen":
        if args.kind == "cone":
            spec = ConeDiskSpec(args.geometry, args.sectors, args.legs, args.base, args.apex_angle)
            mesh = gen_cone_disk(spec)
        else:
            mesh = gen_random_disk(args.seed, args.interior, args.boundary, args.geometry)
        io.save(mesh, args.output)
        return EXIT_OK

    if args.command == "export-svg":
        io.save_svg(io.load(args.mesh), args.output, args.size)
        return EXIT_OK
    raise UsageError(f"unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    level = _LOG_LEVELS.get(os.environ.get("CONE_FLATTEN_LOG", "quiet").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (UsageError, InvalidSpec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.ParseError, io.ValidationError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonDisk as exc:
        print(f"error: NonDisk: {exc}", file=sys.stderr)
        return EXIT_ALGO
    except (FlattenError, GenerationFailed, GeometryError, PolygonError, NumericalInvariantError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ALGO


if __name__ == "__main__":
    sys.exit(main())
