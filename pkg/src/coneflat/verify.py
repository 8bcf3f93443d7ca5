"""Isoperimetric inequalities and the discrete Gauss-Bonnet identity as checkers.

Nothing here judges a mesh; every check returns signed slack (left side
minus right side) and leaves the verdict to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Geometry
from .mesh import TWO_PI, ConeMesh

EQ1 = "Eq1"  # L^2 >= 4 pi A
EQ2 = "Eq2"  # L^2 >= 4 pi A + A^2
EQ3 = "Eq3"  # L^2 >= 2 (2 pi - kappa_plus) A - k A^2


@dataclass(frozen=True)
class InequalityEntry:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class IsoperimetricReport:
    geometry: Geometry
    L: float
    A: float
    kappa_plus: float
    entries: dict[str, InequalityEntry]

    def slack(self, key: str) -> float:
        return self.entries[key].slack

    @property
    def main_key(self) -> str:
        """Id of the inequality for the model space of the mesh."""
        return EQ2 if self.geometry.is_hyperbolic else EQ1

    def as_dict(self) -> dict:
        return {
            "geometry": self.geometry.name,
            "L": self.L,
            "A": self.A,
            "kappa_plus": self.kappa_plus,
            "inequalities": {k: {"lhs": e.lhs, "rhs": e.rhs, "slack": e.slack}
                             for k, e in self.entries.items()},
        }


def kappa_plus(mesh: ConeMesh) -> float:
    """Sum of the positive curvatures of interior vertices."""
    return math.fsum(max(TWO_PI - float(mesh.vertex_angles[v]), 0.0) for v in mesh.interior_vertices)


def _alexandrov_entry(geometry: Geometry, L: float, A: float, kp: float) -> InequalityEntry:
    return InequalityEntry(L * L, 2.0 * (TWO_PI - kp) * A - geometry.k * A * A)


def check_isoperimetric(mesh: ConeMesh) -> IsoperimetricReport:
    """Evaluate the isoperimetric inequality of the mesh's model space.

    Euclidean meshes get ``Eq1``, hyperbolic meshes ``Eq2``.
    """
    L, A = mesh.perimeter(), mesh.total_area()
    if mesh.geometry.is_hyperbolic:
        entries = {EQ2: InequalityEntry(L * L, 4.0 * math.pi * A + A * A)}
    else:
        entries = {EQ1: InequalityEntry(L * L, 4.0 * math.pi * A)}
    return IsoperimetricReport(mesh.geometry, L, A, kappa_plus(mesh), entries)


def check_alexandrov(mesh: ConeMesh) -> InequalityEntry:
    """``L^2 >= 2 (2 pi - kappa_plus) A - k A^2`` with ``k`` the model curvature."""
    return _alexandrov_entry(mesh.geometry, mesh.perimeter(), mesh.total_area(), kappa_plus(mesh))


def full_report(mesh: ConeMesh) -> IsoperimetricReport:
    """:func:`check_isoperimetric` with the ``Eq3`` entry added."""
    rep = check_isoperimetric(mesh)
    entries = dict(rep.entries)
    entries[EQ3] = _alexandrov_entry(mesh.geometry, rep.L, rep.A, rep.kappa_plus)
    return IsoperimetricReport(rep.geometry, rep.L, rep.A, rep.kappa_plus, entries)


def gauss_bonnet_residual(mesh: ConeMesh) -> float:
    r"""``sum_int (2pi - w) + sum_bdry (pi - theta) + k A - 2 pi chi``."""
    terms = []
    for v in range(mesh.n_vertices):
        omega = float(mesh.vertex_angles[v])
        terms.append(math.pi - omega if mesh.is_boundary(v) else TWO_PI - omega)
    terms.append(mesh.geometry.k * mesh.total_area())
    terms.append(-TWO_PI * mesh.euler_characteristic)
    return math.fsum(terms)
