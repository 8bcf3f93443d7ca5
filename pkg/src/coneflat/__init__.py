"""Elimination of negatively curved cone points from euclidean and hyperbolic cone disks."""

from .flatten import DeformationStep, FlattenResult, apply_star_deformation, develop_star, find_t0, flatten, remove_flat_vertex
from .gen import ConeDiskSpec, gen_cone_disk, gen_random_disk
from .geometry import EUCLIDEAN, HYPERBOLIC, Geometry, TriangleSides
from .mesh import ConeMesh, check_negative_curvature, validate
from .verify import check_alexandrov, check_isoperimetric, gauss_bonnet_residual

__all__ = [
    "ConeDiskSpec",
    "ConeMesh",
    "DeformationStep",
    "EUCLIDEAN",
    "FlattenResult",
    "Geometry",
    "HYPERBOLIC",
    "TriangleSides",
    "apply_star_deformation",
    "check_alexandrov",
    "check_isoperimetric",
    "check_negative_curvature",
    "develop_star",
    "find_t0",
    "flatten",
    "gauss_bonnet_residual",
    "gen_cone_disk",
    "gen_random_disk",
    "remove_flat_vertex",
    "validate",
]
