"""Topology of bounded domains in 3-space through height functions.

Submodules: ``geometry`` (surfaces and generators), ``morse`` (critical
points), ``reeb`` (surface and solid Reeb graphs), ``wirg`` (weighted indexed
Reeb graphs), ``rewrite`` (graph simplification), ``diagram`` (closed
braid-like words), ``classify`` (rule-based verdicts), ``visibility`` (ray
sampling and basin analysis) and ``cli``.
"""

from .geometry import GeneratorSpec, TriSurface, generate, load_surface, make_surface
from .morse import HeightFunction, critical_points, perturb_to_morse

__version__ = "0.1.0"

__all__ = [
    "GeneratorSpec",
    "TriSurface",
    "generate",
    "load_surface",
    "make_surface",
    "HeightFunction",
    "critical_points",
    "perturb_to_morse",
]
