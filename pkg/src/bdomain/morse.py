"""Discrete Morse height functions on triangle surfaces.

Heights are projections onto a unit direction; equal heights are separated
by vertex index (simulation of simplicity), so every vertex has a strict
rank.  A vertex is classified by the number of connected components of its
lower link, read off the cyclically ordered one-ring.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NotMorseAfterTieBreak, PerturbationFailed
from .geometry import TriSurface, vertex_normals

__all__ = [
    "HeightFunction",
    "CriticalPoint",
    "critical_points",
    "perturb_to_morse",
    "is_morse",
    "vertex_ranks",
    "vertex_links",
    "critical_points_json",
    "euler_sum",
]

CONVEX, CONCAVE = "convex", "concave"
UP, DOWN = "up", "down"


@dataclass(frozen=True)
class HeightFunction:
    """Height = <direction, v>; ties broken by increasing vertex index."""

    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    tie_break: str = "index"

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        n = float(np.linalg.norm(d))
        if d.shape != (3,) or n == 0.0 or not np.isfinite(n):
            raise ValueError("direction must be a non-zero 3-vector")
        object.__setattr__(self, "direction", tuple(float(x) for x in d / n))
        if self.tie_break != "index":
            raise ValueError("only the lexicographic 'index' tie-break is supported")

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.direction)

    def heights(self, s: TriSurface) -> np.ndarray:
        return s.vertices @ self.vector


@dataclass(frozen=True)
class CriticalPoint:
    vertex: int
    height: float
    index: int
    multiplicity: int = 1
    convexity: str | None = None  # extrema only
    saddle_normal: str | None = None  # saddles only
    rank: int = field(default=-1, compare=False)

    def to_row(self) -> dict:
        return {
            "vertex": self.vertex,
            "height": self.height,
            "index": self.index,
            "multiplicity": self.multiplicity,
            "convexity": self.convexity,
            "saddle_normal": self.saddle_normal,
        }


_link_cache: "weakref.WeakKeyDictionary[TriSurface, list[np.ndarray]]" = weakref.WeakKeyDictionary()


def vertex_links(s: TriSurface) -> list[np.ndarray]:
    """One-ring of every vertex as a cyclically ordered array of neighbours."""
    cached = _link_cache.get(s)
    if cached is not None:
        return cached
    nxt: list[dict[int, int]] = [dict() for _ in range(s.n_vertices)]
    for a, b, c in s.triangles.tolist():
        nxt[a][b] = c
        nxt[b][c] = a
        nxt[c][a] = b
    links = []
    for ring in nxt:
        start = min(ring)
        order = [start]
        cur = ring[start]
        while cur != start:
            order.append(cur)
            cur = ring[cur]
        links.append(np.array(order, dtype=np.int64))
    _link_cache[s] = links
    return links


def vertex_ranks(s: TriSurface, h: HeightFunction) -> np.ndarray:
    heights = h.heights(s)
    order = np.lexsort((np.arange(s.n_vertices), heights))
    rank = np.empty(s.n_vertices, dtype=np.int64)
    rank[order] = np.arange(s.n_vertices)
    return rank


def critical_points(s: TriSurface, h: HeightFunction, strict: bool = False) -> list[CriticalPoint]:
    """All critical vertices in increasing height (rank) order.

    With ``strict`` a saddle of multiplicity above one raises
    :class:`NotMorseAfterTieBreak`.
    """
    heights = h.heights(s)
    rank = vertex_ranks(s, h)
    links = vertex_links(s)
    normals = None
    d = h.vector
    found = []
    for v, ring in enumerate(links):
        lower = rank[ring] < rank[v]
        n_low = int(lower.sum())
        if n_low == 0:
            index, mult = 0, 1
        elif n_low == len(ring):
            index, mult = 2, 1
        else:
            starts = int(np.count_nonzero(lower & ~np.roll(lower, 1)))
            if starts == 1:
                continue
            index, mult = 1, starts - 1
        found.append((v, index, mult))
    if found:
        normals = vertex_normals(s)
    out = []
    for v, index, mult in found:
        if strict and mult > 1:
            raise NotMorseAfterTieBreak(f"vertex {v} is a saddle of multiplicity {mult}")
        up = float(normals[v] @ d)
        convexity = saddle_normal = None
        if index == 0:
            convexity = CONVEX if up < 0 else CONCAVE
        elif index == 2:
            convexity = CONVEX if up > 0 else CONCAVE
        else:
            saddle_normal = UP if up > 0 else DOWN
        out.append(
            CriticalPoint(v, float(heights[v]), index, mult, convexity, saddle_normal, int(rank[v]))
        )
    out.sort(key=lambda c: c.rank)
    return out


def euler_sum(crit: list[CriticalPoint]) -> int:
    """#index-0 minus saddle multiplicities plus #index-2."""
    return sum((-1) ** c.index * c.multiplicity for c in crit)


def is_morse(s: TriSurface, h: HeightFunction, crit: list[CriticalPoint] | None = None) -> bool:
    """Simple saddles only and pairwise distinct critical values (gap above 1e-9 of the bbox)."""
    crit = critical_points(s, h) if crit is None else crit
    if any(c.multiplicity > 1 for c in crit):
        return False
    hs = np.array([c.height for c in crit])
    return bool(np.all(np.diff(hs) > 1e-9 * s.bbox_diagonal))


def perturb_to_morse(
    s: TriSurface, h: HeightFunction, seed: int = 0, max_attempts: int = 100, max_angle: float = 1e-3
) -> HeightFunction:
    """Smallest deterministic rotation of the direction that makes ``h`` Morse.

    Already-Morse inputs are returned unchanged.  Rotations stay within
    ``max_angle`` radians of the original direction.
    """
    if is_morse(s, h):
        return h
    rng = np.random.default_rng(seed)
    d = h.vector
    for attempt in range(max_attempts):
        axis = rng.normal(size=3)
        axis -= (axis @ d) * d
        axis /= np.linalg.norm(axis)
        angle = max_angle * (0.25 + 0.75 * rng.random())
        nd = d * np.cos(angle) + np.cross(axis, d) * np.sin(angle)
        cand = HeightFunction(tuple(nd), h.tie_break)
        if is_morse(s, cand):
            return cand
    raise PerturbationFailed(f"no Morse direction within {max_angle} rad after {max_attempts} attempts")


def critical_points_json(crit: list[CriticalPoint]) -> str:
    return json.dumps([c.to_row() for c in crit], indent=1)
