"""Boundary visibility: ray sampling and the basin automaton.

A boundary point is visible when some ray leaving it meets the domain
nowhere else.  Sampling can only ever confirm visibility, so points are
reported as ``visible`` (with a verified witness direction) or ``unknown``.
Invisibility is argued combinatorially by :func:`basin_analysis`, which
follows the boundary circles of a basin upward from each concave minimum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingMarks
from .geometry import TriSurface
from .morse import CONCAVE, CONVEX, DOWN, UP
from .wirg import WIRG

__all__ = [
    "VisibilityReport",
    "BasinVerdict",
    "sample_surface_points",
    "hemisphere_directions",
    "ray_hits_watertight",
    "ray_hits_moller",
    "sample_visibility",
    "basin_events",
    "basin_analysis",
    "visibility_verdict",
    "VERDICT_TEXT",
]

EPS_REL = 1e-6
_CHUNK = 64


# --- ray casting ---------------------------------------------------------------


def ray_hits_watertight(tri: np.ndarray, origin: np.ndarray, dirs: np.ndarray, tmin: float = 0.0) -> np.ndarray:
    """For each direction, whether the ray from ``origin`` meets any triangle at t > tmin.

    Watertight test: the scene is sheared so the ray becomes the +z axis and
    the edge functions are evaluated in 2D, so rays through shared edges or
    vertices never slip between neighbouring triangles.
    """
    tri = np.asarray(tri, dtype=float) - origin
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    out = np.zeros(len(dirs), dtype=bool)
    kz = np.argmax(np.abs(dirs), axis=1)
    kx = (kz + 1) % 3
    ky = (kx + 1) % 3
    flip = dirs[np.arange(len(dirs)), kz] < 0
    kx, ky = np.where(flip, ky, kx), np.where(flip, kx, ky)
    perm = np.stack([kx, ky, kz], axis=1)
    for p in np.unique(perm, axis=0):
        idx = np.flatnonzero((perm == p).all(axis=1))
        P = tri[:, :, p]  # (F, 3 vertices, 3 coords) in ray-aligned axis order
        for start in range(0, len(idx), _CHUNK):
            sel = idx[start : start + _CHUNK]
            d = dirs[sel][:, p]
            sx = (d[:, 0] / d[:, 2])[:, None]
            sy = (d[:, 1] / d[:, 2])[:, None]
            sz = (1.0 / d[:, 2])[:, None]
            A, B, C = P[:, 0], P[:, 1], P[:, 2]
            ax, ay = A[:, 0] - sx * A[:, 2], A[:, 1] - sy * A[:, 2]
            bx, by = B[:, 0] - sx * B[:, 2], B[:, 1] - sy * B[:, 2]
            cx, cy = C[:, 0] - sx * C[:, 2], C[:, 1] - sy * C[:, 2]
            U = cx * by - cy * bx
            V = ax * cy - ay * cx
            W = bx * ay - by * ax
            inside = ((U >= 0) & (V >= 0) & (W >= 0)) | ((U <= 0) & (V <= 0) & (W <= 0))
            det = U + V + W
            T = sz * (U * A[:, 2] + V * B[:, 2] + W * C[:, 2])
            hit = inside & (det != 0) & (T * np.sign(det) > tmin * np.abs(det))
            out[sel] = hit.any(axis=1)
    return out


def ray_hits_moller(tri: np.ndarray, origin: np.ndarray, d: np.ndarray, tmin: float = 0.0, eps: float = 1e-12) -> bool:
    """Moller-Trumbore check of a single ray; kept independent of the watertight code."""
    tri = np.asarray(tri, dtype=float)
    v0, e1, e2 = tri[:, 0], tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]
    pv = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pv)
    ok = np.abs(det) > eps
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tv = origin - v0
    u = np.einsum("ij,ij->i", tv, pv) * inv
    qv = np.cross(tv, e1)
    v = (qv @ d) * inv
    t = np.einsum("ij,ij->i", e2, qv) * inv
    # edge hits count, with a small slack so the check errs toward "blocked"
    tol = 1e-9
    hit = ok & (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol) & (t > tmin)
    return bool(hit.any())


# --- sampling ----------------------------------------------------------------------


def sample_surface_points(s: TriSurface, n: int, rng: np.random.Generator):
    """Area-weighted random boundary points with their triangle's outward unit normal."""
    a = s.areas()
    f = rng.choice(len(a), size=n, p=a / a.sum())
    r1, r2 = rng.random(n), rng.random(n)
    sq = np.sqrt(r1)
    w = np.stack([1 - sq, sq * (1 - r2), sq * r2], axis=1)
    pts = np.einsum("ij,ijk->ik", w, s.vertices[s.triangles[f]])
    return pts, s.face_normals()[f], f


def _nearest_faces(s: TriSurface, points: np.ndarray) -> np.ndarray:
    from scipy.spatial import cKDTree

    cent = s.vertices[s.triangles].mean(axis=1)
    return cKDTree(cent).query(points)[1]


def hemisphere_directions(normal: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` stratified directions over the hemisphere around ``normal``.

    The first direction is the normal itself.  Strata are ordered by
    decreasing cosine with the normal, and the cosine is drawn with density
    proportional to itself, so the budget is spent near the normal first.
    """
    normal = normal / np.linalg.norm(normal)
    if n <= 1:
        return normal[None, :]
    m = n - 1
    i = np.arange(m)
    cos = np.sqrt(1.0 - (i + rng.random(m)) / m)
    cos = np.clip(cos, 1e-6, 1.0)
    phi = 2 * np.pi * ((i * 0.6180339887498949 + rng.random()) % 1.0)
    sin = np.sqrt(1.0 - cos**2)
    a = np.eye(3)[int(np.argmin(np.abs(normal)))]
    u = np.cross(normal, a)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    d = cos[:, None] * normal + sin[:, None] * (np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v)
    return np.vstack([normal, d])


@dataclass
class VisibilityReport:
    points: np.ndarray
    status: list[str]
    witness: list[list[float] | None]
    rays_used: int
    rays_per_point: int
    rejected: int = 0  # witnesses the cross-check refused

    @property
    def fraction_visible(self) -> float:
        return sum(st == "visible" for st in self.status) / max(len(self.status), 1)

    def to_document(self) -> dict:
        return {
            "summary": {
                "samples": len(self.status),
                "visible": sum(st == "visible" for st in self.status),
                "unknown": sum(st == "unknown" for st in self.status),
                "fraction_visible": self.fraction_visible,
                "rays_per_point": self.rays_per_point,
                "rays_used": self.rays_used,
                "witnesses_rejected": self.rejected,
            },
            "points": [
                {"point": [float(x) for x in p], "status": st, "witness": w}
                for p, st, w in zip(self.points, self.status, self.witness)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2) + "\n"

    def to_ply(self) -> str:
        """ASCII point cloud, visible points green and unknown points red."""
        lines = [
            "ply",
            "format ascii 1.0",
            f"element vertex {len(self.points)}",
            "property float x",
            "property float y",
            "property float z",
            "property uchar red",
            "property uchar green",
            "property uchar blue",
            "end_header",
        ]
        for p, st in zip(self.points, self.status):
            rgb = "0 200 0" if st == "visible" else "220 0 0"
            lines.append(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g} {rgb}")
        return "\n".join(lines) + "\n"


def sample_visibility(
    s: TriSurface,
    samples: int = 1000,
    rays: int = 256,
    seed: int = 0,
    points: np.ndarray | None = None,
) -> VisibilityReport:
    """Search for escaping rays from boundary points.

    Parameters
    ----------
    s : TriSurface
    samples : int
        Number of area-weighted random points; ignored if ``points`` is given.
    rays : int
        Direction budget per point, the outward normal included.
    seed : int
    points : array, optional
        Explicit boundary points; each takes the normal of the triangle with
        the nearest centroid.

    Returns
    -------
    VisibilityReport
        Every ``visible`` entry carries a direction that both intersection
        routines agree misses the surface.
    """
    rng = np.random.default_rng(seed)
    if points is None:
        pts, nrm, _ = sample_surface_points(s, samples, rng)
    else:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        nrm = s.face_normals()[_nearest_faces(s, pts)]
    tri = s.vertices[s.triangles]
    eps = EPS_REL * s.bbox_diagonal
    status, wit = [], []
    used = rejected = 0
    for p, n in zip(pts, nrm):
        o = p + eps * n
        dirs = hemisphere_directions(n, rays, rng)
        # the normal ray goes alone since it settles most points
        blocks = [dirs[:1]] + [dirs[i : i + _CHUNK] for i in range(1, len(dirs), _CHUNK)]
        found = None
        for block in blocks:
            hits = ray_hits_watertight(tri, o, block)
            for k in range(len(block)):
                used += 1
                if hits[k]:
                    continue
                if ray_hits_moller(tri, o, block[k]):
                    rejected += 1
                    continue
                found = block[k]
                break
            if found is not None:
                break
        status.append("visible" if found is not None else "unknown")
        wit.append(None if found is None else [float(x) for x in found])
    return VisibilityReport(pts, status, wit, used, rays, rejected)



# --- basin automaton ------------------------------------------------------------

SPLIT, MERGE, CAP = "split", "merge", "cap"
INTERIOR, EXTERIOR = "interior", "exterior"
OUTCOMES = ("invisible-witness", "cancellable-pair", "continues", "sphere-anomaly")

VERDICT_TEXT = {
    "handlebody": "handlebody — visibility unobstructed at Reeb level",
    "minNCP": "under minNCP: not isotopically visible (invisible-witness found at minimal critical count)",
    "reducible": "reducible — rerun after simplify (cancellable pairs present)",
}


@dataclass(frozen=True)
class BasinVerdict:
    """Fate of the basin opened by one concave minimum.

    ``cases`` lists the case numbers met in order (1-6).  ``witness`` names
    the critical point that cannot be seen, ``pair`` the two critical points
    that cancel.
    """

    minimum: str
    cases: tuple[int, ...]
    outcome: str
    witness: str | None = None
    pair: tuple[str, str] | None = None
    events: tuple = field(default=(), compare=False)

    def to_document(self) -> dict:
        return {
            "minimum": self.minimum,
            "cases": list(self.cases),
            "outcome": self.outcome,
            "witness": self.witness,
            "pair": list(self.pair) if self.pair else None,
        }


def _side(ev: dict, g: WIRG) -> str:
    if "side" in ev:
        return ev["side"]
    normal = ev.get("saddle_normal")
    if normal is None and ev.get("node") is not None:
        normal = g.node(ev["node"]).saddle_normal
    if normal is None:
        raise MissingMarks(f"event at {ev.get('node')} has neither a side nor a saddle normal")
    return INTERIOR if normal == DOWN else EXTERIOR


def _run(g: WIRG, minimum: str, events: list[dict]) -> BasinVerdict:
    k = 0  # extra boundary circles of the basin; 0 is the disk stage
    cases: list[int] = []
    last_pinch = None
    for ev in events:
        kind, node = ev["kind"], ev["node"]
        if kind == SPLIT:
            if _side(ev, g) == INTERIOR:
                cases.append(1)
                return BasinVerdict(minimum, tuple(cases), "invisible-witness", witness=node, events=tuple(events))
            cases.append(2)
            k = ev["circles"] - 1 if "circles" in ev else k + 1
            last_pinch = node
        elif kind == MERGE:
            if _side(ev, g) == EXTERIOR:
                cases.append(3)
                return BasinVerdict(minimum, tuple(cases), "cancellable-pair", pair=(minimum, node), events=tuple(events))
            cases.append(4)
            return BasinVerdict(
                minimum, tuple(cases), "invisible-witness", witness=ev.get("witness", node), events=tuple(events)
            )
        elif kind == CAP:
            side = ev.get("side", EXTERIOR if k == 0 else None)
            if side is None:
                raise MissingMarks(f"cap event at {node} needs a side once the basin has several boundary circles")
            if k == 0 or side == EXTERIOR:
                cases.append(5)
                return BasinVerdict(minimum, tuple(cases), "sphere-anomaly", witness=node, events=tuple(events))
            cases.append(6)
            return BasinVerdict(
                minimum, tuple(cases), "cancellable-pair", pair=(last_pinch or minimum, node), events=tuple(events)
            )
        else:
            raise ValueError(f"unknown basin event kind {kind!r}")
    return BasinVerdict(minimum, tuple(cases), "continues", events=tuple(events))


def _descend_to_minimum(a, seg: int) -> str | None:
    """A critical point of index 0 below the surface arc carrying ``seg``, convex ones first."""
    sg = a.surface_graph
    idx = {n.id: c.index for n, c in zip(sg.nodes, a.crit)}
    conv = {n.id: c.convexity for n, c in zip(sg.nodes, a.crit)}
    below: dict[str, list[str]] = {}
    for e in sg.edges:
        below.setdefault(e.upper, []).append(e.lower)
    start = next(e.lower for e in sg.edges if e.id == a.arc_edge_id[int(a.arc_of_seg[seg])])
    seen, stack, found = {start}, [start], []
    while stack:
        x = stack.pop()
        if idx[x] == 0:
            found.append(x)
        for y in below.get(x, []):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if not found:
        return None
    return min(found, key=lambda x: (conv[x] != CONVEX, x))


def basin_events(a) -> dict[str, list[dict]]:
    """Derive basin events for every concave minimum from a sweep.

    The basin's boundary circles are followed upward through the slabs.  A
    saddle whose lower circles all bound the basin is a pinch; a saddle that
    joins a basin circle to another circle is an arrival, interior when the
    other circle sits directly inside a basin hole; a maximum on a basin
    circle is a cap, interior when that circle bounds an island.
    """
    from .reeb import node_id

    out: dict[str, list[dict]] = {}
    m = len(a.crit)
    for j0, c in enumerate(a.crit):
        if c.index != 0 or c.convexity != CONCAVE:
            continue
        B = set(a.upper_segs[j0])
        evs: list[dict] = []
        for j in range(j0 + 1, m):
            cj = a.crit[j]
            low = a.lower_segs[j]
            touch = low & B
            if not touch:
                B = {b for x, b in a.continuations[j] if x in B}
                continue
            sec = a.sections[j - 1]
            by_label = {ci.label: ci for ci in sec.circles}
            nid = node_id(cj.vertex)
            if cj.index == 1 and low <= B:
                ev = {"node": nid, "kind": SPLIT, "saddle_normal": cj.saddle_normal}
                ev["side"] = INTERIOR if cj.saddle_normal == DOWN else EXTERIOR
                evs.append(ev)
                if ev["side"] == INTERIOR:
                    break
                B = {b for x, b in a.continuations[j] if x in B} | set(a.upper_segs[j])
                ev["circles"] = len(B)
                continue
            if cj.index == 1:
                (other,) = low - B
                oc = by_label[other]
                parent = sec.circles[oc.parent] if oc.parent is not None else None
                interior = parent is not None and parent.label in B and parent.depth % 2 == 1
                ev = {"node": nid, "kind": MERGE, "side": INTERIOR if interior else EXTERIOR}
                if interior:
                    w = _descend_to_minimum(a, other)
                    if w is not None:
                        ev["witness"] = w
                evs.append(ev)
                break
            (seg,) = touch
            side = EXTERIOR if by_label[seg].depth % 2 == 1 else INTERIOR
            evs.append({"node": nid, "kind": CAP, "side": side})
            break
        out[node_id(c.vertex)] = evs
    return out


def basin_analysis(g: WIRG, events: dict | None = None, analysis=None) -> list[BasinVerdict]:
    """Run the basin automaton from every concave index-0 node.

    Parameters
    ----------
    g : WIRG
        Needs convexity marks on extrema.
    events : dict, optional
        ``{minimum id: [event, ...]}``.  An event is a dict with ``node``,
        ``kind`` (split, merge or cap) and ``side`` (interior or exterior);
        a split may give ``saddle_normal`` instead of ``side``, and an
        interior merge may name the arriving convex minimum as ``witness``.
    analysis : ReebAnalysis, optional
        Source of events for minima not covered by ``events``.

    Raises
    ------
    MissingMarks
        If an extremum lacks its convexity, or a concave minimum has no
        events and no sweep to derive them from.
    """
    unmarked = [n.id for n in g.nodes if n.index in (0, 2) and n.convexity is None]
    if unmarked:
        raise MissingMarks(f"extrema without convexity marks: {', '.join(sorted(unmarked))}")
    mins = sorted(n.id for n in g.nodes if n.index == 0 and n.convexity == CONCAVE)
    events = dict(events or {})
    if analysis is not None:
        for k, v in basin_events(analysis).items():
            events.setdefault(k, v)
    missing = [x for x in mins if x not in events]
    if missing:
        raise MissingMarks(f"no basin events for concave minima: {', '.join(missing)}")
    return [_run(g, x, list(events[x])) for x in mins]


def visibility_verdict(report, basins: list[BasinVerdict]) -> str:
    """One conditional statement combining the rule table with the basin verdicts.

    Cancellable pairs take precedence, since a simpler representative may
    change every other answer.
    """
    if any(b.outcome == "cancellable-pair" for b in basins):
        return VERDICT_TEXT["reducible"]
    if any(b.outcome == "invisible-witness" for b in basins):
        return VERDICT_TEXT["minNCP"]
    return VERDICT_TEXT["handlebody"]
