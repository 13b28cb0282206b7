"""Surface and solid Reeb graphs of a height function on a closed surface.

The sweep works in rank space.  Between two consecutive critical ranks the
open slab of the surface is a disjoint union of cylinders ("segments"); each
mesh edge contributes one piece per slab it crosses and triangles glue the
pieces together.  Segments continue across a critical level through mesh
edges that span it, except at the critical vertex itself, which is where the
surface Reeb graph gets its nodes.

The solid Reeb graph reads one regular cross section per slab, groups its
circles into planar regions by nesting parity, and stitches regions of
neighbouring slabs through the surface continuations.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CriticalHeight, GraphNotConnected, NotMorse
from .geometry import TriSurface
from .morse import CriticalPoint, HeightFunction, critical_points, is_morse, vertex_ranks
from .wirg import WEdge, WIRG, WNode

__all__ = [
    "ReebNode",
    "ReebEdge",
    "ReebGraph",
    "Circle",
    "Region",
    "CrossSection",
    "ReebMap",
    "ReebAnalysis",
    "surface_reeb",
    "cross_section",
    "solid_reeb",
    "analyze",
    "slice_circles",
    "node_id",
]


def node_id(vertex: int) -> str:
    return f"v{vertex}"


# --------------------------------------------------------------------------
# graph containers


@dataclass(frozen=True)
class ReebNode:
    id: str
    height: float
    source: int | None  # critical vertex


@dataclass(frozen=True)
class ReebEdge:
    id: str
    lower: str
    upper: str


@dataclass(frozen=True)
class ReebGraph:
    nodes: tuple[ReebNode, ...]
    edges: tuple[ReebEdge, ...]
    flavor: str  # "surface" or "solid"

    def degree(self, nid: str) -> int:
        return sum((e.lower == nid) + (e.upper == nid) for e in self.edges)

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        for n in self.nodes:
            g.add_node(n.id, height=n.height)
        for e in self.edges:
            g.add_edge(e.lower, e.upper, key=e.id)
        return g

    def betti1(self) -> int:
        g = self.to_networkx()
        if not self.nodes or not nx.is_connected(g):
            raise GraphNotConnected(f"{self.flavor} Reeb graph is not connected")
        return len(self.edges) - len(self.nodes) + 1

    def to_document(self) -> dict:
        return {
            "flavor": self.flavor,
            "nodes": [{"id": n.id, "height": n.height, "source": n.source} for n in self.nodes],
            "edges": [{"id": e.id, "lower": e.lower, "upper": e.upper} for e in self.edges],
        }

    def to_dot(self, weights: dict[str, int] | None = None, index: dict[str, int] | None = None) -> str:
        lines = [f'graph "reeb_{self.flavor}" {{', "  rankdir=BT;"]
        for n in self.nodes:
            label = f"{n.id}\\nh={n.height:.6g}"
            if index and n.id in index:
                label += f"\\ni={index[n.id]}"
            lines.append(f'  "{n.id}" [label="{label}"];')
        for e in self.edges:
            attrs = f'id="{e.id}"'
            if weights is not None:
                attrs += f', label="{weights[e.id]}"'
            lines.append(f'  "{e.lower}" -- "{e.upper}" [{attrs}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Circle:
    """A level circle: closed polyline, projected 2-D coordinates and mesh edges crossed."""

    points: np.ndarray  # (n, 3)
    plane: np.ndarray  # (n, 2) in a right-handed (u, w, d) frame
    mesh_edges: np.ndarray  # (n,) indices into s.edges()
    area: float  # signed; outer boundaries are clockwise (negative)
    depth: int
    parent: int | None
    label: int | None = None  # surface segment, when known


@dataclass(frozen=True)
class Region:
    outer: int
    holes: tuple[int, ...]

    @property
    def circles(self) -> tuple[int, ...]:
        return (self.outer, *self.holes)

    @property
    def weight(self) -> int:
        return len(self.holes)


@dataclass(frozen=True)
class CrossSection:
    height: float
    circles: tuple[Circle, ...]
    regions: tuple[Region, ...]

    @property
    def weights(self) -> list[int]:
        return [r.weight for r in self.regions]

    @property
    def orientation_consistent(self) -> bool:
        """Outer circles turn clockwise and holes counter-clockwise."""
        return all((c.area < 0) == (c.depth % 2 == 0) for c in self.circles)

    def region_of(self, circle: int) -> int:
        for i, r in enumerate(self.regions):
            if circle in r.circles:
                return i
        raise KeyError(circle)


@dataclass(frozen=True)
class ReebMap:
    """Surface edge -> solid edges met in height order; surface node -> solid node."""

    edges: dict[str, tuple[str, ...]]
    nodes: dict[str, str]


# --------------------------------------------------------------------------
# slicing


def _plane_frame(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.eye(3)[int(np.argmin(np.abs(d)))]
    u = np.cross(a, d)
    u /= np.linalg.norm(u)
    w = np.cross(d, u)
    return u, w


def _inside(p: np.ndarray, poly: np.ndarray) -> bool:
    x, y = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    cross = (y > p[1]) != (y2 > p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x + (p[1] - y) * (x2 - x) / (y2 - y)
    return bool(np.count_nonzero(cross & (p[0] < xi)) % 2)


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def slice_circles(s: TriSurface, heights: np.ndarray, t: float, d: np.ndarray, edges: np.ndarray | None = None):
    """Oriented level circles of a surface at a level containing no vertex.

    Returns a list of ``(points3d, mesh_edge_indices)``.  Within each triangle
    the level segment runs from the crossing on the boundary edge that goes
    up to the one on the edge that goes down, so outer boundaries of the
    sublevel cross-section are clockwise when seen from above.
    """
    if edges is None:
        edges = s.edges()
    V = s.n_vertices
    keys = edges[:, 0] * V + edges[:, 1]
    tri = s.triangles
    ht = heights[tri]
    hit = (ht.min(1) < t) & (ht.max(1) > t)
    tri = tri[hit]
    if len(tri) == 0:
        return []
    a, b = tri, np.roll(tri, -1, axis=1)  # directed boundary edges a -> b
    ha, hb = heights[a], heights[b]
    up = (ha < t) & (hb > t)
    down = (ha > t) & (hb < t)
    if not (np.all(up.sum(1) == 1) and np.all(down.sum(1) == 1)):
        raise CriticalHeight(f"level {t} meets a vertex")
    rows = np.arange(len(tri))
    iu, idn = up.argmax(1), down.argmax(1)

    def edge_index(p, q):
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        return np.searchsorted(keys, lo * V + hi)

    e_from = edge_index(a[rows, iu], b[rows, iu])
    e_to = edge_index(a[rows, idn], b[rows, idn])
    nxt = dict(zip(e_from.tolist(), e_to.tolist()))

    # crossing points on all crossing edges
    ce = np.unique(np.concatenate([e_from, e_to]))
    p0, p1 = s.vertices[edges[ce, 0]], s.vertices[edges[ce, 1]]
    h0, h1 = heights[edges[ce, 0]], heights[edges[ce, 1]]
    lam = (t - h0) / (h1 - h0)
    pts = dict(zip(ce.tolist(), p0 + lam[:, None] * (p1 - p0)))

    out = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start:
            loop.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        loop_arr = np.array(loop, dtype=np.int64)
        out.append((np.array([pts[e] for e in loop]), loop_arr))
    return out


def _build_section(raw, t: float, d: np.ndarray, labels=None) -> CrossSection:
    u, w = _plane_frame(d)
    planes = [np.stack([p @ u, p @ w], axis=1) for p, _ in raw]
    n = len(raw)
    lo = np.array([q.min(0) for q in planes]) if n else np.zeros((0, 2))
    hi = np.array([q.max(0) for q in planes]) if n else np.zeros((0, 2))
    contains = np.zeros((n, n), dtype=bool)  # contains[i, j]: circle j lies inside circle i
    for j in range(n):
        p = planes[j][0]
        for i in range(n):
            if i == j or np.any(p < lo[i]) or np.any(p > hi[i]):
                continue
            contains[i, j] = _inside(p, planes[i])
    depth = contains.sum(0)
    circles = []
    for j in range(n):
        par = [i for i in np.flatnonzero(contains[:, j]) if depth[i] == depth[j] - 1]
        circles.append(
            Circle(
                raw[j][0],
                planes[j],
                raw[j][1],
                _signed_area(planes[j]),
                int(depth[j]),
                int(par[0]) if par else None,
                None if labels is None else labels[j],
            )
        )
    regions = []
    for j in range(n):
        if depth[j] % 2 == 0:
            holes = tuple(k for k in range(n) if circles[k].parent == j and depth[k] % 2 == 1)
            regions.append(Region(j, holes))
    return CrossSection(float(t), tuple(circles), tuple(regions))


def cross_section(s: TriSurface, h: HeightFunction, z: float) -> CrossSection:
    """Level set of the solid at a regular height ``z``."""
    crit = critical_points(s, h)
    tol = 1e-9 * s.bbox_diagonal
    for c in crit:
        if abs(c.height - z) <= tol:
            raise CriticalHeight(f"z = {z} is within {tol:.3g} of the critical value {c.height} (vertex {c.vertex})")
    heights = h.heights(s)
    if np.any(heights == z):
        raise CriticalHeight(f"z = {z} passes through a vertex")
    return _build_section(slice_circles(s, heights, z, h.vector), z, h.vector)


# --------------------------------------------------------------------------
# sweep


class _UF:
    def __init__(self):
        self.p: dict = {}

    def find(self, x):
        p = self.p
        p.setdefault(x, x)
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if str(ra) > str(rb):
                ra, rb = rb, ra
            self.p[rb] = ra


def _components(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    g = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n))
    return connected_components(g, directed=False)[1]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BDOMAIN_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ReebAnalysis:
    """Everything the sweep learns; built by :func:`analyze`."""

    surface: TriSurface
    height: HeightFunction
    crit: list[CriticalPoint]
    slab_heights: np.ndarray  # regular level used for each slab
    sections: list[CrossSection]  # one per slab, circles labelled by segment
    seg_slab: np.ndarray  # slab of every segment
    arc_of_seg: np.ndarray  # surface edge (arc) of every segment
    lower_segs: list[set]  # per critical point: segments of the slab below touching it
    upper_segs: list[set]
    continuations: list[list[tuple[int, int]]]  # per critical point: (segment below, segment above)
    surface_graph: ReebGraph
    solid_graph: ReebGraph
    reeb_map: ReebMap
    wirg: WIRG
    region_edge: dict = field(default_factory=dict)  # (slab, region) -> solid edge id
    arc_edge_id: dict = field(default_factory=dict)  # arc -> surface edge id

    def region_of_segment(self, seg: int) -> tuple[int, int]:
        j = int(self.seg_slab[seg])
        sec = self.sections[j]
        for ci, c in enumerate(sec.circles):
            if c.label == seg:
                return j, sec.region_of(ci)
        raise KeyError(seg)

    @cached_property
    def crit_by_id(self) -> dict[str, CriticalPoint]:
        return {node_id(c.vertex): c for c in self.crit}


def analyze(s: TriSurface, h: HeightFunction) -> ReebAnalysis:
    """Run the sweep and build both Reeb graphs, the Reeb map and the WIRG."""
    crit = critical_points(s, h)
    if not is_morse(s, h, crit):
        raise NotMorse("height function is not Morse on this surface; perturb the direction first")
    heights = h.heights(s)
    rank = vertex_ranks(s, h)
    by_rank = np.argsort(rank)
    C = np.array([c.rank for c in crit], dtype=np.int64)
    m = len(C)
    n_slab = m - 1
    edges = s.edges()
    V = s.n_vertices
    keys = edges[:, 0] * V + edges[:, 1]

    er = rank[edges]
    elo, ehi = er.min(1), er.max(1)
    js = np.searchsorted(C, elo, "right") - 1
    je = np.searchsorted(C, ehi, "left") - 1
    cnt = je - js + 1
    off = np.concatenate([[0], np.cumsum(cnt)])
    n_piece = int(off[-1])

    # pieces glued inside triangles
    t = s.triangles
    te = np.stack(
        [
            np.searchsorted(keys, np.minimum(t[:, i], t[:, (i + 1) % 3]) * V + np.maximum(t[:, i], t[:, (i + 1) % 3]))
            for i in range(3)
        ],
        axis=1,
    )
    pa, pb = [], []
    for i, k in ((0, 1), (1, 2), (2, 0)):
        e1, e2 = te[:, i], te[:, k]
        lo = np.maximum(js[e1], js[e2])
        hi = np.minimum(je[e1], je[e2])
        n = np.maximum(hi - lo + 1, 0)
        rep1, rep2 = np.repeat(e1, n), np.repeat(e2, n)
        jj = np.repeat(lo, n) + (np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n))
        pa.append(off[rep1] + jj - js[rep1])
        pb.append(off[rep2] + jj - js[rep2])
    seg_of_piece = _components(n_piece, np.concatenate(pa), np.concatenate(pb))
    n_seg = int(seg_of_piece.max()) + 1 if n_piece else 0
    piece_edge = np.repeat(np.arange(len(edges)), cnt)
    piece_slab = np.repeat(js, cnt) + (np.arange(n_piece) - np.repeat(off[:-1], cnt))
    seg_slab = np.zeros(n_seg, dtype=np.int64)
    seg_slab[seg_of_piece] = piece_slab

    def piece(e, j):
        return off[e] + j - js[e]

    # star of each critical vertex
    lower_segs, upper_segs = [], []
    inc: dict[int, list[int]] = {}
    for ei, (a, b) in enumerate(edges.tolist()):
        inc.setdefault(a, []).append(ei)
        inc.setdefault(b, []).append(ei)
    for j, c in enumerate(crit):
        lo_s, up_s = set(), set()
        for ei in inc[c.vertex]:
            if ehi[ei] == c.rank:
                lo_s.add(int(seg_of_piece[piece(ei, j - 1)]))
            else:
                up_s.add(int(seg_of_piece[piece(ei, j)]))
        lower_segs.append(lo_s)
        upper_segs.append(up_s)

    # continuations across each critical level
    continuations: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for j in range(1, m - 1):
        span = np.flatnonzero((js <= j - 1) & (je >= j))
        below = seg_of_piece[piece(span, j - 1)]
        above = seg_of_piece[piece(span, j)]
        pairs = set(zip(below.tolist(), above.tolist()))
        keep = []
        for a, b in sorted(pairs):
            ta, tb = a in lower_segs[j], b in upper_segs[j]
            if ta and tb:
                continue
            if ta != tb:
                raise NotMorse(f"segment continuation through critical vertex {crit[j].vertex} is inconsistent")
            keep.append((a, b))
        continuations[j] = keep

    arc_uf = _UF()
    for seg in range(n_seg):
        arc_uf.find(seg)
    for pairs in continuations:
        for a, b in pairs:
            arc_uf.union(a, b)
    roots = sorted({arc_uf.find(x) for x in range(n_seg)})
    arc_index = {r: i for i, r in enumerate(roots)}
    arc_of_seg = np.array([arc_index[arc_uf.find(x)] for x in range(n_seg)], dtype=np.int64)

    # surface graph
    nid = [node_id(c.vertex) for c in crit]
    arc_lo: dict[int, int] = {}
    arc_hi: dict[int, int] = {}
    for j in range(m):
        for seg in upper_segs[j]:
            arc_lo[int(arc_of_seg[seg])] = j
        for seg in lower_segs[j]:
            arc_hi[int(arc_of_seg[seg])] = j
    n_arc = len(roots)
    if set(arc_lo) != set(range(n_arc)) or set(arc_hi) != set(range(n_arc)):
        raise NotMorse("surface sweep left an open segment chain")
    arc_first = np.full(n_arc, n_seg, dtype=np.int64)
    np.minimum.at(arc_first, arc_of_seg, np.arange(n_seg))
    arc_order = sorted(range(n_arc), key=lambda a: (arc_lo[a], arc_hi[a], int(arc_first[a])))
    arc_edge_id = {a: f"s{i}" for i, a in enumerate(arc_order)}
    snodes = tuple(ReebNode(nid[j], c.height, c.vertex) for j, c in enumerate(crit))
    sedges = tuple(ReebEdge(arc_edge_id[a], nid[arc_lo[a]], nid[arc_hi[a]]) for a in arc_order)
    surface_graph = ReebGraph(snodes, sedges, "surface")

    # one regular slice per slab
    hs_sorted = heights[by_rank]
    levels = np.empty(n_slab)
    for j in range(n_slab):
        block = hs_sorted[C[j] : C[j + 1] + 1]
        gaps = np.diff(block)
        k = int(np.argmax(gaps))
        if gaps[k] <= 0:
            raise NotMorse(f"no regular level between critical values {crit[j].height} and {crit[j + 1].height}")
        levels[j] = 0.5 * (block[k] + block[k + 1])

    d = h.vector

    def section(j):
        raw = slice_circles(s, heights, levels[j], d, edges)
        labels = []
        for _, ce in raw:
            segs = {int(seg_of_piece[piece(e, j)]) for e in ce.tolist()}
            if len(segs) != 1:
                raise NotMorse(f"level circle in slab {j} spans several segments")
            labels.append(segs.pop())
        return _build_section(raw, levels[j], d, labels)

    if _threads() > 1 and n_slab > 1:
        with ThreadPoolExecutor(_threads()) as pool:
            sections = list(pool.map(section, range(n_slab)))
    else:
        sections = [section(j) for j in range(n_slab)]

    seg_region: dict[int, tuple[int, int]] = {}
    for j, sec in enumerate(sections):
        for ci, c in enumerate(sec.circles):
            seg_region[c.label] = (j, sec.region_of(ci))

    # stitch regions of neighbouring slabs
    solid_uf = _UF()
    for j, sec in enumerate(sections):
        for r in range(len(sec.regions)):
            solid_uf.find((j, r))
    node_inc: list[tuple[list, list]] = []
    for j in range(m):
        local = _UF()
        for a, b in continuations[j]:
            local.union(("L", seg_region[a]), ("U", seg_region[b]))
        for seg in lower_segs[j]:
            local.union(("L", seg_region[seg]), "v")
        for seg in upper_segs[j]:
            local.union(("U", seg_region[seg]), "v")
        keys_all = set()
        if j > 0:
            keys_all |= {("L", (j - 1, r)) for r in range(len(sections[j - 1].regions))}
        if j < n_slab:
            keys_all |= {("U", (j, r)) for r in range(len(sections[j].regions))}
        groups: dict = {}
        for k in keys_all:
            groups.setdefault(local.find(k), []).append(k)
        vroot = local.find("v")
        low, upp = [], []
        for root, members in groups.items():
            ls = [k[1] for k in members if k[0] == "L"]
            us = [k[1] for k in members if k[0] == "U"]
            if root == vroot:
                low, upp = ls, us
            elif len(ls) == 1 and len(us) == 1:
                solid_uf.union(ls[0], us[0])
            else:
                raise NotMorse(f"region bookkeeping failed at critical vertex {crit[j].vertex}")
        node_inc.append((low, upp))

    region_keys = [(j, r) for j, sec in enumerate(sections) for r in range(len(sec.regions))]
    cls: dict = {}
    for k in region_keys:
        cls.setdefault(solid_uf.find(k), []).append(k)
    cls_lo: dict = {}
    cls_hi: dict = {}
    for j, (low, upp) in enumerate(node_inc):
        for k in low:
            cls_hi[solid_uf.find(k)] = j
        for k in upp:
            cls_lo[solid_uf.find(k)] = j
    cls_weight = {}
    for root, members in cls.items():
        ws = {sections[j].regions[r].weight for j, r in members}
        if len(ws) != 1:
            raise NotMorse("region weight changes along a solid edge")
        cls_weight[root] = ws.pop()
        if root not in cls_lo or root not in cls_hi:
            raise NotMorse("solid edge without both endpoints")
    order = sorted(cls, key=lambda r: (cls_lo[r], cls_hi[r], min(cls[r])))
    solid_id = {r: f"e{i}" for i, r in enumerate(order)}
    region_edge = {k: solid_id[solid_uf.find(k)] for k in region_keys}
    solid_graph = ReebGraph(
        snodes, tuple(ReebEdge(solid_id[r], nid[cls_lo[r]], nid[cls_hi[r]]) for r in order), "solid"
    )

    wnodes = tuple(WNode(nid[j], c.height, c.index, c.convexity, c.saddle_normal) for j, c in enumerate(crit))
    wedges = tuple(WEdge(solid_id[r], nid[cls_lo[r]], nid[cls_hi[r]], int(cls_weight[r])) for r in order)
    wirg = WIRG(wnodes, wedges)

    # surface edge -> solid edges in height order
    emap: dict[str, list[str]] = {arc_edge_id[a]: [] for a in arc_order}
    for seg in np.argsort(seg_slab, kind="stable").tolist():
        sid = arc_edge_id[int(arc_of_seg[seg])]
        tid = region_edge[seg_region[seg]]
        if not emap[sid] or emap[sid][-1] != tid:
            emap[sid].append(tid)
    reeb_map = ReebMap({k: tuple(v) for k, v in emap.items()}, {n: n for n in nid})

    return ReebAnalysis(
        surface=s,
        height=h,
        crit=crit,
        slab_heights=levels,
        sections=sections,
        seg_slab=seg_slab,
        arc_of_seg=arc_of_seg,
        lower_segs=lower_segs,
        upper_segs=upper_segs,
        continuations=continuations,
        surface_graph=surface_graph,
        solid_graph=solid_graph,
        reeb_map=reeb_map,
        wirg=wirg,
        region_edge=region_edge,
        arc_edge_id=arc_edge_id,
    )


def surface_reeb(s: TriSurface, h: HeightFunction) -> ReebGraph:
    return analyze(s, h).surface_graph


def solid_reeb(s: TriSurface, h: HeightFunction) -> tuple[ReebGraph, ReebMap, WIRG]:
    a = analyze(s, h)
    return a.solid_graph, a.reeb_map, a.wirg


def reeb_json(a: ReebAnalysis) -> str:
    doc = {"surface": a.surface_graph.to_document(), "solid": a.solid_graph.to_document()}
    return json.dumps(doc, indent=2) + "\n"
