"""Brute-force solid Reeb structure from dense slicing.

This is deliberately independent of the sweep in :mod:`bdomain.reeb`: level
circles are chained with networkx, nesting uses winding numbers, and
neighbouring slices are joined through the connected components of the
surface band between them.  The result is a layered graph whose nodes are
(slice, region) pairs labelled with the region weight; a Reeb graph sampled
at the same levels must be isomorphic to it.
"""

from __future__ import annotations

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import TriSurface
from .morse import HeightFunction
from .wirg import WIRG

__all__ = ["slice_levels", "dense_slicing", "dense_surface_slicing", "sample_wirg", "sample_surface_edges", "layered_equal"]


def slice_levels(s: TriSurface, h: HeightFunction, n: int = 200) -> np.ndarray:
    """``n`` levels spread over the height range, none at a vertex height."""
    z = np.sort(h.heights(s))
    lo, hi = z[0], z[-1]
    levels = lo + (np.arange(n) + 0.5) / n * (hi - lo)
    eps = 1e-7 * (hi - lo)
    for i, t in enumerate(levels):
        k = np.searchsorted(z, t)
        while (k < len(z) and abs(z[k] - t) < eps) or (k > 0 and abs(z[k - 1] - t) < eps):
            t += 2.5 * eps
            k = np.searchsorted(z, t)
        levels[i] = t
    return levels


def _winding(p, poly) -> int:
    d = poly - p
    ang = np.arctan2(d[:, 1], d[:, 0])
    dif = np.diff(np.concatenate([ang, ang[:1]]))
    dif = (dif + np.pi) % (2 * np.pi) - np.pi
    return int(round(dif.sum() / (2 * np.pi)))


class _Mesh:
    def __init__(self, s: TriSurface, h: HeightFunction):
        self.s = s
        self.z = h.heights(s)
        d = h.vector
        a = np.eye(3)[int(np.argmin(np.abs(d)))]
        u = np.cross(a, d)
        u /= np.linalg.norm(u)
        self.uw = np.stack([u, np.cross(d, u)], axis=1)
        t = s.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        self.edges, inv = np.unique(e, axis=0, return_inverse=True)
        inv = inv.reshape(3, -1).T  # triangle -> its 3 edge ids
        self.tri_edges = inv
        # each edge has two triangles
        order = np.argsort(inv.ravel(), kind="stable")
        self.edge_tris = (order // 3).reshape(-1, 2)
        ez = self.z[self.edges]
        self.elo, self.ehi = ez.min(1), ez.max(1)

    def circles(self, t):
        """(polygon in the plane, triangle ids touching it) for each circle."""
        hit = np.flatnonzero((self.elo < t) & (self.ehi > t))
        g = nx.Graph()
        tri_hit = np.flatnonzero(
            (self.z[self.s.triangles].min(1) < t) & (self.z[self.s.triangles].max(1) > t)
        )
        hitset = set(hit.tolist())
        for ti in tri_hit.tolist():
            es = [e for e in self.tri_edges[ti].tolist() if e in hitset]
            g.add_edge(es[0], es[1])
        out = []
        for comp in nx.connected_components(g):
            start = min(comp)
            order = [start]
            prev, cur = None, start
            while True:
                nbrs = sorted(n for n in g[cur] if n != prev)
                nxt = nbrs[0]
                if nxt == start:
                    break
                order.append(nxt)
                prev, cur = cur, nxt
                if len(order) > len(comp):
                    break
            ei = np.array(order)
            a, b = self.edges[ei, 0], self.edges[ei, 1]
            lam = (t - self.z[a]) / (self.z[b] - self.z[a])
            pts = self.s.vertices[a] + lam[:, None] * (self.s.vertices[b] - self.s.vertices[a])
            out.append((pts @ self.uw, int(self.edge_tris[ei[0], 0])))
        return out

    def regions(self, t):
        """Regions as lists of circle positions, plus the circles themselves."""
        circ = self.circles(t)
        n = len(circ)
        inside = np.zeros((n, n), dtype=bool)  # inside[i, j]: j inside i
        for i in range(n):
            for j in range(n):
                if i != j:
                    inside[i, j] = _winding(circ[j][0][0], circ[i][0]) != 0
        depth = inside.sum(0)
        regions = []
        for i in range(n):
            if depth[i] % 2 == 0:
                kids = [j for j in range(n) if inside[i, j] and depth[j] == depth[i] + 1]
                regions.append([i, *kids])
        return circ, regions

    def band_components(self, t1, t2) -> np.ndarray:
        """Component label of every triangle restricted to the band [t1, t2] (-1 outside)."""
        F = self.s.n_triangles
        tz = self.z[self.s.triangles]
        tin = (tz.min(1) <= t2) & (tz.max(1) >= t1)
        ein = (self.elo <= t2) & (self.ehi >= t1)
        pairs = self.edge_tris[ein]
        g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(F, F))
        lab = connected_components(g, directed=False)[1]
        return np.where(tin, lab, -1)


def dense_slicing(s: TriSurface, h: HeightFunction, n: int = 200, levels=None) -> nx.Graph:
    """Layered graph of solid level-set components at ``n`` levels."""
    mesh = _Mesh(s, h)
    levels = slice_levels(s, h, n) if levels is None else np.asarray(levels)
    g = nx.Graph()
    layers = []
    for i, t in enumerate(levels):
        circ, regs = mesh.regions(t)
        owner = {}
        for r, members in enumerate(regs):
            g.add_node((i, r), layer=i, weight=len(members) - 1)
            for c in members:
                owner[c] = r
        layers.append((circ, owner, len(regs)))
    for i in range(len(levels) - 1):
        lab = mesh.band_components(levels[i], levels[i + 1])
        uf = nx.utils.UnionFind()
        for k in (0, 1):
            circ, owner, _ = layers[i + k]
            for c, (_, tri) in enumerate(circ):
                uf.union(("r", i + k, owner[c]), ("b", int(lab[tri])))
        for r1 in range(layers[i][2]):
            for r2 in range(layers[i + 1][2]):
                if uf[("r", i, r1)] == uf[("r", i + 1, r2)]:
                    g.add_edge((i, r1), (i + 1, r2))
    return g


def dense_surface_slicing(s: TriSurface, h: HeightFunction, n: int = 1000, levels=None) -> nx.Graph:
    """Layered graph of level circles; its first Betti number is that of the surface Reeb graph
    once the levels resolve every critical value."""
    mesh = _Mesh(s, h)
    levels = slice_levels(s, h, n) if levels is None else np.asarray(levels)
    g = nx.Graph()
    circs = []
    for i, t in enumerate(levels):
        circ = mesh.circles(t)
        for c in range(len(circ)):
            g.add_node((i, c), layer=i, weight=0)
        circs.append(circ)
    for i in range(len(levels) - 1):
        lab = mesh.band_components(levels[i], levels[i + 1])
        for c1, (_, t1) in enumerate(circs[i]):
            for c2, (_, t2) in enumerate(circs[i + 1]):
                if lab[t1] == lab[t2]:
                    g.add_edge((i, c1), (i + 1, c2))
    return g


def _band_classes(nodes_h: dict, edges: list[tuple[str, str, str]], t1: float, t2: float):
    uf = nx.utils.UnionFind()
    for eid, lo, hi in edges:
        uf[eid]
        for nd in (lo, hi):
            if t1 < nodes_h[nd] < t2:
                uf.union(eid, ("n", nd))
    return uf


def sample_wirg(g: WIRG, levels) -> nx.Graph:
    """The solid Reeb graph seen through the same levels as :func:`dense_slicing`."""
    nh = {n.id: n.height for n in g.nodes}
    out = nx.Graph()
    active = []
    for i, t in enumerate(levels):
        act = [e for e in g.edges if nh[e.lower] < t < nh[e.upper]]
        for e in act:
            out.add_node((i, e.id), layer=i, weight=e.weight)
        active.append(act)
    trip = [(e.id, e.lower, e.upper) for e in g.edges]
    for i in range(len(levels) - 1):
        uf = _band_classes(nh, trip, levels[i], levels[i + 1])
        for a in active[i]:
            for b in active[i + 1]:
                if uf[a.id] == uf[b.id]:
                    out.add_edge((i, a.id), (i + 1, b.id))
    return out


def sample_surface_edges(nodes_h: dict, edges, levels) -> nx.Graph:
    """Layered sampling of an unweighted Reeb graph given as ``(id, lower, upper)`` triples."""
    out = nx.Graph()
    active = []
    for i, t in enumerate(levels):
        act = [e for e in edges if nodes_h[e[1]] < t < nodes_h[e[2]]]
        for e in act:
            out.add_node((i, e[0]), layer=i, weight=0)
        active.append(act)
    for i in range(len(levels) - 1):
        uf = _band_classes(nodes_h, list(edges), levels[i], levels[i + 1])
        for a in active[i]:
            for b in active[i + 1]:
                if uf[a[0]] == uf[b[0]]:
                    out.add_edge((i, a[0]), (i + 1, b[0]))
    return out


def layered_equal(a: nx.Graph, b: nx.Graph) -> bool:
    """Isomorphism preserving layer and weight."""
    if a.number_of_nodes() != b.number_of_nodes() or a.number_of_edges() != b.number_of_edges():
        return False
    match = lambda x, y: x["layer"] == y["layer"] and x["weight"] == y["weight"]  # noqa: E731
    return nx.is_isomorphic(a, b, node_match=match)
