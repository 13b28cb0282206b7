"""Weighted indexed Reeb graphs as a standalone, mesh-free data model.

Nodes carry a height, a critical index and optional convexity/saddle-normal
marks; edges run from a lower node to an upper node and carry the number of
holes of the level-set component they represent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable

import networkx as nx

from .errors import GraphNotConnected, SchemaError

__all__ = [
    "WNode",
    "WEdge",
    "WIRG",
    "Violation",
    "validate",
    "betti1",
    "encode",
    "decode",
    "to_dot",
]

_CONVEXITY = ("convex", "concave")
_NORMAL = ("up", "down")


@dataclass(frozen=True)
class WNode:
    id: str
    height: float
    index: int | None = None
    convexity: str | None = None
    saddle_normal: str | None = None


@dataclass(frozen=True)
class WEdge:
    id: str
    lower: str
    upper: str
    weight: int


@dataclass(frozen=True)
class WIRG:
    nodes: tuple[WNode, ...]
    edges: tuple[WEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    # -- lookups ---------------------------------------------------------
    def node(self, node_id: str) -> WNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def edge(self, edge_id: str) -> WEdge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def node_map(self) -> dict[str, WNode]:
        return {n.id: n for n in self.nodes}

    def below(self, node_id: str) -> list[WEdge]:
        """Edges whose upper end is ``node_id``."""
        return [e for e in self.edges if e.upper == node_id]

    def above(self, node_id: str) -> list[WEdge]:
        """Edges whose lower end is ``node_id``."""
        return [e for e in self.edges if e.lower == node_id]

    def degree(self, node_id: str) -> int:
        return sum((e.lower == node_id) + (e.upper == node_id) for e in self.edges)

    @property
    def max_weight(self) -> int:
        return max((e.weight for e in self.edges), default=0)

    def canonical(self) -> "WIRG":
        nodes = sorted(self.nodes, key=lambda n: (n.height, n.id))
        edges = sorted(self.edges, key=lambda e: (e.lower, e.upper, e.id))
        return WIRG(tuple(nodes), tuple(edges))

    def with_nodes(self, nodes: Iterable[WNode]) -> "WIRG":
        return WIRG(tuple(nodes), self.edges)

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        for n in self.nodes:
            g.add_node(n.id, height=n.height, index=n.index, convexity=n.convexity)
        for e in self.edges:
            g.add_edge(e.lower, e.upper, key=e.id, weight=e.weight)
        return g

    def is_isomorphic(self, other: "WIRG", heights: bool = False) -> bool:
        """Isomorphism respecting direction, weights and indices (and heights if asked)."""
        a, b = self.to_networkx(), other.to_networkx()
        if heights:
            nm = lambda x, y: x["index"] == y["index"] and x["height"] == y["height"]  # noqa: E731
        else:
            nm = lambda x, y: x["index"] == y["index"]  # noqa: E731
        em = nx.algorithms.isomorphism.categorical_multiedge_match("weight", None)
        return nx.is_isomorphic(a, b, node_match=nm, edge_match=em)


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.where}: {self.detail}"


def validate(g: WIRG) -> list[Violation]:
    """Check every invariant; an empty list means the graph is valid."""
    out: list[Violation] = []
    ids = [n.id for n in g.nodes]
    nodes = g.node_map()
    if len(set(ids)) != len(ids):
        out.append(Violation("duplicate-id", "nodes", "node ids are not unique"))
    eids = [e.id for e in g.edges]
    if len(set(eids)) != len(eids):
        out.append(Violation("duplicate-id", "edges", "edge ids are not unique"))
    if not g.nodes:
        out.append(Violation("connected", "graph", "graph has no nodes"))
        return out

    for e in g.edges:
        if e.lower not in nodes or e.upper not in nodes:
            out.append(Violation("dangling-edge", f"edge {e.id}", "endpoint is not a node"))
            continue
        if e.weight < 0:
            out.append(Violation("nonnegative-weight", f"edge {e.id}", f"weight {e.weight} < 0"))
        if not nodes[e.lower].height < nodes[e.upper].height:
            out.append(
                Violation(
                    "height-order",
                    f"edge {e.id}",
                    f"lower {e.lower} at {nodes[e.lower].height} is not below upper {e.upper} at {nodes[e.upper].height}",
                )
            )
    if any(v.rule == "dangling-edge" for v in out):
        return out

    und = nx.MultiGraph()
    und.add_nodes_from(ids)
    und.add_edges_from((e.lower, e.upper) for e in g.edges)
    if not nx.is_connected(und):
        out.append(Violation("connected", "graph", f"{nx.number_connected_components(und)} components"))

    below: dict[str, list[WEdge]] = {i: [] for i in ids}
    above: dict[str, list[WEdge]] = {i: [] for i in ids}
    for e in g.edges:
        below[e.upper].append(e)
        above[e.lower].append(e)

    for n in g.nodes:
        lo, up = below[n.id], above[n.id]
        deg = len(lo) + len(up)
        where = f"node {n.id}"
        if n.index not in (None, 0, 1, 2):
            out.append(Violation("index-range", where, f"index {n.index} not in 0, 1, 2"))
        if n.convexity not in (None, *_CONVEXITY):
            out.append(Violation("mark", where, f"convexity {n.convexity!r}"))
        if n.saddle_normal not in (None, *_NORMAL):
            out.append(Violation("mark", where, f"saddle_normal {n.saddle_normal!r}"))
        if deg == 0:
            if len(g.nodes) > 1:
                out.append(Violation("degree", where, "isolated node"))
        elif deg == 1:
            want = 0 if up else 2
            if n.index is not None and n.index != want:
                out.append(Violation("leaf-index", where, f"{'bottom' if up else 'top'} leaf must have index {want}, has {n.index}"))
        elif deg == 2:
            if len(lo) != 1 or len(up) != 1:
                out.append(Violation("bivalent-shape", where, "bivalent node needs one lower and one upper edge"))
                continue
            a, b = lo[0].weight, up[0].weight
            if abs(b - a) != 1:
                out.append(Violation("bivalent-step", where, f"weights {a} -> {b} must differ by exactly 1"))
            elif n.index is not None:
                allowed = (0, 1) if b == a + 1 else (2, 1)
                if n.index not in allowed:
                    out.append(
                        Violation("bivalent-index", where, f"weight {a} -> {b} needs index in {allowed}, has {n.index}")
                    )
        elif deg == 3:
            if n.index is not None and n.index != 1:
                out.append(Violation("trivalent-index", where, f"trivalent node must have index 1, has {n.index}"))
            if len(lo) == 1 and len(up) == 2:
                single, pair = lo[0], up
            elif len(lo) == 2 and len(up) == 1:
                single, pair = up[0], lo
            else:
                out.append(Violation("trivalent-shape", where, "trivalent node needs a 1+2 split of edges"))
                continue
            if single.weight != pair[0].weight + pair[1].weight:
                out.append(
                    Violation(
                        "weight-sum",
                        where,
                        f"{single.id} has weight {single.weight} but {pair[0].id}+{pair[1].id} = "
                        f"{pair[0].weight}+{pair[1].weight}",
                    )
                )
        else:
            out.append(Violation("degree", where, f"degree {deg} exceeds 3"))
    return out


def betti1(g: WIRG) -> int:
    und = nx.MultiGraph()
    und.add_nodes_from(n.id for n in g.nodes)
    und.add_edges_from((e.lower, e.upper) for e in g.edges)
    if len(g.nodes) == 0 or not nx.is_connected(und):
        raise GraphNotConnected("first Betti number needs a connected graph")
    return len(g.edges) - len(g.nodes) + 1


# --------------------------------------------------------------------------
# JSON codec


def _node_doc(n: WNode) -> dict:
    return {
        "id": n.id,
        "height": n.height,
        "index": n.index,
        "convexity": n.convexity,
        "saddle_normal": n.saddle_normal,
    }


def _edge_doc(e: WEdge) -> dict:
    return {"id": e.id, "lower": e.lower, "upper": e.upper, "weight": e.weight}


def to_document(g: WIRG) -> dict:
    c = g.canonical()
    return {"nodes": [_node_doc(n) for n in c.nodes], "edges": [_edge_doc(e) for e in c.edges]}


def encode(g: WIRG) -> str:
    """Canonical JSON text: nodes by (height, id), edges by (lower, upper, id)."""
    return json.dumps(to_document(g), indent=2) + "\n"


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def from_document(doc) -> WIRG:
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object", "")
    extra = set(doc) - {"nodes", "edges"}
    if extra:
        raise SchemaError(f"unexpected keys {sorted(extra)}", "")
    nodes, edges = [], []
    if not isinstance(doc.get("nodes"), list):
        raise SchemaError("'nodes' must be an array", "/nodes")
    if not isinstance(doc.get("edges"), list):
        raise SchemaError("'edges' must be an array", "/edges")
    for i, n in enumerate(doc["nodes"]):
        p = f"/nodes/{i}"
        if not isinstance(n, dict):
            raise SchemaError("node must be an object", p)
        keys = {"id", "height", "index", "convexity", "saddle_normal"}
        if set(n) - keys:
            raise SchemaError(f"unexpected keys {sorted(set(n) - keys)}", p)
        if not isinstance(n.get("id"), str):
            raise SchemaError("id must be a string", p + "/id")
        if not _is_num(n.get("height")):
            raise SchemaError("height must be a number", p + "/height")
        idx = n.get("index")
        if idx is not None and (not _is_int(idx) or idx not in (0, 1, 2)):
            raise SchemaError("index must be 0, 1, 2 or null", p + "/index")
        cv = n.get("convexity")
        if cv is not None and cv not in _CONVEXITY:
            raise SchemaError("convexity must be 'convex', 'concave' or null", p + "/convexity")
        sn = n.get("saddle_normal")
        if sn is not None and sn not in _NORMAL:
            raise SchemaError("saddle_normal must be 'up', 'down' or null", p + "/saddle_normal")
        nodes.append(WNode(n["id"], n["height"], idx, cv, sn))
    for i, e in enumerate(doc["edges"]):
        p = f"/edges/{i}"
        if not isinstance(e, dict):
            raise SchemaError("edge must be an object", p)
        keys = {"id", "lower", "upper", "weight"}
        if set(e) != keys:
            raise SchemaError(f"edge keys must be exactly {sorted(keys)}", p)
        for k in ("id", "lower", "upper"):
            if not isinstance(e[k], str):
                raise SchemaError(f"{k} must be a string", f"{p}/{k}")
        if not _is_int(e["weight"]) or e["weight"] < 0:
            raise SchemaError("weight must be an integer >= 0", p + "/weight")
        edges.append(WEdge(e["id"], e["lower"], e["upper"], e["weight"]))
    return WIRG(tuple(nodes), tuple(edges))


def decode(text: str) -> WIRG:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from None
    return from_document(doc)


def to_dot(g: WIRG, name: str = "wirg") -> str:
    c = g.canonical()
    lines = [f"digraph {json.dumps(name)} {{", "  rankdir=BT;"]
    for n in c.nodes:
        label = f"{n.id}\\nh={n.height:.6g}"
        if n.index is not None:
            label += f"\\ni={n.index}"
        if n.convexity:
            label += f" {n.convexity}"
        lines.append(f'  "{n.id}" [label="{label}"];')
    for e in c.edges:
        lines.append(f'  "{e.lower}" -> "{e.upper}" [label="{e.weight}", id="{e.id}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def relabel(g: WIRG, **changes) -> WIRG:
    """Copy with node fields replaced, e.g. ``relabel(g, v3={"convexity": "concave"})``."""
    nodes = [replace(n, **changes[n.id]) if n.id in changes else n for n in g.nodes]
    return WIRG(tuple(nodes), g.edges)
