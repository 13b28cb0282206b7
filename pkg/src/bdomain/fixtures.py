"""Small hand-built graphs used by tests, demos and the CLI.

These are combinatorial stand-ins for domains that are awkward to mesh,
chosen to satisfy every validation rule.
"""

from __future__ import annotations

from .wirg import WEdge, WIRG, WNode

__all__ = ["two_bridge_exterior", "two_bridge_events", "basin_cancellable", "torus_with_survivor"]


def two_bridge_exterior() -> WIRG:
    """Exterior of a 2-bridge knot at the minimal count of 8 critical points.

    A knotted exterior needs both a concave minimum and a concave maximum,
    so the eight points are two extrema of each convexity and four saddles.
    The basin opened at ``n1`` is pinched twice from above, the deepest hole
    closes at the concave maximum ``n4`` and the remaining holes open out.
    Weights run 0, 1, 2, 3, 2, 1, 0, so the weight-below-3 solid torus rule
    stays silent, as it must for a knotted exterior.
    """
    nodes = (
        WNode("n0", 0.0, 0, "convex"),
        WNode("n1", 1.0, 0, "concave"),
        WNode("n2", 2.0, 1, saddle_normal="down"),
        WNode("n3", 3.0, 1, saddle_normal="down"),
        WNode("n4", 4.0, 2, "concave"),
        WNode("n5", 5.0, 1, saddle_normal="up"),
        WNode("n6", 6.0, 1, saddle_normal="up"),
        WNode("n7", 7.0, 2, "convex"),
    )
    weights = (0, 1, 2, 3, 2, 1, 0)
    edges = tuple(WEdge(f"e{i}", f"n{i}", f"n{i + 1}", w) for i, w in enumerate(weights))
    return WIRG(nodes, edges)


def two_bridge_events() -> dict:
    """The basin of ``n1`` is pinched through its interior at ``n2``."""
    return {"n1": [{"node": "n2", "kind": "split", "saddle_normal": "down"}]}


def basin_cancellable() -> tuple[WIRG, dict]:
    """A concave minimum whose basin is joined from outside by another circle."""
    nodes = (
        WNode("a", 0.0, 0, "convex"),
        WNode("b", 1.0, 0, "concave"),
        WNode("c", 2.0, 1, saddle_normal="up"),
        WNode("d", 3.0, 2, "convex"),
    )
    edges = (WEdge("e0", "a", "b", 0), WEdge("e1", "b", "c", 1), WEdge("e2", "c", "d", 0))
    return WIRG(nodes, edges), {"b": [{"node": "c", "kind": "merge", "side": "exterior"}]}


def torus_with_survivor() -> tuple[WIRG, dict]:
    """Torus boundary whose only weight-2 segment has a survivor endpoint pair.

    Two pockets open at ``b1`` and ``b2``, their regions merge at the
    trivalent node ``m`` (type (5)) and one hole leaves at ``u`` (type (1)).
    """
    nodes = (
        WNode("a", 0.0, 0, "convex"),
        WNode("p", 1.0, 1, saddle_normal="up"),
        WNode("b1", 2.0, 0, "concave"),
        WNode("b2", 2.5, 0, "concave"),
        WNode("m", 3.0, 1, saddle_normal="down"),
        WNode("u", 4.0, 1, saddle_normal="up"),
        WNode("v", 5.0, 1, saddle_normal="up"),
        WNode("t", 6.0, 2, "convex"),
    )
    edges = (
        WEdge("e0", "a", "p", 0),
        WEdge("e1", "p", "b1", 0),
        WEdge("e2", "p", "b2", 0),
        WEdge("e3", "b1", "m", 1),
        WEdge("e4", "b2", "m", 1),
        WEdge("e5", "m", "u", 2),
        WEdge("e6", "u", "v", 1),
        WEdge("e7", "v", "t", 0),
    )
    return WIRG(nodes, edges), {"m": "5", "u": "1"}
