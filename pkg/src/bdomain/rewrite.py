"""Reeb-level shadows of isotopies that simplify a weighted indexed Reeb graph.

Three rules act on a :class:`~bdomain.wirg.WIRG`:

``whisker-trim``
    a leaf hanging off the two-edge side of a trivalent node, which is not a
    global extremum, is cut off together with that node.
``height-swap``
    the endpoints of a weight-2 segment trade heights, so the hole that
    opened at the lower end closes before it opens and the segment drops to
    weight 0.
``birth-death-cancel``
    the endpoints of a weight-2 segment annihilate and the segment merges
    into a single weight-1 edge.

Weight-2 segments need their endpoint types, ``"1"`` to ``"5"`` with an
optional ``'`` for the mirror image, supplied as annotations keyed by node id.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace

from .errors import InvalidWIRG, UnknownTypePair
from .wirg import Violation, WEdge, WIRG, WNode, encode, validate

__all__ = [
    "Weight2Segment",
    "RewriteStep",
    "SimplifyResult",
    "VERDICTS",
    "PAIR_TABLE",
    "weight2_segments",
    "classify_weight2_segment",
    "verdict_for_types",
    "cancel_pairs",
    "simplify",
    "replay",
    "trace_json",
]

VERDICTS = (
    "forbidden-compressing-disk",
    "forbidden-sphere",
    "reducible-height-swap",
    "reducible-birth-death",
    "survivor",
    "forbidden-end-part",
)

# (upper type, lower type, mirrored) -> verdict
PAIR_TABLE: dict[tuple[int, int, bool], str] = {
    (1, 1, False): "forbidden-compressing-disk",
    (2, 2, False): "forbidden-compressing-disk",
    (3, 3, False): "forbidden-sphere",
    (1, 1, True): "reducible-height-swap",
    (1, 2, False): "reducible-height-swap",
    (1, 3, True): "reducible-height-swap",
    (3, 3, True): "reducible-height-swap",
    (4, 1, False): "reducible-height-swap",
    (4, 3, False): "reducible-height-swap",
    (5, 1, True): "reducible-height-swap",
    (5, 2, False): "reducible-height-swap",
    (5, 3, False): "reducible-height-swap",
    (1, 3, False): "reducible-birth-death",
    (2, 3, False): "reducible-birth-death",
    (4, 2, False): "survivor",
    (5, 1, False): "survivor",
    (5, 3, True): "survivor",
    (4, 5, False): "survivor",
    (5, 5, True): "survivor",
    (4, 4, False): "forbidden-end-part",
    (5, 5, False): "forbidden-end-part",
}

_ACHIRAL = {2, 4}
_PRIORITY = {"birth-death-cancel": 0, "height-swap": 1, "whisker-trim": 2}


def _parse_type(t) -> tuple[int, bool]:
    s = str(t).strip().strip("()")
    primed = s.endswith("'")
    s = s.rstrip("'").strip("()")
    if s not in {"1", "2", "3", "4", "5"}:
        raise UnknownTypePair(f"endpoint type {t!r} is not one of (1)..(5)")
    n = int(s)
    return n, primed and n not in _ACHIRAL


def verdict_for_types(upper, lower) -> str:
    """Verdict of a weight-2 segment from its upper and lower endpoint types.

    Types (2) and (4) coincide with their mirror images.  A pair absent from
    the table in the given order is looked up with the ends exchanged.
    """
    (u, pu), (l, pl) = _parse_type(upper), _parse_type(lower)
    mirrored = pu != pl if (u not in _ACHIRAL and l not in _ACHIRAL) else False
    for key in ((u, l, mirrored), (l, u, mirrored)):
        if key in PAIR_TABLE:
            return PAIR_TABLE[key]
    raise UnknownTypePair(f"no verdict for ({upper})-({lower})")


@dataclass(frozen=True)
class Weight2Segment:
    edges: tuple[str, ...]  # bottom to top
    lower: str
    upper: str
    lower_type: str | None = None
    upper_type: str | None = None


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    result: WIRG
    detail: dict = field(default_factory=dict, compare=False)

    def to_document(self) -> dict:
        return {
            "rule": self.rule,
            "nodes": list(self.nodes),
            "edges": list(self.edges),
            "detail": self.detail,
            "result_edges": len(self.result.edges) if self.result is not None else None,
        }

    def explain(self) -> str:
        text = {
            "whisker-trim": "cut off the 3-disk capped by a local extremum next to its saddle",
            "height-swap": "change the heights of the two singularities; the weight-2 edges disappear",
            "birth-death-cancel": "cancel the two singularities by a birth-death deformation",
            "compressing-disk-witness": "a compressing disk joins the upper and lower singularities",
            "sphere-witness": "a 2-sphere appears as a boundary component",
        }[self.rule]
        return f"{self.rule} at {', '.join(self.nodes)}: {text}"


@dataclass
class SimplifyResult:
    graph: WIRG
    trace: list[RewriteStep]
    exhausted: bool = False
    verdicts: dict[tuple[str, str], str] = field(default_factory=dict)

    def __iter__(self):
        yield self.graph
        yield self.trace


# --------------------------------------------------------------------------
# segments


def weight2_segments(g: WIRG, annotations: dict | None = None) -> list[Weight2Segment]:
    """Maximal height-monotone chains of weight-2 edges, bottom to top."""
    ann = annotations or {}
    w2 = [e for e in g.edges if e.weight == 2]
    below2: dict[str, list[WEdge]] = {}
    above2: dict[str, list[WEdge]] = {}
    for e in w2:
        below2.setdefault(e.upper, []).append(e)
        above2.setdefault(e.lower, []).append(e)

    def passes(n):
        return len(below2.get(n, [])) == 1 and len(above2.get(n, [])) == 1

    segs = []
    for e in sorted(w2, key=lambda e: e.id):
        if passes(e.lower):
            continue
        chain = [e]
        while passes(chain[-1].upper):
            chain.append(above2[chain[-1].upper][0])
        lo, up = e.lower, chain[-1].upper
        segs.append(
            Weight2Segment(tuple(c.id for c in chain), lo, up, ann.get(lo), ann.get(up))
        )
    nh = g.node_map()
    segs.sort(key=lambda s: (nh[s.lower].height, s.lower, s.edges))
    return segs


def _endpoint_shape(g: WIRG, seg: Weight2Segment) -> tuple[str, str]:
    """'bi' or 'tri' for the lower and upper ends, checked against the weights."""
    first, last = g.edge(seg.edges[0]), g.edge(seg.edges[-1])
    lo_below = g.below(seg.lower)
    lo_above = [e for e in g.above(seg.lower) if e.id != first.id]
    up_above = g.above(seg.upper)
    up_below = [e for e in g.below(seg.upper) if e.id != last.id]

    def shape(far, near, where):
        ws = sorted(e.weight for e in far)
        if not near and ws == [1]:
            return "bi"
        if not near and ws == [1, 1]:
            return "tri"
        raise InvalidWIRG([Violation("endpoint-type", f"node {where}", "weight-2 segment end is not 1->2 or 1+1->2")])

    return shape(lo_below, lo_above, seg.lower), shape(up_above, up_below, seg.upper)


def classify_weight2_segment(g: WIRG, seg: Weight2Segment) -> str:
    if seg.lower_type is None or seg.upper_type is None:
        missing = seg.lower if seg.lower_type is None else seg.upper
        raise UnknownTypePair(f"endpoint {missing} of segment {seg.edges[0]} has no type annotation")
    lo_shape, up_shape = _endpoint_shape(g, seg)
    for t, shp, n in ((seg.lower_type, lo_shape, seg.lower), (seg.upper_type, up_shape, seg.upper)):
        k, _ = _parse_type(t)
        if (k <= 3) != (shp == "bi"):
            raise InvalidWIRG(
                [Violation("endpoint-type", f"node {n}", f"type ({t}) does not match a {shp}valent end")]
            )
    return verdict_for_types(seg.upper_type, seg.lower_type)


# --------------------------------------------------------------------------
# elementary rewrites


def _rebuild(g: WIRG, nodes: dict[str, WNode], edges: dict[str, WEdge]) -> WIRG:
    return WIRG(
        tuple(n for n in (nodes.get(x.id) for x in g.nodes) if n is not None),
        tuple(e for e in (edges.get(x.id) for x in g.edges) if e is not None),
    )


def _whisker_sites(g: WIRG) -> list[tuple[str, str]]:
    """(leaf, saddle) pairs that can be trimmed."""
    if len(g.nodes) < 3:
        return []
    hs = [n.height for n in g.nodes]
    hmin, hmax = min(hs), max(hs)
    nm = g.node_map()
    out = []
    for n in g.nodes:
        if g.degree(n.id) != 1 or n.height in (hmin, hmax):
            continue
        (e,) = [x for x in g.edges if n.id in (x.lower, x.upper)]
        s = e.lower if e.upper == n.id else e.upper
        if g.degree(s) != 3:
            continue
        top_leaf = e.upper == n.id
        same = g.above(s) if top_leaf else g.below(s)
        other = g.below(s) if top_leaf else g.above(s)
        if len(same) != 2 or len(other) != 1 or e.weight != 0:
            continue
        sib = [x for x in same if x.id != e.id][0]
        if sib.weight != other[0].weight or sib.lower == sib.upper:
            continue
        if nm[s].index not in (None, 1) or n.index not in (None, 2 if top_leaf else 0):
            continue
        out.append((n.id, s))
    return out


def _trim(g: WIRG, leaf: str, saddle: str) -> WIRG:
    nodes = g.node_map()
    edges = {e.id: e for e in g.edges}
    (le,) = [e for e in g.edges if leaf in (e.lower, e.upper)]
    top_leaf = le.upper == leaf
    same = g.above(saddle) if top_leaf else g.below(saddle)
    (other,) = g.below(saddle) if top_leaf else g.above(saddle)
    (sib,) = [x for x in same if x.id != le.id]
    lo, up = (other, sib) if top_leaf else (sib, other)
    merged = WEdge(lo.id, lo.lower, up.upper, lo.weight)
    del nodes[leaf], nodes[saddle], edges[le.id], edges[up.id]
    edges[lo.id] = merged
    return _rebuild(g, nodes, edges)


def cancel_pairs(g: WIRG) -> tuple[WIRG, list[RewriteStep]]:
    """Trim cancellable whiskers, lowest first, until none is left."""
    steps = []
    while True:
        sites = _whisker_sites(g)
        if not sites:
            return g, steps
        nh = g.node_map()
        leaf, sad = min(sites, key=lambda p: (min(nh[p[0]].height, nh[p[1]].height), p))
        g = _trim(g, leaf, sad)
        steps.append(RewriteStep("whisker-trim", (leaf, sad), (), g))


def _height_swap(g: WIRG, seg: Weight2Segment) -> WIRG:
    nodes = g.node_map()
    edges = {e.id: e for e in g.edges}
    L, U = seg.lower, seg.upper
    lo_shape, up_shape = _endpoint_shape(g, seg)
    chain = set(seg.edges)
    ren = {L: U, U: L}
    for eid, e in list(edges.items()):
        if L in (e.lower, e.upper) or U in (e.lower, e.upper):
            e = replace(e, lower=ren.get(e.lower, e.lower), upper=ren.get(e.upper, e.upper))
        if eid in chain:
            e = replace(e, weight=0)
        edges[eid] = e
    if up_shape == "tri":
        # U now sits low; it keeps one of its two upper edges, the other leaves from L
        ups = sorted(e.id for e in g.above(U))
        edges[ups[0]] = replace(edges[ups[0]], lower=U)
    if lo_shape == "tri":
        downs = sorted(e.id for e in g.below(L))
        edges[downs[1]] = replace(edges[downs[1]], upper=L)
    nl, nu = nodes[L], nodes[U]
    nodes[L] = replace(nl, height=nu.height)
    nodes[U] = replace(nu, height=nl.height)
    return _rebuild(g, nodes, edges)


def _birth_death(g: WIRG, seg: Weight2Segment) -> WIRG:
    nodes = g.node_map()
    edges = {e.id: e for e in g.edges}
    L, U = seg.lower, seg.upper
    (below,) = g.below(L)
    (above,) = g.above(U)
    first, last = seg.edges[0], seg.edges[-1]
    for eid in seg.edges:
        edges[eid] = replace(edges[eid], weight=1)
    if first == last:
        edges[first] = replace(edges[first], lower=below.lower, upper=above.upper)
        del edges[below.id], edges[above.id]
    else:
        edges[first] = replace(edges[first], lower=below.lower)
        edges[last] = replace(edges[last], upper=above.upper)
        del edges[below.id], edges[above.id]
    del nodes[L], nodes[U]
    return _rebuild(g, nodes, edges)


def _birth_death_ok(g: WIRG, seg: Weight2Segment) -> bool:
    a, b = g.node(seg.lower).index, g.node(seg.upper).index
    return a is None or b is None or abs(a - b) == 1


# --------------------------------------------------------------------------
# driver


def _sites(g: WIRG, ann: dict, verdicts: dict, witnessed: set, trace: list):
    """Applicable (height, priority, rule, payload) sites; records witnesses."""
    nh = g.node_map()
    out = []
    for seg in weight2_segments(g, ann):
        key = (seg.lower, seg.upper)
        try:
            v = classify_weight2_segment(g, seg)
        except UnknownTypePair:
            verdicts[key] = "unannotated"
            continue
        verdicts[key] = v
        if v in ("forbidden-compressing-disk", "forbidden-sphere") and key not in witnessed:
            witnessed.add(key)
            rule = "compressing-disk-witness" if v == "forbidden-compressing-disk" else "sphere-witness"
            trace.append(RewriteStep(rule, key, seg.edges, g, {"verdict": v}))
        if v == "reducible-birth-death":
            if _birth_death_ok(g, seg):
                out.append((nh[seg.lower].height, 0, "birth-death-cancel", seg))
            else:
                verdicts[key] = "reducible-birth-death (index parity blocks cancellation)"
        elif v == "reducible-height-swap":
            out.append((nh[seg.lower].height, 1, "height-swap", seg))
    for leaf, sad in _whisker_sites(g):
        out.append((min(nh[leaf].height, nh[sad].height), 2, "whisker-trim", (leaf, sad)))
    out.sort(key=lambda s: (s[0], s[1], str(s[3])))
    return out


def _apply(g: WIRG, rule: str, payload) -> tuple[WIRG, tuple, tuple]:
    if rule == "whisker-trim":
        leaf, sad = payload
        return _trim(g, leaf, sad), (leaf, sad), ()
    if rule == "height-swap":
        return _height_swap(g, payload), (payload.lower, payload.upper), payload.edges
    if rule == "birth-death-cancel":
        return _birth_death(g, payload), (payload.lower, payload.upper), payload.edges
    raise ValueError(rule)


def simplify(
    g: WIRG, annotations: dict | None = None, budget: int = 10_000, rng: random.Random | None = None
) -> SimplifyResult:
    """Apply reducible rewrites until a fixpoint or the step budget.

    The default order takes the lowest site first and breaks ties by rule
    priority (birth-death, height swap, whisker trim).  With ``rng`` the next
    site is drawn at random instead, which is how confluence is exercised.
    """
    bad = validate(g)
    if bad:
        raise InvalidWIRG(bad)
    ann = dict(annotations or {})
    trace: list[RewriteStep] = []
    verdicts: dict = {}
    witnessed: set = set()
    steps = 0
    while True:
        sites = _sites(g, ann, verdicts, witnessed, trace)
        if not sites:
            return SimplifyResult(g, trace, False, verdicts)
        if steps >= budget:
            return SimplifyResult(g, trace, True, verdicts)
        _, _, rule, payload = rng.choice(sites) if rng is not None else sites[0]
        g, nodes, edges = _apply(g, rule, payload)
        for n in nodes:
            if rule != "whisker-trim":
                ann.pop(n, None)
        bad = validate(g)
        if bad:
            raise InvalidWIRG(bad)
        trace.append(RewriteStep(rule, nodes, edges, g))
        steps += 1


def replay(g: WIRG, trace: list[RewriteStep], annotations: dict | None = None) -> WIRG:
    """Re-run the rewrites of a trace from ``g``; witnesses are skipped."""
    ann = dict(annotations or {})
    for step in trace:
        if step.rule in ("compressing-disk-witness", "sphere-witness"):
            continue
        if step.rule == "whisker-trim":
            payload = step.nodes
        else:
            segs = {(s.lower, s.upper): s for s in weight2_segments(g, ann)}
            payload = segs[tuple(step.nodes)]
        g, nodes, _ = _apply(g, step.rule, payload)
        if step.rule != "whisker-trim":
            for n in nodes:
                ann.pop(n, None)
    return g


def trace_json(trace: list[RewriteStep], explain: bool = False) -> str:
    docs = []
    for s in trace:
        d = s.to_document()
        if explain:
            d["explain"] = s.explain()
        docs.append(d)
    return json.dumps(docs, indent=2, sort_keys=True) + "\n"


def weight2_count(g: WIRG) -> int:
    return sum(e.weight == 2 for e in g.edges)


def canonical_text(g: WIRG) -> str:
    return encode(g)
