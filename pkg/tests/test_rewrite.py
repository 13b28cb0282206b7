import random

import pytest

from bdomain.errors import InvalidWIRG, UnknownTypePair
from bdomain.rewrite import (
    PAIR_TABLE,
    cancel_pairs,
    classify_weight2_segment,
    replay,
    simplify,
    trace_json,
    verdict_for_types,
    weight2_segments,
)
from bdomain.wirg import WEdge, WIRG, WNode, betti1, validate

# The weight-2 endpoint case table, transcribed pair by pair as "upper-lower".
CASES = {
    "(1)-(1)": "forbidden-compressing-disk",
    "(2)-(2)": "forbidden-compressing-disk",
    "(3)-(3)": "forbidden-sphere",
    "(1)-(1)'": "reducible-height-swap",
    "(1)-(2)": "reducible-height-swap",
    "(1)-(3)'": "reducible-height-swap",
    "(3)-(3)'": "reducible-height-swap",
    "(1)-(3)": "reducible-birth-death",
    "(2)-(3)": "reducible-birth-death",
    "(4)-(1)": "reducible-height-swap",
    "(4)-(2)": "survivor",
    "(4)-(3)": "reducible-height-swap",
    "(5)-(1)": "survivor",
    "(5)-(1)'": "reducible-height-swap",
    "(5)-(2)": "reducible-height-swap",
    "(5)-(3)": "reducible-height-swap",
    "(5)-(3)'": "survivor",
    "(4)-(4)": "forbidden-end-part",
    "(4)-(5)": "survivor",
    "(5)-(5)": "forbidden-end-part",
    "(5)-(5)'": "survivor",
}


def split(case):
    up, lo = case.split("-")
    return up, lo


@pytest.mark.parametrize("case", sorted(CASES))
def test_case_table(case):
    up, lo = split(case)
    assert verdict_for_types(up, lo) == CASES[case]


def test_table_size_and_mirror_symmetry():
    assert len(PAIR_TABLE) == len(CASES) == 21
    # mirroring both ends leaves the verdict unchanged
    for case, v in CASES.items():
        up, lo = split(case)
        flip = lambda t: t[:-1] if t.endswith("'") else t + "'"  # noqa: E731
        assert verdict_for_types(flip(up), flip(lo)) == v
    # achiral types ignore the mark
    assert verdict_for_types("(4)'", "(2)") == verdict_for_types("(4)", "(2)'") == "survivor"


def test_unknown_types():
    with pytest.raises(UnknownTypePair):
        verdict_for_types("(6)", "(1)")


def ladder(lower_index=1, upper_index=1):
    """0,1,2,1,0 weights with a single weight-2 edge from n2 to n3."""
    nodes = (
        WNode("n0", 0.0, 0, "convex"),
        WNode("n1", 1.0, 0, "concave"),
        WNode("n2", 2.0, lower_index, **({"saddle_normal": "down"} if lower_index == 1 else {"convexity": "concave"})),
        WNode("n3", 3.0, upper_index, **({"saddle_normal": "up"} if upper_index == 1 else {"convexity": "concave"})),
        WNode("n4", 4.0, 1, saddle_normal="up"),
        WNode("n5", 5.0, 2, "convex"),
    )
    w = (0, 1, 2, 1, 0)
    return WIRG(nodes, tuple(WEdge(f"e{i}", f"n{i}", f"n{i + 1}", x) for i, x in enumerate(w)))


def test_height_swap_clears_weight_two():
    g = ladder()
    res = simplify(g, {"n2": "2", "n3": "1"})
    assert [s.rule for s in res.trace] == ["height-swap"]
    assert validate(res.graph) == []
    assert res.graph.max_weight == 1
    assert replay(g, res.trace, {"n2": "2", "n3": "1"}) == res.graph


def test_birth_death_cancels_pair():
    g = ladder(lower_index=1, upper_index=2)
    res = simplify(g, {"n2": "3", "n3": "1"})
    assert [s.rule for s in res.trace] == ["birth-death-cancel"]
    assert len(res.graph.nodes) == len(g.nodes) - 2
    assert validate(res.graph) == []
    chi = lambda h: sum((-1) ** n.index for n in h.nodes)  # noqa: E731
    assert chi(res.graph) == chi(g)


def test_birth_death_blocked_by_index_parity():
    g = ladder(lower_index=0, upper_index=2)
    g = g.with_nodes(n if n.id != "n1" else WNode("n1", 1.0, 1, saddle_normal="up") for n in g.nodes)
    res = simplify(g, {"n2": "3", "n3": "1"})
    assert res.trace == []
    assert "parity" in res.verdicts[("n2", "n3")]


def test_forbidden_pair_records_witness():
    g = ladder()
    res = simplify(g, {"n2": "1", "n3": "1"})
    assert [s.rule for s in res.trace] == ["compressing-disk-witness"]
    assert res.graph == g
    assert "compressing" in trace_json(res.trace, explain=True)


def test_type_must_match_valence():
    g = ladder()
    (seg,) = weight2_segments(g, {"n2": "4", "n3": "1"})
    with pytest.raises(InvalidWIRG):
        classify_weight2_segment(g, seg)


def whiskered():
    nodes = (
        WNode("a", 0.0, 0, "convex"),
        WNode("s", 1.0, 1, saddle_normal="up"),
        WNode("m", 2.0, 2, "convex"),
        WNode("b", 3.0, 2, "convex"),
    )
    edges = (WEdge("e0", "a", "s", 0), WEdge("e1", "s", "m", 0), WEdge("e2", "s", "b", 0))
    return WIRG(nodes, edges)


def test_whisker_trim():
    g2, steps = cancel_pairs(whiskered())
    assert [s.rule for s in steps] == ["whisker-trim"]
    assert [n.id for n in g2.nodes] == ["a", "b"]
    assert validate(g2) == []


def two_swaps():
    """Two independent reducible weight-2 segments and a whisker."""
    nodes = [WNode("n0", 0.0, 0, "convex")]
    ws = [0, 1, 2, 1, 0, 1, 2, 1, 0]
    for i in range(1, len(ws)):
        up = ws[i] > ws[i - 1]
        nodes.append(WNode(f"n{i}", float(i), 1, saddle_normal="up" if up else "down"))
    nodes[1] = WNode("n1", 1.0, 0, "concave")
    nodes[5] = WNode("n5", 5.0, 0, "concave")
    nodes.append(WNode("n9", 9.0, 2, "convex"))
    edges = [WEdge(f"e{i}", f"n{i}", f"n{i + 1}", w) for i, w in enumerate(ws)]
    # whisker: local max hanging off a split saddle on the bottom weight-0 edge
    nodes.insert(1, WNode("w", 0.5, 1, saddle_normal="up"))
    nodes.insert(2, WNode("wm", 0.7, 2, "convex"))
    edges[0] = WEdge("e0", "w", "n1", 0)
    edges += [WEdge("f0", "n0", "w", 0), WEdge("f1", "w", "wm", 0)]
    ann = {"n2": "2", "n3": "1", "n6": "2", "n7": "1"}
    return WIRG(tuple(nodes), tuple(edges)), ann


def test_confluence_under_random_order():
    g, ann = two_swaps()
    assert validate(g) == []
    ref = simplify(g, ann).graph
    assert ref.max_weight <= 1
    for seed in range(20):
        res = simplify(g, ann, rng=random.Random(seed))
        assert res.graph.is_isomorphic(ref)
        assert replay(g, res.trace, ann) == res.graph


def test_budget_stops_early():
    g, ann = two_swaps()
    res = simplify(g, ann, budget=1)
    assert res.exhausted and len(res.trace) == 1


def test_simplify_keeps_betti_number():
    g, ann = two_swaps()
    assert betti1(simplify(g, ann).graph) == betti1(g)
