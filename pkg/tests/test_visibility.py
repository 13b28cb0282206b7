import math

import numpy as np
import pytest

from bdomain.classify import classify
from bdomain.errors import MissingMarks
from bdomain.fixtures import basin_cancellable, two_bridge_events, two_bridge_exterior
from bdomain.visibility import (
    VERDICT_TEXT,
    basin_analysis,
    basin_events,
    hemisphere_directions,
    ray_hits_moller,
    ray_hits_watertight,
    sample_visibility,
    visibility_verdict,
)
from bdomain.wirg import WNode

from conftest import analysis, surface


def unit_triangle():
    return np.array([[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]])


def test_ray_tests_agree_on_simple_cases():
    tri = unit_triangle()
    o = np.zeros(3)
    for d, hit in [((0.2, 0.2, 1), True), ((0, 0, -1), False), ((2, 2, 1), False), ((0.5, 0.5, 1), True)]:
        d = np.array(d, float)
        assert ray_hits_watertight(tri, o, d[None])[0] == hit
        assert ray_hits_moller(tri, o, d) == hit


def test_shared_edge_is_watertight():
    # a ray through the diagonal shared by two triangles must hit one of them
    quad = np.array([
        [[0, 0, 1], [1, 0, 1], [1, 1, 1]],
        [[0, 0, 1], [1, 1, 1], [0, 1, 1]],
    ], float)
    o = np.array([0.0, 0.0, 0.0])
    rng = np.random.default_rng(0)
    for s in rng.random(50):
        d = np.array([s, s, 1.0])
        assert ray_hits_watertight(quad, o, d[None])[0]


def test_ray_tests_agree_on_random_rays():
    s = surface("torus-horizontal")
    tri = s.vertices[s.triangles]
    rng = np.random.default_rng(1)
    o = np.array([0.0, 0.0, 0.0])
    d = rng.normal(size=(200, 3))
    wt = ray_hits_watertight(tri, o, d)
    mt = np.array([ray_hits_moller(tri, o, x) for x in d])
    assert (wt == mt).mean() > 0.99


def test_directions_start_at_normal_and_stay_outside():
    n = np.array([0.0, 0.6, 0.8])
    d = hemisphere_directions(n, 64, np.random.default_rng(0))
    assert np.allclose(d[0], n)
    assert np.all(d @ n > 0)
    assert np.allclose(np.linalg.norm(d, axis=1), 1)


def test_ellipsoid_visible_with_normal_ray():
    r = sample_visibility(surface("ellipsoid"), samples=200, rays=1, seed=0)
    assert r.fraction_visible == 1.0


def test_witnesses_reverify():
    s = surface("torus-horizontal")
    r = sample_visibility(s, samples=50, rays=32, seed=2)
    tri = s.vertices[s.triangles]
    eps = 1e-6 * s.bbox_diagonal
    nrm = s.face_normals()
    for p, st, w in zip(r.points, r.status, r.witness):
        assert st in ("visible", "unknown")
        if st == "visible":
            f = np.argmin(np.linalg.norm(s.vertices[s.triangles].mean(1) - p, axis=1))
            assert not ray_hits_moller(tri, p + eps * nrm[f], np.array(w))


def test_mug_floor_unknown_and_centre_visible():
    R = 2.0
    pts = [[rr * R * math.cos(a), rr * R * math.sin(a), 0.6 * R] for rr, a in [(0.0, 0.0), (0.55, 2.0)]]
    r = sample_visibility(surface("mug"), rays=1024, seed=0, points=np.array(pts))
    assert r.status == ["visible", "unknown"]


def test_sampling_deterministic():
    s = surface("sphere")
    assert sample_visibility(s, 20, 4, seed=5).to_json() == sample_visibility(s, 20, 4, seed=5).to_json()


def test_ply_export():
    r = sample_visibility(surface("sphere"), 5, 1, seed=0)
    text = r.to_ply()
    assert text.startswith("ply") and text.count("\n") == 10 + 5


def test_two_bridge_basin():
    (b,) = basin_analysis(two_bridge_exterior(), two_bridge_events())
    assert b.outcome == "invisible-witness" and b.witness == "n2" and b.cases == (1,)


def test_exterior_arrival_cancels():
    g, ev = basin_cancellable()
    (b,) = basin_analysis(g, ev)
    assert b.outcome == "cancellable-pair" and b.pair == ("b", "c")


@pytest.mark.parametrize(
    "events, cases, outcome",
    [
        ([{"node": "x", "kind": "split", "side": "exterior"}, {"node": "y", "kind": "split", "side": "interior"}], (2, 1), "invisible-witness"),
        ([{"node": "x", "kind": "merge", "side": "interior", "witness": "m0"}], (4,), "invisible-witness"),
        ([{"node": "x", "kind": "cap"}], (5,), "sphere-anomaly"),
        ([{"node": "x", "kind": "split", "side": "exterior"}, {"node": "y", "kind": "cap", "side": "exterior"}], (2, 5), "sphere-anomaly"),
        ([{"node": "x", "kind": "split", "side": "exterior"}, {"node": "y", "kind": "cap", "side": "interior"}], (2, 6), "cancellable-pair"),
        ([{"node": "x", "kind": "split", "side": "exterior"}], (2,), "continues"),
    ],
)
def test_case_automaton(events, cases, outcome):
    g = two_bridge_exterior()
    (b,) = basin_analysis(g, {"n1": events})
    assert b.cases == cases and b.outcome == outcome
    if cases == (4,):
        assert b.witness == "m0"
    if cases == (2, 6):
        assert b.pair == ("x", "y")


def test_missing_marks():
    g = two_bridge_exterior()
    with pytest.raises(MissingMarks):
        basin_analysis(g, {})
    unmarked = g.with_nodes(WNode(n.id, n.height, n.index) if n.id == "n4" else n for n in g.nodes)
    with pytest.raises(MissingMarks):
        basin_analysis(unmarked, two_bridge_events())


def test_no_concave_points_no_basins():
    a = analysis("torus-horizontal")
    assert basin_analysis(a.wirg, analysis=a) == []
    assert "R3" in classify(a.wirg, a.crit).rules


def test_mug_basin_from_sweep():
    a = analysis("mug")
    ev = basin_events(a)
    (key,) = ev
    assert ev[key][0]["kind"] == "split" and ev[key][0]["side"] == "interior"
    (b,) = basin_analysis(a.wirg, analysis=a)
    assert b.outcome == "invisible-witness"


def test_verdict_precedence():
    a = analysis("torus-horizontal")
    rep = classify(a.wirg, a.crit)
    assert visibility_verdict(rep, []) == VERDICT_TEXT["handlebody"]
    g = two_bridge_exterior()
    rep = classify(g)
    inv = basin_analysis(g, two_bridge_events())
    assert visibility_verdict(rep, inv) == VERDICT_TEXT["minNCP"]
    g2, ev = basin_cancellable()
    assert visibility_verdict(rep, inv + basin_analysis(g2, ev)) == VERDICT_TEXT["reducible"]
