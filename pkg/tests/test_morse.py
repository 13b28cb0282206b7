import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdomain import HeightFunction, perturb_to_morse
from bdomain.errors import NotMorse, NotMorseAfterTieBreak
from bdomain.geometry import euler_characteristic, make_surface
from bdomain.morse import critical_points, critical_points_json, euler_sum, is_morse, vertex_ranks
from bdomain.reeb import analyze

from conftest import surface

unit = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1)


@settings(max_examples=25, deadline=None)
@given(unit)
@pytest.mark.parametrize("name", ["sphere", "torus-horizontal", "pretzel"])
def test_euler_sum_matches_mesh(name, d):
    s = surface(name)
    assert euler_sum(critical_points(s, HeightFunction(d))) == euler_characteristic(s)


def test_sphere_has_one_min_one_max():
    crit = critical_points(surface("sphere"), HeightFunction((0, 0, 1)))
    assert [c.index for c in crit] == [0, 2]
    assert [c.convexity for c in crit] == ["convex", "convex"]


def test_torus_index_sequence():
    crit = critical_points(surface("torus-horizontal"), HeightFunction((0, 0, 1)))
    assert [c.index for c in crit] == [0, 1, 1, 2]


def test_mug_concave_marks():
    s = surface("mug")
    crit = critical_points(s, perturb_to_morse(s, HeightFunction((0, 0, 1))))
    conc = sorted((c.index, c.convexity) for c in crit if c.convexity == "concave")
    assert conc == [(0, "concave"), (2, "concave")]


def test_ranks_are_a_permutation():
    s = surface("trefoil")
    r = vertex_ranks(s, HeightFunction((0.2, 0.1, 1)))
    assert sorted(r.tolist()) == list(range(s.n_vertices))


def test_ties_broken_by_index():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    t = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    s = make_surface(v, t)
    crit = critical_points(s, HeightFunction((0, 0, 1)))
    assert [(c.vertex, c.index) for c in crit] == [(0, 0), (3, 2)]


def test_coincident_critical_values_are_not_morse():
    s = surface("torus-horizontal")
    h = HeightFunction((1, 0, 0))
    assert not is_morse(s, h)
    with pytest.raises(NotMorse):
        analyze(s, h)
    p = perturb_to_morse(s, h, seed=3)
    assert is_morse(s, p)
    assert np.degrees(np.arccos(np.clip(p.vector @ h.vector, -1, 1))) < 0.1
    assert perturb_to_morse(s, h, seed=3) == p


def test_monkey_saddle_multiplicity():
    # z = Re((x+iy)^3) sampled on a hexagonal fan, closed off by a cone below
    ang = np.arange(6) * np.pi / 3
    ring = np.stack([np.cos(ang), np.sin(ang), np.cos(3 * ang) * 0.5], axis=1)
    v = np.vstack([[0, 0, 0], ring, [0, 0, -3]])
    t = [[0, 1 + i, 1 + (i + 1) % 6] for i in range(6)] + [[7, 1 + (i + 1) % 6, 1 + i] for i in range(6)]
    s = make_surface(v, np.array(t))
    crit = critical_points(s, HeightFunction((0, 0, 1)))
    saddle = [c for c in crit if c.vertex == 0]
    assert saddle and saddle[0].multiplicity == 2
    assert euler_sum(crit) == 2
    with pytest.raises(NotMorseAfterTieBreak):
        critical_points(s, HeightFunction((0, 0, 1)), strict=True)


def test_json_rows():
    crit = critical_points(surface("sphere"), HeightFunction((0, 0, 1)))
    assert '"index": 0' in critical_points_json(crit)


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        HeightFunction((0, 0, 0))
