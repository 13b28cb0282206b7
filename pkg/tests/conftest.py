import functools
import json

import pytest

from bdomain import HeightFunction, generate, perturb_to_morse
from bdomain.reeb import analyze

# fixture name -> (generator fields, sweep direction)
FIXTURES = {
    "sphere": ({"kind": "sphere"}, (0, 0, 1)),
    "ellipsoid": ({"kind": "ellipsoid"}, (0, 0, 1)),
    "torus-horizontal": ({"kind": "torus-horizontal"}, (0, 0, 1)),
    "torus-vertical-tilted": ({"kind": "torus-vertical-tilted"}, (0, 0, 1)),
    "trefoil": ({"kind": "knot-tube", "knot": "trefoil"}, (0, 0, 1)),
    "figure-eight": ({"kind": "knot-tube", "knot": "figure-eight"}, (0, 0, 1)),
    "mug": ({"kind": "mug"}, (0, 0, 1)),
    "pretzel": ({"kind": "genus2-pretzel"}, (0.3, 0.2, 1)),
}


@functools.lru_cache(maxsize=None)
def surface(name):
    spec, _ = FIXTURES[name]
    return generate(dict(spec))


@functools.lru_cache(maxsize=None)
def analysis(name):
    s = surface(name)
    _, d = FIXTURES[name]
    return analyze(s, perturb_to_morse(s, HeightFunction(d)))


@pytest.fixture
def fixture_analysis():
    return analysis


@pytest.fixture
def fixture_surface():
    return surface


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True)


# acceptance criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
