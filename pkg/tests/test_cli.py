import json
import subprocess
import sys

import pytest

from bdomain.cli import run
from bdomain.fixtures import torus_with_survivor, two_bridge_events, two_bridge_exterior
from bdomain.wirg import WEdge, WIRG, WNode, encode


def weight_sum_violation():
    nodes = (
        WNode("a", 0.0, 0, "convex"),
        WNode("s", 1.0, 1, saddle_normal="up"),
        WNode("t", 2.0, 1, saddle_normal="up"),
        WNode("b", 3.0, 2, "convex"),
    )
    edges = (
        WEdge("e0", "a", "s", 0),
        WEdge("e1", "s", "t", 1),
        WEdge("e2", "s", "t", 0),
        WEdge("e3", "t", "b", 0),
    )
    return WIRG(nodes, edges)


def test_analyze_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    assert run(["analyze", "--gen", "torus-horizontal", "--dir", "0,0,1", "--out", str(out)]) == 0
    for name in ("report.json", "reeb_surface.dot", "reeb_solid.dot", "wirg.json"):
        assert (out / name).exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["classification"]["verdicts"][0]["rule"] == "R1"
    assert rep["visibility"]["verdict"].startswith("handlebody")
    assert "handlebody" in capsys.readouterr().out


def test_analyze_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run(["analyze", "--gen", "mug", "--seed", "3", "--samples", "20", "--rays", "8", "--out", str(tmp_path / d)]) == 0
    for name in ("report.json", "wirg.json", "reeb_solid.dot"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_analyze_is_composition(tmp_path, capsys):
    args = ["--gen", "torus-vertical-tilted", "--seed", "1"]
    vis = ["--samples", "30", "--rays", "8"]
    assert run(["analyze", *args, *vis, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    rep = json.loads((tmp_path / "report.json").read_text())
    assert run(["classify", *args, "--format", "json"]) == 0
    cls = json.loads(capsys.readouterr().out)
    assert run(["visibility", *args, *vis, "--format", "json"]) == 0
    visdoc = json.loads(capsys.readouterr().out)
    assert run(["reeb", *args]) == 0
    reeb = json.loads(capsys.readouterr().out)
    assert rep["classification"] == cls
    assert rep["visibility"] == visdoc
    assert json.loads((tmp_path / "wirg.json").read_text()) == reeb["wirg"]


def test_diagram_normalize(capsys):
    assert run(["diagram", "normalize", "cup Y1 s1 L1 cap"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "cup Y1 L1 cap"
    assert "planar" in out


def test_diagram_bad_word(capsys):
    assert run(["diagram", "normalize", "cup Q1 cap"]) == 1
    assert "diagram.lex" in capsys.readouterr().err


def test_classify_bad_wirg(tmp_path, capsys):
    p = tmp_path / "bad_wirg.json"
    p.write_text(encode(weight_sum_violation()))
    assert run(["classify", str(p)]) == 2
    assert "[weight-sum]" in capsys.readouterr().err


def test_classify_and_visibility_on_fixture_files(tmp_path, capsys):
    g = tmp_path / "tb.json"
    g.write_text(encode(two_bridge_exterior()))
    ev = tmp_path / "ev.json"
    ev.write_text(json.dumps(two_bridge_events()))
    assert run(["classify", str(g), "--bridge", "2"]) == 0
    assert "exact" in capsys.readouterr().out
    assert run(["classify", str(g)]) == 0
    assert "R7" in capsys.readouterr().out
    assert run(["visibility", str(g), "--events", str(ev)]) == 0
    assert "under minNCP" in capsys.readouterr().out


def test_simplify_reports_survivor(tmp_path, capsys):
    g, ann = torus_with_survivor()
    gp, ap = tmp_path / "g.json", tmp_path / "a.json"
    gp.write_text(encode(g))
    ap.write_text(json.dumps(ann))
    assert run(["simplify", str(gp), "--annotations", str(ap), "--format", "json", "--out", str(tmp_path / "o")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdicts"] == {"m->u": "survivor"}
    assert (tmp_path / "o" / "trace.json").exists()


def test_missing_file_is_io_error(capsys):
    assert run(["classify", "/nonexistent/x.json"]) == 1


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{")
    assert run(["classify", str(p)]) == 1
    assert "wirg.schema" in capsys.readouterr().err


def test_gen_and_reload(tmp_path, capsys):
    assert run(["gen", "sphere", "--param", "res=16", "--out", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    assert run(["reeb", path, "--format", "dot"]) == 0
    assert "reeb_solid" in capsys.readouterr().out


def test_bad_direction():
    with pytest.raises(SystemExit):
        run(["reeb", "--gen", "sphere", "--dir", "0,0,0"])


def test_console_script(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "bdomain.cli", "diagram", "parse", "cup Y1 L1 cap"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0 and r.stdout.startswith("cup Y1 L1 cap")
