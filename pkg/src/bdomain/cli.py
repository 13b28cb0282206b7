"""Command line front end.

::

    bdomain gen KIND [--param k=v ...] [--out DIR]
    bdomain analyze (PATH | --gen KIND) [--dir x,y,z] [--seed N] [--samples N] [--rays N] [--out DIR]
    bdomain reeb (PATH | --gen KIND) [--format json|dot] [--out DIR]
    bdomain classify (WIRG.json | PATH | --gen KIND) [--bridge K] [--annotations FILE]
    bdomain simplify WIRG.json [--annotations FILE] [--budget N] [--explain] [--out DIR]
    bdomain visibility (PATH | --gen KIND | WIRG.json --events FILE) [--samples N] [--rays N]
    bdomain diagram (normalize|parse|dot|random) [WORD] [--budget N] [--seed N]

Exit status is 0 on success, 2 when validation finds violations and 1 for
input, output or parse errors.  JSON artifacts depend only on the arguments.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import diagram as dg
from .classify import classify, min_count_check
from .errors import BDomainError, InvalidSurface, InvalidWIRG, SchemaError
from .geometry import KINDS, GeneratorSpec, generate, load_surface, save_surface
from .morse import HeightFunction, perturb_to_morse
from .reeb import analyze as sweep
from .rewrite import replay, simplify, trace_json
from .visibility import basin_analysis, sample_visibility, visibility_verdict
from .wirg import encode, from_document, to_document, validate
from .wirg import to_dot as wirg_dot

__all__ = ["main", "run"]


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _direction(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"direction must be x,y,z (got {text!r})") from None
    if len(parts) != 3 or not any(parts):
        raise argparse.ArgumentTypeError("direction must be three numbers, not all zero")
    return parts


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        val = json.loads(v)
    except json.JSONDecodeError:
        val = v
    return k, val


# --- inputs ----------------------------------------------------------------------


def _spec_from_args(args) -> GeneratorSpec | None:
    if getattr(args, "gen", None):
        d = {"kind": args.gen, **dict(args.param or [])}
        return GeneratorSpec.from_dict(d)
    return None


def _read_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}", "") from None


def _load_input(args):
    """('surface', TriSurface, description) or ('wirg', WIRG, description)."""
    spec = _spec_from_args(args)
    if spec is not None:
        return "surface", generate(spec), {"generator": json.loads(spec.to_json())}
    path = getattr(args, "input", None)
    if path is None:
        raise BDomainError("give an input path or --gen KIND")
    p = Path(path)
    if p.suffix.lower() == ".json":
        doc = _read_json(p)
        if isinstance(doc, dict) and "kind" in doc:
            spec = GeneratorSpec.from_dict(doc)
            return "surface", generate(spec), {"generator": json.loads(spec.to_json())}
        return "wirg", from_document(doc), {"wirg": p.name}
    return "surface", load_surface(p), {"mesh": p.name}


def _height(args, s):
    h = HeightFunction(args.dir)
    return perturb_to_morse(s, h, seed=args.seed)


# --- report sections ------------------------------------------------------------------


def _classification(a, bridge=None, annotations=None) -> dict:
    rep = classify(a.wirg, a.crit, a.surface_graph.betti1(), annotations)
    doc = rep.to_document()
    if bridge:
        doc["min_count"] = min_count_check(rep, bridge)
    return doc


def _visibility(a, samples, rays, seed) -> dict:
    vr = sample_visibility(a.surface, samples, rays, seed)
    basins = basin_analysis(a.wirg, analysis=a)
    rep = classify(a.wirg, a.crit, a.surface_graph.betti1())
    return {
        "sampling": vr.to_document(),
        "basins": [b.to_document() for b in basins],
        "verdict": visibility_verdict(rep, basins),
    }


def _header(desc, args, h) -> dict:
    return {
        "input": desc,
        "direction": list(args.dir),
        "height_direction": [float(x) for x in h.vector],
        "seed": args.seed,
    }


def _violations_exit(violations) -> int:
    for v in violations:
        print(f"violation [{v.rule}] at {v.where}: {v.detail}", file=sys.stderr)
    return 2


def _out(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


# --- subcommands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = GeneratorSpec.from_dict({"kind": args.kind, **dict(args.param or [])})
    s = generate(spec)
    fmt = args.format if args.format in ("off", "obj") else "off"
    out = _out(args) or Path(".")
    path = out / f"{s.name}.{fmt}"
    save_surface(s, path, fmt)
    print(path)
    return 0


def cmd_analyze(args) -> int:
    kind, obj, desc = _load_input(args)
    if kind != "surface":
        raise BDomainError("analyze needs a surface; use classify or simplify for a WIRG file")
    h = _height(args, obj)
    a = sweep(obj, h)
    bad = validate(a.wirg)
    if bad:
        return _violations_exit(bad)
    report = _header(desc, args, h)
    report["critical_points"] = [c.to_row() for c in a.crit]
    report["classification"] = _classification(a, args.bridge)
    report["visibility"] = _visibility(a, args.samples, args.rays, args.seed)
    out = _out(args)
    if out is not None:
        (out / "report.json").write_text(_dumps(report))
        (out / "wirg.json").write_text(encode(a.wirg))
        (out / "reeb_surface.dot").write_text(a.surface_graph.to_dot())
        w = {e.id: e.weight for e in a.wirg.edges}
        idx = {n.id: n.index for n in a.wirg.nodes}
        (out / "reeb_solid.dot").write_text(a.solid_graph.to_dot(w, idx))
        if args.format == "ply":
            vr = sample_visibility(a.surface, args.samples, args.rays, args.seed)
            (out / "visibility.ply").write_text(vr.to_ply())
    if args.format == "json":
        sys.stdout.write(_dumps(report))
    else:
        rep = classify(a.wirg, a.crit, a.surface_graph.betti1())
        sys.stdout.write(rep.to_text())
        print(f"visibility: {report['visibility']['verdict']}")
    return 0


def cmd_reeb(args) -> int:
    kind, obj, desc = _load_input(args)
    if kind != "surface":
        raise BDomainError("reeb needs a surface")
    h = _height(args, obj)
    a = sweep(obj, h)
    doc = _header(desc, args, h)
    doc["surface"] = a.surface_graph.to_document()
    doc["solid"] = a.solid_graph.to_document()
    doc["wirg"] = to_document(a.wirg)
    doc["reeb_map"] = {k: list(v) for k, v in sorted(a.reeb_map.edges.items())}
    out = _out(args)
    w = {e.id: e.weight for e in a.wirg.edges}
    idx = {n.id: n.index for n in a.wirg.nodes}
    if out is not None:
        (out / "reeb.json").write_text(_dumps(doc))
        (out / "wirg.json").write_text(encode(a.wirg))
        (out / "reeb_surface.dot").write_text(a.surface_graph.to_dot())
        (out / "reeb_solid.dot").write_text(a.solid_graph.to_dot(w, idx))
    if args.format == "dot":
        sys.stdout.write(a.solid_graph.to_dot(w, idx))
    else:
        sys.stdout.write(_dumps(doc))
    bad = validate(a.wirg)
    return _violations_exit(bad) if bad else 0


def _annotations(args) -> dict | None:
    if getattr(args, "annotations", None) is None:
        return None
    doc = _read_json(args.annotations)
    if not isinstance(doc, dict):
        raise SchemaError("annotations must map node ids to endpoint types", "")
    return doc


def cmd_classify(args) -> int:
    kind, obj, desc = _load_input(args)
    ann = _annotations(args)
    if kind == "wirg":
        bad = validate(obj)
        if bad:
            return _violations_exit(bad)
        rep = classify(obj, annotations=ann)
        doc = rep.to_document()
        if args.bridge:
            doc["min_count"] = min_count_check(rep, args.bridge)
    else:
        h = _height(args, obj)
        a = sweep(obj, h)
        bad = validate(a.wirg)
        if bad:
            return _violations_exit(bad)
        doc = _classification(a, args.bridge, ann)
        rep = classify(a.wirg, a.crit, a.surface_graph.betti1(), ann)
    if args.format == "json":
        sys.stdout.write(_dumps(doc))
    else:
        sys.stdout.write(rep.to_text())
        if doc.get("min_count"):
            mc = doc["min_count"]
            print(f"min count for {mc['bridge']}-bridge: {mc['status']} ({mc['observed']} vs {mc['expected']})")
    out = _out(args)
    if out is not None:
        (out / "classification.json").write_text(_dumps(doc))
    return 0


def cmd_simplify(args) -> int:
    kind, g, _ = _load_input(args)
    if kind != "wirg":
        raise BDomainError("simplify needs a WIRG JSON file")
    bad = validate(g)
    if bad:
        return _violations_exit(bad)
    ann = _annotations(args)
    rng = random.Random(args.seed) if args.shuffle else None
    res = simplify(g, ann, budget=args.budget, rng=rng)
    if replay(g, res.trace, ann) != res.graph:
        raise BDomainError("trace replay did not reproduce the simplified graph")
    doc = {
        "graph": to_document(res.graph),
        "trace": json.loads(trace_json(res.trace, args.explain)),
        "exhausted": res.exhausted,
        "verdicts": {f"{lo}->{up}": v for (lo, up), v in sorted(res.verdicts.items())},
    }
    out = _out(args)
    if out is not None:
        (out / "simplified.json").write_text(encode(res.graph))
        (out / "trace.json").write_text(trace_json(res.trace, args.explain))
        (out / "simplified.dot").write_text(wirg_dot(res.graph))
    if args.format == "json":
        sys.stdout.write(_dumps(doc))
    else:
        for step in res.trace:
            print(step.explain() if args.explain else f"{step.rule} {' '.join(step.nodes)}")
        print(f"{len(res.trace)} steps, {len(res.graph.edges)} edges left, max weight {res.graph.max_weight}")
    return 0


def cmd_visibility(args) -> int:
    kind, obj, desc = _load_input(args)
    if kind == "wirg":
        events = _read_json(args.events) if args.events else None
        basins = basin_analysis(obj, events)
        rep = classify(obj)
        doc = {"basins": [b.to_document() for b in basins], "verdict": visibility_verdict(rep, basins)}
    else:
        h = _height(args, obj)
        a = sweep(obj, h)
        doc = _visibility(a, args.samples, args.rays, args.seed)
    out = _out(args)
    if out is not None:
        (out / "visibility.json").write_text(_dumps(doc))
        if args.format == "ply" and kind == "surface":
            vr = sample_visibility(obj, args.samples, args.rays, args.seed)
            (out / "visibility.ply").write_text(vr.to_ply())
    if args.format == "json":
        sys.stdout.write(_dumps(doc))
    else:
        if "sampling" in doc:
            sm = doc["sampling"]["summary"]
            print(f"{sm['visible']}/{sm['samples']} sampled points visible ({sm['rays_per_point']} rays per point)")
        for b in doc["basins"]:
            extra = b["witness"] or (" / ".join(b["pair"]) if b["pair"] else "")
            print(f"basin {b['minimum']}: cases {b['cases']} -> {b['outcome']} {extra}".rstrip())
        print(doc["verdict"])
    return 0


def cmd_diagram(args) -> int:
    if args.action == "random":
        w = dg.random_word(random.Random(args.seed))
        print(dg.render(w))
        return 0
    if args.word is None:
        raise BDomainError("diagram needs a word")
    w = dg.parse(args.word)
    if args.action == "parse":
        print(dg.render(w))
        print(f"profile {w.profile}, {w.crossings} crossings, width {w.max_strands}")
    elif args.action == "dot":
        sys.stdout.write(dg.to_dot(w))
    else:
        res = dg.normalize(w, budget=args.budget)
        if args.format == "json":
            doc = {
                "input": dg.render(w),
                "word": dg.render(res.word),
                "status": res.status,
                "states": res.states,
                "trace": [list(t) for t in res.trace],
            }
            sys.stdout.write(_dumps(doc))
        else:
            print(dg.render(res.word))
            if args.explain:
                for move, site in res.trace:
                    print(f"  {move} at {site}")
            print(f"{res.status} after {res.states} states")
        if res.status != "planar":
            return 2
    return 0


# --- parser ------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="bdomain", description="Weighted indexed Reeb graphs of bounded domains.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, source=True, fmt=("text", "json")):
        if source:
            p.add_argument("input", nargs="?", help="mesh (.off/.obj), WIRG or generator spec (.json)")
            p.add_argument("--gen", choices=sorted(KINDS), help="build a fixture instead of reading a file")
            p.add_argument("--param", type=_param, action="append", metavar="KEY=VALUE", help="generator field")
        p.add_argument("--dir", type=_direction, default=(0.0, 0.0, 1.0), metavar="X,Y,Z")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("gen", help="write a fixture surface")
    p.add_argument("kind", choices=sorted(KINDS))
    p.add_argument("--param", type=_param, action="append", metavar="KEY=VALUE")
    common(p, source=False, fmt=("off", "obj"))
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="full pipeline: Reeb graphs, classification, visibility")
    common(p, fmt=("text", "json", "ply"))
    p.add_argument("--samples", type=_positive, default=200)
    p.add_argument("--rays", type=_positive, default=64)
    p.add_argument("--bridge", type=_positive, help="declared bridge number for the 4k count check")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reeb", help="surface and solid Reeb graphs and the WIRG")
    common(p, fmt=("json", "dot"))
    p.set_defaults(func=cmd_reeb)

    p = sub.add_parser("classify", help="rule-table verdicts")
    common(p)
    p.add_argument("--bridge", type=_positive)
    p.add_argument("--annotations", metavar="FILE", help="endpoint types of weight-2 segments")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simplify", help="apply reducible rewrites to a WIRG")
    common(p)
    p.add_argument("--annotations", metavar="FILE")
    p.add_argument("--budget", type=_positive, default=10_000)
    p.add_argument("--shuffle", action="store_true", help="pick rewrite sites at random from --seed")
    p.add_argument("--explain", action="store_true")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("visibility", help="ray sampling and basin analysis")
    common(p, fmt=("text", "json", "ply"))
    p.add_argument("--samples", type=_positive, default=200)
    p.add_argument("--rays", type=_positive, default=64)
    p.add_argument("--events", metavar="FILE", help="basin events for a WIRG input")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("diagram", help="handlebody diagram words")
    p.add_argument("action", choices=("normalize", "parse", "dot", "random"))
    p.add_argument("word", nargs="?")
    p.add_argument("--budget", type=_positive, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_diagram)
    return top


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidWIRG as exc:
        return _violations_exit(exc.violations)
    except InvalidSurface as exc:
        print(f"bdomain: error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except BDomainError as exc:
        print(f"bdomain: error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bdomain: error [io]: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
