"""Rule-table verdicts on a weighted indexed Reeb graph.

=====  ============================================================  ==========================================
rule   condition                                                     verdict
=====  ============================================================  ==========================================
R1     every weight is 0                                             handlebody; regular neighbourhood of R_F
R2     every weight is at most 1                                     handlebody
R3     no concave index-2 point, or no concave index-0 point         embedded handlebody
R4     torus boundary and weights at most 2                          if a knot exterior, then a solid torus
R5     torus boundary but b1 of the surface Reeb graph is not 1      data inconsistency
R6     torus boundary, weights at most 2 and b1(R_F) = 1              tubular neighbourhood of a knot
R7     none of R1-R4, R6                                             inconclusive at Reeb level
=====  ============================================================  ==========================================

Every rule that applies is reported.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import InvalidWIRG
from .wirg import WIRG, betti1, validate

__all__ = ["Verdict", "ClassificationReport", "classify", "min_count_check", "RULES"]

RULES = {
    "R1": "handlebody; regular neighbourhood of R_F",
    "R2": "handlebody",
    "R3": "embedded handlebody",
    "R4": "if this domain is a knot exterior then it is a solid torus (unknot)",
    "R5": "data inconsistency: torus boundary needs b1(R_F|dM) = 1",
    "R6": "tubular neighbourhood of a knot",
    "R7": "inconclusive at Reeb level",
}


@dataclass(frozen=True)
class Verdict:
    rule: str
    verdict: str
    condition: str | None = None
    witness: list | None = None


@dataclass(frozen=True)
class ClassificationReport:
    genus: int
    euler: int
    max_weight: int
    betti1_surface: int | None
    betti1_solid: int
    critical_count: int
    verdicts: tuple[Verdict, ...]
    concave: dict = field(default_factory=dict)
    min_count: dict | None = None

    @property
    def rules(self) -> list[str]:
        return [v.rule for v in self.verdicts]

    def fired(self, rule: str) -> bool:
        return rule in self.rules

    def to_document(self) -> dict:
        d = asdict(self)
        d["verdicts"] = [asdict(v) for v in self.verdicts]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"genus {self.genus} (chi {self.euler}), {self.critical_count} critical points, max weight {self.max_weight}",
            f"b1(surface Reeb) = {self.betti1_surface if self.betti1_surface is not None else 'n/a'}, "
            f"b1(solid Reeb) = {self.betti1_solid}",
        ]
        for v in self.verdicts:
            s = f"  {v.rule}: {v.verdict}"
            if v.condition:
                s += f"  [{v.condition}]"
            if v.witness:
                s += f"  witness: {v.witness}"
            lines.append(s)
        return "\n".join(lines) + "\n"


def _euler_from_nodes(g: WIRG) -> int:
    chi = 0
    for n in g.nodes:
        if n.index is None:
            raise InvalidWIRG([])
        chi += (-1) ** n.index
    return chi


def classify(
    g: WIRG,
    crit=None,
    betti1_surface: int | None = None,
    annotations: dict | None = None,
) -> ClassificationReport:
    """Apply the rule table.

    ``crit`` (critical points with multiplicities) fixes the Euler
    characteristic when given; otherwise node indices are used.  R5 is only
    checked when the surface Reeb graph's first Betti number is supplied.
    """
    bad = validate(g)
    if bad:
        raise InvalidWIRG(bad)
    if crit is not None:
        chi = sum((-1) ** c.index * c.multiplicity for c in crit)
        count = len(crit)
    else:
        if any(n.index is None for n in g.nodes):
            raise InvalidWIRG([])
        chi = _euler_from_nodes(g)
        count = len(g.nodes)
    genus = (2 - chi) // 2
    w = g.max_weight
    b1 = betti1(g)
    concave0 = sorted(n.id for n in g.nodes if n.index == 0 and n.convexity == "concave")
    concave2 = sorted(n.id for n in g.nodes if n.index == 2 and n.convexity == "concave")
    marks_known = all(n.convexity is not None for n in g.nodes if n.index in (0, 2))

    out: list[Verdict] = []
    if w == 0:
        out.append(Verdict("R1", f"{RULES['R1']} (genus {b1})", witness=[f"all {len(g.edges)} edges have weight 0"]))
    if w <= 1:
        out.append(Verdict("R2", RULES["R2"], witness=[f"max weight {w}"]))
    if marks_known and (not concave2 or not concave0):
        which = "index 2" if not concave2 else "index 0"
        out.append(Verdict("R3", RULES["R3"], witness=[f"no concave critical point of {which}"]))
    torus = genus == 1
    if torus and w <= 2:
        out.append(
            Verdict("R4", RULES["R4"], condition="holds only under the hypothesis that the domain is a knot exterior")
        )
    if torus and betti1_surface is not None and betti1_surface != 1:
        out.append(Verdict("R5", RULES["R5"], witness=[f"b1(R_F|dM) = {betti1_surface}"]))
    if torus and w <= 2 and b1 == 1:
        out.append(Verdict("R6", RULES["R6"], witness=["R_F has the homotopy type of a circle"]))
    if not any(v.rule in ("R1", "R2", "R3", "R4", "R6") for v in out):
        from .rewrite import weight2_segments  # local import keeps the module graph acyclic

        segs = [f"{s.lower}->{s.upper} ({len(s.edges)} edges)" for s in weight2_segments(g, annotations)]
        out.append(Verdict("R7", RULES["R7"], witness=segs or None))
    return ClassificationReport(
        genus=genus,
        euler=chi,
        max_weight=w,
        betti1_surface=betti1_surface,
        betti1_solid=b1,
        critical_count=count,
        verdicts=tuple(out),
        concave={"index0": concave0, "index2": concave2},
    )


def min_count_check(report: ClassificationReport, k: int) -> dict:
    """Compare the observed critical count with 4k for a declared k-bridge knot."""
    expected = 4 * k
    seen = report.critical_count
    if seen == expected:
        status = "exact"
    elif seen > expected:
        status = "slack"
    else:
        status = "contradiction"
    return {"status": status, "observed": seen, "expected": expected, "slack": seen - expected, "bridge": k}
