"""End-to-end pipeline: net -> classification -> constraints -> control places."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classification import StateClassification, classify, classify_table
from .constraints import (
    Constraint,
    Cover,
    Reduction,
    initial_constraints,
    minimal_cover,
    reduce_constraints,
)
from .model import (
    QUASI,
    REAL,
    Marking,
    PartitionError,
    PetriNet,
    UnitInvariant,
    consistent_states,
    partition_invariants,
    sort_states,
    unit_invariants,
)
from .reachability import DEFAULT_MAX_STATES, ReachabilityGraph, build_rg
from .synthesis import SynthesisResult, VerificationReport, arc_count, synthesize, verify_mpc


@dataclass(frozen=True)
class RunConfig:
    max_states: int = DEFAULT_MAX_STATES
    exact_cover: bool = False
    tie_break: str = "arcs"

    def __post_init__(self):
        if self.tie_break not in ("arcs", "places"):
            raise ValueError(f"tie_break must be 'arcs' or 'places', not {self.tie_break!r}")


@dataclass
class Analysis:
    net: PetriNet
    invariants: list[UnitInvariant]
    possible: list[Marking] | None
    partition_error: str | None
    partition: list[UnitInvariant] | None
    rg_real: ReachabilityGraph
    rg_quasi: ReachabilityGraph
    classification: StateClassification
    table: list[tuple[Marking, str]]


@dataclass
class Synthesis:
    analysis: Analysis
    initial: list[Constraint]
    reduction: Reduction
    cover: Cover
    result: SynthesisResult
    verification: VerificationReport = field(repr=False)

    @property
    def selected(self) -> list[Constraint]:
        return [cs.constraint for cs in self.cover.selected]


def analyze(net: PetriNet, config: RunConfig = RunConfig()) -> Analysis:
    invariants = unit_invariants(net)
    try:
        possible = consistent_states(net, invariants)
        partition_error = None
    except PartitionError as exc:
        possible, partition_error = None, str(exc)
    rg_real = build_rg(net, REAL, config.max_states)
    rg_quasi = build_rg(net, QUASI, config.max_states)
    classification = classify(rg_quasi, possible)
    universe = possible if possible is not None else rg_quasi.states
    table = classify_table(universe, classification)
    partition = partition_invariants(net, invariants)
    return Analysis(net, invariants, possible, partition_error, partition, rg_real, rg_quasi, classification, table)


def synthesize_net(net: PetriNet, config: RunConfig = RunConfig()) -> Synthesis:
    a = analyze(net, config)
    cl = a.classification
    universe = a.possible if a.possible is not None else a.rg_quasi.states
    initial = initial_constraints(net, cl.border)
    reduction = reduce_constraints(net, cl.border, cl.unreachable, cl.admissible, a.invariants, universe)
    cost = (lambda c: arc_count(net, c)) if config.tie_break == "arcs" else None
    cov = minimal_cover(
        net, reduction.candidates, cl.border, cl.admissible, strategy="exact" if config.exact_cover else "auto", cost=cost
    )
    result = synthesize([cs.constraint for cs in cov.selected], net)
    verification = verify_mpc(result, cl, config.max_states)
    return Synthesis(a, initial, reduction, cov, result, verification)


# -- reports ------------------------------------------------------------------------


def _names(states) -> list[str]:
    return [m.name for m in sort_states(states)]


def analysis_report(a: Analysis) -> dict:
    cl = a.classification
    report = {
        "net": a.net.name,
        "places": list(a.net.place_ids),
        "transitions": list(a.net.transition_ids),
        "invariants": [list(inv.places) for inv in a.invariants],
        "partition": a.partition_error is None,
        "partition_invariants": [list(inv.places) for inv in a.partition] if a.partition else None,
        "possible_state_count": len(a.possible) if a.possible is not None else None,
        "real_states": len(a.rg_real),
        "quasi_states": len(a.rg_quasi),
        "forbidden": _names(cl.forbidden),
        "dangerous": _names(cl.dangerous),
        "admissible": _names(cl.admissible),
        "border": _names(cl.border),
        "table": {m.name: tag for m, tag in a.table},
    }
    if a.partition_error:
        report["partition_error"] = a.partition_error
    if not cl.forbidden:
        report["message"] = "specification controllable"
    return report


def synthesis_report(s: Synthesis) -> dict:
    r = s.result
    report = analysis_report(s.analysis)
    report.update(
        {
            "initial_constraints": [c.to_json() for c in s.initial],
            "after_property1": [cs.to_json() for cs in s.reduction.after_property1],
            "after_property2": [cs.to_json() for cs in s.reduction.after_property2],
            "candidates": [cs.to_json() for cs in s.reduction.candidates],
            "rejected_candidates": [cs.to_json() for cs in s.reduction.rejected],
            "trace": s.reduction.trace.to_json(),
            "cover": {
                "method": s.cover.method,
                "essential": [cs.constraint.to_json() for cs in s.cover.essential],
                "forced": [cs.to_json() for cs in s.cover.forced],
            },
            "L": r.system.L.tolist(),
            "b": r.system.b.tolist(),
            "verification": s.verification.to_json(),
            "synthesis": synthesis_json(r, s.verification.ok),
        }
    )
    report["synthesis"]["control_places"] = list(r.control_ids)
    report["synthesis"]["arcs"] = int(np.count_nonzero(r.W_c))
    return report


def synthesis_json(result: SynthesisResult, verified: bool) -> dict:
    return {
        "constraints": [c.to_json() for c in result.system.constraints],
        "W_c": result.W_c.tolist(),
        "M_c0": result.M_c0.tolist(),
        "transitions": list(result.plant.transition_ids),
        "verified": bool(verified),
    }


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _grid(rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def to_text(report: dict) -> str:
    out = [f"net: {report['net']}"]
    out.append("unit invariants: " + ", ".join("{" + ",".join(i) + "}" for i in report["invariants"]))
    if report["possible_state_count"] is not None:
        out.append(f"possible states: {report['possible_state_count']}")
    else:
        out.append(f"possible states: n/a ({report.get('partition_error')})")
    out.append(f"reachable states: real {report['real_states']}, quasi {report['quasi_states']}")
    if "message" in report:
        out.append(report["message"])
    out.append("forbidden (E): " + ", ".join(report["forbidden"]))
    out.append("border (F): " + ", ".join(report["border"]))
    out.append("")
    out.append("state table (1 admissible, 0 excluded, Φ don't care):")
    out += ["  " + line for line in _grid([("state", "S")] + list(report["table"].items()))]

    if "synthesis" not in report:
        return "\n".join(out) + "\n"

    def cname(c):
        return f"({''.join(c['places'])}, {c['bound']})"

    for title, key in (("after first simplification:", "after_property1"),
                       ("after last simplification:", "after_property2")):
        out += ["", title]
        rows = [("constraint", "covers")] + [(cname(c), " ".join(c["covered"])) for c in report[key]]
        out += ["  " + line for line in _grid(rows)]

    border = report["border"]
    chosen = {cname(c) for c in report["synthesis"]["constraints"]}
    out += ["", "cover matrix:"]
    rows = [["constraint"] + border + ["choice"]]
    for c in report["candidates"]:
        rows.append([cname(c)] + ["x" if s in c["border_covered"] else "." for s in border]
                    + ["x" if cname(c) in chosen else ""])
    for c in report["cover"]["forced"]:
        rows.append([cname(c)] + ["x" if s in c["border_covered"] else "." for s in border] + ["forced"])
    out += ["  " + line for line in _grid(rows)]

    syn = report["synthesis"]
    out += ["", "selected constraints:"]
    out += ["  " + " + ".join(f"m({p})" for p in c["places"]) + f" <= {c['bound']}"
            for c in syn["constraints"]]
    out += ["", "W_c:"]
    rows = [[""] + syn["transitions"]]
    for cid, row in zip(syn["control_places"], syn["W_c"]):
        rows.append([cid] + [str(v) for v in row])
    out += ["  " + line for line in _grid(rows)]
    out.append("M_c0: " + ", ".join(f"{cid}={v}" for cid, v in zip(syn["control_places"], syn["M_c0"])))
    out.append(f"verified: {syn['verified']}")
    return "\n".join(out) + "\n"
