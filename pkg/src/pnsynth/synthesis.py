"""Control places from linear constraints (place-invariant method) and
verification of the controlled net."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .classification import InfeasibleError, StateClassification
from .constraints import Constraint
from .model import SPEC, PetriNet, PetriNetError, PlaceDecl, sort_states
from .reachability import DEFAULT_MAX_STATES, build_rg, path_to


class InitialViolation(InfeasibleError):
    """M0 already violates a constraint (negative control-place marking)."""


class InadmissibleSupervisor(PetriNetError):
    """A control place would have to inhibit an uncontrollable transition."""


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    constraints: tuple[Constraint, ...]
    L: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    system: ConstraintSystem
    W_c: np.ndarray
    M_c0: np.ndarray
    control_ids: tuple[str, ...]
    controlled: PetriNet
    plant: PetriNet

    @property
    def W(self) -> np.ndarray:
        return np.vstack([self.plant.incidence, self.W_c])


def build_system(constraints: Iterable[Constraint], net: PetriNet) -> ConstraintSystem:
    """Stack constraints into ``L m <= b``; repeated constraints are dropped."""
    unique = list(dict.fromkeys(constraints))
    L = np.zeros((len(unique), len(net.places)), dtype=np.int64)
    for i, c in enumerate(unique):
        for p in c.places:
            if p not in net.place_index:
                raise PetriNetError(f"constraint {c} references unknown place {p!r}")
            L[i, net.place_index[p]] = 1
    b = np.array([c.bound for c in unique], dtype=np.int64)
    return ConstraintSystem(tuple(unique), L, b)


def arc_count(net: PetriNet, c: Constraint) -> int:
    """Number of arcs the control place of ``c`` would carry."""
    return int(np.count_nonzero(build_system([c], net).L @ net.incidence))


def _control_ids(net: PetriNet, n: int) -> tuple[str, ...]:
    taken = set(net.place_ids) | set(net.transition_ids)
    ids, k = [], 1
    while len(ids) < n:
        cand = f"C{k}"
        if cand not in taken:
            ids.append(cand)
        k += 1
    return tuple(ids)


def control_places(system: ConstraintSystem, net: PetriNet) -> SynthesisResult:
    """``W_c = -L W_p`` and ``M_c0 = b - L M_p0``; assemble the controlled net."""
    W_p = net.incidence
    m0 = np.asarray(net.initial_marking.bits, dtype=np.int64)
    W_c = -system.L @ W_p if len(system.b) else np.zeros((0, len(net.transitions)), dtype=np.int64)
    M_c0 = system.b - system.L @ m0 if len(system.b) else np.zeros(0, dtype=np.int64)
    for i, c in enumerate(system.constraints):
        if M_c0[i] < 0:
            raise InitialViolation(f"initial marking violates {c.inequality()}")
    for j, t in enumerate(net.transition_ids):
        if t in net.controllable:
            continue
        rows = np.flatnonzero(W_c[:, j] < 0)
        if rows.size:
            c = system.constraints[rows[0]]
            raise InadmissibleSupervisor(
                f"control place for {c.inequality()} would inhibit uncontrollable {t}"
            )

    ids = _control_ids(net, len(system.b))
    places = net.places + tuple(PlaceDecl(cid, SPEC, int(n)) for cid, n in zip(ids, M_c0))
    # net effect only: negative entries become input arcs, positive ones output arcs
    pre = np.vstack([net.pre, np.where(W_c < 0, -W_c, 0)])
    post = np.vstack([net.post, np.where(W_c > 0, W_c, 0)])
    controlled = PetriNet(
        f"{net.name} (controlled)", places, net.transitions, pre, post, strict=False
    )
    return SynthesisResult(system, W_c, M_c0, ids, controlled, net)


@dataclass
class VerificationReport:
    ok: bool
    reachable: frozenset = frozenset()
    missing_admissible: list = field(default_factory=list)
    reached_border: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    invariant_violations: list = field(default_factory=list)
    counterexample: dict | None = None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "reachable_plant_states": [m.name for m in sort_states(self.reachable)],
            "missing_admissible": [m.name for m in self.missing_admissible],
            "reached_border": [m.name for m in self.reached_border],
            "extra": [m.name for m in self.extra],
            "invariant_violations": self.invariant_violations,
            "counterexample": self.counterexample,
        }


def verify_mpc(
    result: SynthesisResult,
    classification: StateClassification,
    max_states: int = DEFAULT_MAX_STATES,
) -> VerificationReport:
    """Explore the controlled net and compare it with the admissible set."""
    plant = result.plant
    n = len(plant.places)
    rg = build_rg(result.controlled, max_states=max_states)
    L, b = result.system.L, result.system.b

    projected = {}
    violations = []
    for i, m in enumerate(rg.states):
        bits = np.asarray(m.bits, dtype=np.int64)
        pm = plant.marking(bits[:n])
        projected.setdefault(pm, i)
        if len(b) and not np.array_equal(L @ bits[:n] + bits[n:], b):
            violations.append({"state": m.name, "path": path_to(rg, i)})

    reachable = frozenset(projected)
    missing = sort_states(classification.admissible - reachable)
    border = sort_states(reachable & classification.border)
    extra = sort_states(reachable - classification.admissible - classification.border)
    ok = not (missing or border or extra or violations)

    counterexample = None
    if border or extra:
        m = (border or extra)[0]
        counterexample = {
            "state": m.name,
            "reason": "border state reached" if border else "non-admissible state reached",
            "path": path_to(rg, projected[m]),
        }
    elif missing:
        counterexample = {"state": missing[0].name, "reason": "admissible state unreachable", "path": None}
    elif violations:
        counterexample = {**violations[0], "reason": "control place invariant broken"}
    return VerificationReport(ok, reachable, missing, border, extra, violations, counterexample)


def synthesize(constraints: Sequence[Constraint], net: PetriNet) -> SynthesisResult:
    return control_places(build_system(constraints, net), net)
