"""Forbidden, dangerous, admissible and border state sets on the quasi graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Marking, PetriNetError, enabled_quasi, enabled_real, sort_states
from .reachability import ReachabilityGraph

ADMISSIBLE = "1"
EXCLUDED = "0"
DONT_CARE = "Φ"


class InfeasibleError(PetriNetError):
    """No supervisor exists (initial state dangerous, uncoverable border state...)."""


class ConsistencyError(PetriNetError):
    pass


@dataclass(frozen=True)
class StateClassification:
    forbidden: frozenset[Marking]
    dangerous: frozenset[Marking]
    admissible: frozenset[Marking]
    border: frozenset[Marking]
    unreachable: frozenset[Marking]

    def class_of(self, m: Marking) -> str:
        if m in self.admissible:
            return "admissible"
        if m in self.border:
            return "border"
        if m in self.forbidden:
            return "forbidden"
        if m in self.dangerous:
            return "dangerous"
        return "unreachable"

    def highlight(self, states: Iterable[Marking]) -> dict[Marking, str]:
        return {m: self.class_of(m) for m in states}


def detect_forbidden(rg_quasi: ReachabilityGraph) -> frozenset[Marking]:
    """States where some uncontrollable transition is quasi- but not really enabled."""
    net = rg_quasi.net
    uncontrollable = [t for t in net.transition_ids if t not in net.controllable]
    return frozenset(
        m
        for m in rg_quasi.states
        if any(enabled_quasi(net, m, t) and not enabled_real(net, m, t) for t in uncontrollable)
    )


def dangerous_closure(
    rg_quasi: ReachabilityGraph, forbidden: Iterable[Marking]
) -> frozenset[Marking]:
    """Backward closure of ``forbidden`` over uncontrollable arcs."""
    ctrl = rg_quasi.net.controllable
    index = rg_quasi.index
    seen = {index[m] for m in forbidden}
    queue = deque(sorted(seen))
    while queue:
        d = queue.popleft()
        for t, s in rg_quasi.predecessors[d]:
            if t not in ctrl and s not in seen:
                seen.add(s)
                queue.append(s)
    return frozenset(rg_quasi.states[i] for i in seen)


def admissible_set(
    rg_quasi: ReachabilityGraph, dangerous: Iterable[Marking]
) -> frozenset[Marking]:
    """States reachable from M0 without ever entering a dangerous state."""
    dangerous = frozenset(dangerous)
    m0 = rg_quasi.states[rg_quasi.initial]
    if m0 in dangerous:
        raise InfeasibleError(f"initial state {m0.name} is dangerous; no supervisor exists")
    seen = {rg_quasi.initial}
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for _, d in rg_quasi.successors[s]:
            if d not in seen and rg_quasi.states[d] not in dangerous:
                seen.add(d)
                queue.append(d)
    return frozenset(rg_quasi.states[i] for i in seen)


def border_set(
    rg_quasi: ReachabilityGraph,
    admissible: Iterable[Marking],
    dangerous: Iterable[Marking],
) -> frozenset[Marking]:
    """Dangerous states entered from an admissible state by a controllable firing."""
    admissible, dangerous = frozenset(admissible), frozenset(dangerous)
    ctrl = rg_quasi.net.controllable
    border = set()
    for m in admissible:
        s = rg_quasi.index[m]
        for t, d in rg_quasi.successors[s]:
            target = rg_quasi.states[d]
            if target not in dangerous:
                continue
            if t not in ctrl:
                raise ConsistencyError(
                    f"uncontrollable {t} leads from admissible {m.name} to dangerous {target.name}"
                )
            border.add(target)
    return frozenset(border)


def classify(
    rg_quasi: ReachabilityGraph, possible: Sequence[Marking] | None = None
) -> StateClassification:
    """Full classification.  ``possible`` (when the invariants partition the
    places) widens the don't-care set to every invariant-consistent marking;
    otherwise only quasi-reachable states are considered."""
    forbidden = detect_forbidden(rg_quasi)
    dangerous = dangerous_closure(rg_quasi, forbidden)
    admissible = admissible_set(rg_quasi, dangerous)
    border = border_set(rg_quasi, admissible, dangerous)
    universe = possible if possible is not None else rg_quasi.states
    unreachable = frozenset(m for m in universe if m not in admissible and m not in border)
    return StateClassification(forbidden, dangerous, admissible, border, unreachable)


def classify_table(
    states: Sequence[Marking], classification: StateClassification
) -> list[tuple[Marking, str]]:
    """Tag each state 1 (admissible), 0 (border, to exclude) or Φ (don't care)."""
    table = []
    for m in sort_states(states):
        if m in classification.admissible:
            table.append((m, ADMISSIBLE))
        elif m in classification.border:
            table.append((m, EXCLUDED))
        else:
            table.append((m, DONT_CARE))
    return table
