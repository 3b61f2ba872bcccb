"""Reachability graphs under real and quasi firing semantics, and DOT export."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .model import REAL, Marking, PetriNet, PetriNetError, enabled, fire

DEFAULT_MAX_STATES = 1_000_000


class StateCapExceeded(PetriNetError):
    pass


@dataclass(frozen=True, eq=False)
class ReachabilityGraph:
    net: PetriNet
    states: tuple[Marking, ...]
    arcs: tuple[tuple[int, str, int], ...]
    semantics: str = REAL
    initial: int = 0

    @cached_property
    def index(self) -> dict[Marking, int]:
        return {m: i for i, m in enumerate(self.states)}

    @cached_property
    def _succ(self) -> dict[tuple[int, str], int]:
        return {(s, t): d for s, t, d in self.arcs}

    @cached_property
    def successors(self) -> list[list[tuple[str, int]]]:
        out: list[list[tuple[str, int]]] = [[] for _ in self.states]
        for s, t, d in self.arcs:
            out[s].append((t, d))
        return out

    @cached_property
    def predecessors(self) -> list[list[tuple[str, int]]]:
        out: list[list[tuple[str, int]]] = [[] for _ in self.states]
        for s, t, d in self.arcs:
            out[d].append((t, s))
        return out

    @property
    def state_set(self) -> frozenset[Marking]:
        return frozenset(self.states)

    def __contains__(self, m: Marking) -> bool:
        return m in self.index

    def __len__(self) -> int:
        return len(self.states)


def build_rg(
    net: PetriNet, semantics: str = REAL, max_states: int = DEFAULT_MAX_STATES
) -> ReachabilityGraph:
    """Breadth-first exploration from M0, transitions tried in declaration order."""
    m0 = net.initial_marking
    states = [m0]
    index = {m0: 0}
    arcs = []
    queue = deque([0])
    while queue:
        s = queue.popleft()
        m = states[s]
        for t in net.transition_ids:
            if not enabled(net, m, t, semantics):
                continue
            m2 = fire(net, m, t, semantics)
            d = index.get(m2)
            if d is None:
                if len(states) >= max_states:
                    raise StateCapExceeded(
                        f"more than {max_states} states in the {semantics} reachability graph"
                    )
                d = index[m2] = len(states)
                states.append(m2)
                queue.append(d)
            arcs.append((s, t, d))
    return ReachabilityGraph(net, tuple(states), tuple(arcs), semantics)


def delta(rg: ReachabilityGraph, state: int, t: str) -> int | None:
    return rg._succ.get((state, t))


def path_to(rg: ReachabilityGraph, target: int) -> list[str]:
    """Shortest firing sequence from the initial state to ``target``."""
    parent: dict[int, tuple[int, str] | None] = {rg.initial: None}
    queue = deque([rg.initial])
    while queue:
        s = queue.popleft()
        if s == target:
            break
        for t, d in rg.successors[s]:
            if d not in parent:
                parent[d] = (s, t)
                queue.append(d)
    if target not in parent:
        raise PetriNetError(f"state {target} not reachable")
    seq = []
    node = parent[target]
    while node is not None:
        s, t = node
        seq.append(t)
        node = parent[s]
    return seq[::-1]


CLASS_COLORS = {
    "admissible": "palegreen",
    "border": "orange",
    "forbidden": "tomato",
    "dangerous": "lightpink",
    "unreachable": "lightgrey",
}


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(rg: ReachabilityGraph, highlight: Mapping[Marking, str] | None = None) -> str:
    """Render ``rg`` as a Graphviz digraph.

    ``highlight`` maps states to a class name (see ``CLASS_COLORS``).
    Uncontrollable arcs are dashed.
    """
    highlight = highlight or {}
    lines = [
        f"digraph {_q(f'{rg.net.name} ({rg.semantics})')} {{",
        "  node [shape=box, fontname=Helvetica];",
    ]
    for i, m in enumerate(rg.states):
        attrs = [f"label={_q(m.name)}"]
        cls = highlight.get(m)
        if cls is not None:
            attrs.append(f"style=filled, fillcolor={CLASS_COLORS.get(cls, 'white')}")
            attrs.append(f"tooltip={_q(cls)}")
        if i == rg.initial:
            attrs.append("penwidth=2")
        lines.append(f"  s{i} [{', '.join(attrs)}];")
    for s, t, d in rg.arcs:
        style = "" if t in rg.net.controllable else ", style=dashed"
        lines.append(f"  s{s} -> s{d} [label={_q(t)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
