"""Petri net data model: declarations, firing rules and unit place invariants.

Nets are ordinary place/transition nets stored as ``pre``/``post`` integer
matrices (places x transitions).  Input nets are required to be safe
(binary initial marking, unit arc weights); controlled nets produced by the
synthesis step may carry weighted control arcs and non-binary control
markings, so they are built with ``strict=False``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

PROCESS = "process"
SPEC = "spec"
PLACE_KINDS = (PROCESS, SPEC)

REAL = "real"
QUASI = "quasi"


class PetriNetError(ValueError):
    """Base class for every error raised by the library."""


class DeclarationError(PetriNetError):
    """Malformed net declaration (duplicate id, dangling arc, bad marking)."""


class NotEnabledError(PetriNetError):
    pass


class SafetyViolation(PetriNetError):
    """Firing produced a negative count, or a count above 1 in a safe net."""


class PartitionError(PetriNetError):
    """Unit invariants do not partition the place set."""


@dataclass(frozen=True)
class PlaceDecl:
    id: str
    kind: str = PROCESS
    initial: int = 0


@dataclass(frozen=True)
class TransitionDecl:
    id: str
    controllable: bool = False


@dataclass(frozen=True)
class Marking:
    """Token vector over the net's places.

    Equality and hashing only look at ``bits``; ``place_ids`` is carried so a
    marking can print its own name (marked places in declaration order).
    """

    bits: tuple[int, ...]
    place_ids: tuple[str, ...] = field(default=(), compare=False, repr=False)

    @property
    def name(self) -> str:
        parts = []
        for pid, n in zip(self.place_ids, self.bits):
            if n == 1:
                parts.append(pid)
            elif n > 1:
                parts.append(f"{pid}^{n}")
        return "".join(parts) or "(empty)"

    @property
    def marked(self) -> tuple[int, ...]:
        return tuple(i for i, n in enumerate(self.bits) if n)

    @property
    def key(self) -> tuple:
        """Canonical sort key: marked place positions, lexicographically."""
        return (self.marked, self.bits)

    def __str__(self) -> str:
        return self.name


def sort_states(states: Iterable[Marking]) -> list[Marking]:
    return sorted(states, key=lambda m: m.key)


@dataclass(frozen=True)
class IncidenceMatrices:
    pre: np.ndarray
    post: np.ndarray

    @property
    def c(self) -> np.ndarray:
        return self.post - self.pre


@dataclass(frozen=True, eq=False)
class PetriNet:
    name: str
    places: tuple[PlaceDecl, ...]
    transitions: tuple[TransitionDecl, ...]
    pre: np.ndarray
    post: np.ndarray
    strict: bool = True

    @cached_property
    def place_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.places)

    @cached_property
    def transition_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.transitions)

    @cached_property
    def place_index(self) -> dict[str, int]:
        return {pid: i for i, pid in enumerate(self.place_ids)}

    @cached_property
    def transition_index(self) -> dict[str, int]:
        return {tid: j for j, tid in enumerate(self.transition_ids)}

    @cached_property
    def controllable(self) -> frozenset[str]:
        return frozenset(t.id for t in self.transitions if t.controllable)

    @cached_property
    def process_mask(self) -> np.ndarray:
        return np.array([p.kind == PROCESS for p in self.places], dtype=bool)

    @property
    def matrices(self) -> IncidenceMatrices:
        return IncidenceMatrices(self.pre, self.post)

    @cached_property
    def incidence(self) -> np.ndarray:
        return self.post - self.pre

    @cached_property
    def initial_marking(self) -> Marking:
        return self.marking(p.initial for p in self.places)

    def marking(self, bits: Iterable[int]) -> Marking:
        return Marking(tuple(int(b) for b in bits), self.place_ids)

    def marking_of(self, marked: Iterable[str]) -> Marking:
        """Binary marking with exactly the given places marked."""
        bits = [0] * len(self.places)
        for pid in marked:
            if pid not in self.place_index:
                raise KeyError(f"unknown place {pid!r}")
            bits[self.place_index[pid]] = 1
        return self.marking(bits)

    def parse_state(self, name: str) -> Marking:
        """Inverse of ``Marking.name`` for binary markings ("P1P4P7")."""
        ids = sorted(self.place_ids, key=len, reverse=True)
        marked, rest = [], name
        while rest:
            for pid in ids:
                if rest.startswith(pid):
                    marked.append(pid)
                    rest = rest[len(pid):]
                    break
            else:
                raise KeyError(f"cannot parse state name {name!r}")
        return self.marking_of(marked)

    def inputs(self, t: str) -> tuple[str, ...]:
        j = self._tindex(t)
        return tuple(self.place_ids[i] for i in np.flatnonzero(self.pre[:, j]))

    def outputs(self, t: str) -> tuple[str, ...]:
        j = self._tindex(t)
        return tuple(self.place_ids[i] for i in np.flatnonzero(self.post[:, j]))

    def is_controllable(self, t: str) -> bool:
        self._tindex(t)
        return t in self.controllable

    def _tindex(self, t: str) -> int:
        try:
            return self.transition_index[t]
        except KeyError:
            raise PetriNetError(f"unknown transition {t!r}") from None

    def to_declaration(self) -> dict:
        """Net in the JSON declaration format; weights > 1 repeat the id."""
        def arcs(col):
            out = []
            for i in np.flatnonzero(col):
                out.extend([self.place_ids[i]] * int(col[i]))
            return out

        return {
            "name": self.name,
            "places": [
                {"id": p.id, "kind": p.kind, "initial": int(p.initial)}
                for p in self.places
            ],
            "transitions": [
                {
                    "id": t.id,
                    "controllable": t.controllable,
                    "inputs": arcs(self.pre[:, j]),
                    "outputs": arcs(self.post[:, j]),
                }
                for j, t in enumerate(self.transitions)
            ],
        }


def build_net(declaration: Mapping, *, strict: bool = True) -> PetriNet:
    """Validate a parsed declaration and build the net.

    With ``strict`` the net must be safe-shaped: binary initial marking and
    no repeated arc endpoints.  Non-strict nets accept integer markings and
    treat repeated ids in ``inputs``/``outputs`` as arc weights.
    """
    if not isinstance(declaration, Mapping):
        raise DeclarationError("net declaration must be a JSON object")
    name = str(declaration.get("name", "net"))
    raw_places = declaration.get("places", [])
    raw_transitions = declaration.get("transitions", [])
    if not isinstance(raw_places, list) or not isinstance(raw_transitions, list):
        raise DeclarationError("'places' and 'transitions' must be lists")

    places = []
    seen: set[str] = set()
    for raw in raw_places:
        try:
            pid = str(raw["id"])
        except (KeyError, TypeError):
            raise DeclarationError(f"place without id: {raw!r}") from None
        if pid in seen:
            raise DeclarationError(f"duplicate place id {pid!r}")
        seen.add(pid)
        kind = raw.get("kind", PROCESS)
        if kind == "specification":
            kind = SPEC
        if kind not in PLACE_KINDS:
            raise DeclarationError(f"place {pid!r}: unknown kind {kind!r}")
        initial = raw.get("initial", 0)
        if isinstance(initial, bool) or not isinstance(initial, int) or initial < 0:
            raise DeclarationError(f"place {pid!r}: initial must be a non-negative integer")
        if strict and initial > 1:
            raise DeclarationError(f"place {pid!r}: non-binary initial marking {initial}")
        places.append(PlaceDecl(pid, kind, initial))

    pindex = {p.id: i for i, p in enumerate(places)}
    tseen: set[str] = set()
    transitions = []
    pre = np.zeros((len(places), len(raw_transitions)), dtype=np.int64)
    post = np.zeros_like(pre)
    for j, raw in enumerate(raw_transitions):
        try:
            tid = str(raw["id"])
        except (KeyError, TypeError):
            raise DeclarationError(f"transition without id: {raw!r}") from None
        if tid in tseen or tid in pindex:
            raise DeclarationError(f"duplicate id {tid!r}")
        tseen.add(tid)
        for key, mat in (("inputs", pre), ("outputs", post)):
            ends = raw.get(key, [])
            if not isinstance(ends, list):
                raise DeclarationError(f"transition {tid!r}: {key!r} must be a list")
            for pid in ends:
                if pid not in pindex:
                    raise DeclarationError(
                        f"transition {tid!r} references undeclared place {pid!r}"
                    )
                if strict and mat[pindex[pid], j]:
                    raise DeclarationError(
                        f"transition {tid!r}: repeated {key[:-1]} place {pid!r}"
                    )
                mat[pindex[pid], j] += 1
        transitions.append(TransitionDecl(tid, bool(raw.get("controllable", False))))

    return PetriNet(name, tuple(places), tuple(transitions), pre, post, strict)


def load_net(path, *, strict: bool = True) -> PetriNet:
    with open(path, encoding="utf-8") as fh:
        return build_net(json.load(fh), strict=strict)


def dump_net(net: PetriNet) -> str:
    return json.dumps(net.to_declaration(), indent=2) + "\n"


# -- firing -----------------------------------------------------------------


def enabled_real(net: PetriNet, m: Marking, t: str) -> bool:
    j = net._tindex(t)
    return bool(np.all(np.asarray(m.bits) >= net.pre[:, j]))


def enabled_quasi(net: PetriNet, m: Marking, t: str) -> bool:
    """Uncontrollable transitions only need their process-side inputs."""
    j = net._tindex(t)
    if t in net.controllable:
        return enabled_real(net, m, t)
    need = np.where(net.process_mask, net.pre[:, j], 0)
    return bool(np.all(np.asarray(m.bits) >= need))


def enabled(net: PetriNet, m: Marking, t: str, semantics: str = REAL) -> bool:
    if semantics == REAL:
        return enabled_real(net, m, t)
    if semantics == QUASI:
        return enabled_quasi(net, m, t)
    raise ValueError(f"unknown semantics {semantics!r}")


def fire(net: PetriNet, m: Marking, t: str, semantics: str = REAL) -> Marking:
    """Fire ``t`` at ``m``.

    Under quasi semantics an uncontrollable transition that is quasi- but not
    really enabled moves only the process tokens; specification places keep
    their marking.
    """
    j = net._tindex(t)
    bits = np.asarray(m.bits, dtype=np.int64)
    if enabled_real(net, m, t):
        new = bits - net.pre[:, j] + net.post[:, j]
    elif semantics == QUASI and enabled_quasi(net, m, t):
        delta = net.post[:, j] - net.pre[:, j]
        new = bits + np.where(net.process_mask, delta, 0)
    else:
        raise NotEnabledError(f"{t} is not enabled at {m.name} ({semantics})")
    if np.any(new < 0) or (net.strict and np.any(new > 1)):
        raise SafetyViolation(
            f"firing {t} at {m.name} gives non-safe marking {new.tolist()}"
        )
    return net.marking(new)


# -- place invariants ---------------------------------------------------------


@dataclass(frozen=True)
class UnitInvariant:
    """Set of places holding exactly one token in every reachable marking."""

    places: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.places)

    def __contains__(self, pid: str) -> bool:
        return pid in self.places


def _normalize(row: list[int]) -> list[int]:
    g = 0
    for v in row:
        g = math.gcd(g, abs(v))
    return [v // g for v in row] if g > 1 else row


def p_semiflows(c: np.ndarray) -> list[list[int]]:
    """Minimal-support non-negative P-semiflows (Farkas / Fourier-Motzkin)."""
    n_places, n_trans = c.shape
    rows = [
        list(map(int, c[i])) + [1 if k == i else 0 for k in range(n_places)]
        for i in range(n_places)
    ]
    for j in range(n_trans):
        keep = [r for r in rows if r[j] == 0]
        pos = [r for r in rows if r[j] > 0]
        neg = [r for r in rows if r[j] < 0]
        for a in pos:
            for b in neg:
                combo = [-b[j] * x + a[j] * y for x, y in zip(a, b)]
                keep.append(_normalize(combo))
        # prune rows whose support is not minimal
        supports = [frozenset(k for k, v in enumerate(r[n_trans:]) if v) for r in keep]
        pruned, seen = [], set()
        for r, s in zip(keep, supports):
            if s in seen or any(o < s for o in supports):
                continue
            seen.add(s)
            pruned.append(r)
        rows = pruned
    return [r[n_trans:] for r in rows]


def unit_invariants(net: PetriNet) -> list[UnitInvariant]:
    """Binary minimal-support invariants whose token sum at M0 equals one."""
    m0 = net.initial_marking.bits
    found = []
    for x in p_semiflows(net.incidence):
        if any(v not in (0, 1) for v in x):
            continue
        if sum(v * n for v, n in zip(x, m0)) != 1:
            continue
        found.append(tuple(i for i, v in enumerate(x) if v))
    found.sort()
    return [UnitInvariant(tuple(net.place_ids[i] for i in idx)) for idx in found]


def check_partition(net: PetriNet, invariants: Sequence[UnitInvariant]) -> None:
    seen: dict[str, UnitInvariant] = {}
    for inv in invariants:
        for pid in inv.places:
            if pid in seen:
                raise PartitionError(
                    f"place {pid} lies in two unit invariants "
                    f"{set(seen[pid].places)} and {set(inv.places)}"
                )
            seen[pid] = inv
    missing = [pid for pid in net.place_ids if pid not in seen]
    if missing:
        raise PartitionError(f"places not covered by any unit invariant: {missing}")


def possible_state_count(invariants: Sequence[UnitInvariant], net: PetriNet | None = None) -> int:
    _check_disjoint(invariants, net)
    return math.prod(inv.size for inv in invariants)


def enumerate_possible_states(
    invariants: Sequence[UnitInvariant], net: PetriNet
) -> list[Marking]:
    """One marked place per invariant, every combination."""
    check_partition(net, invariants)
    return [net.marking_of(choice) for choice in itertools.product(*(i.places for i in invariants))]


def _check_disjoint(invariants, net):
    if net is not None:
        check_partition(net, invariants)
        return
    seen: set[str] = set()
    for inv in invariants:
        if seen & set(inv.places):
            raise PartitionError("unit invariants overlap")
        seen |= set(inv.places)


def partition_invariants(
    net: PetriNet, invariants: Sequence[UnitInvariant]
) -> list[UnitInvariant] | None:
    """First subset of ``invariants`` (canonical order) that partitions the places."""
    holders = {pid: [inv for inv in invariants if pid in inv.places] for pid in net.place_ids}

    def search(covered: frozenset, chosen: list):
        free = next((pid for pid in net.place_ids if pid not in covered), None)
        if free is None:
            return list(chosen)
        for inv in holders[free]:
            if covered.isdisjoint(inv.places):
                found = search(covered | set(inv.places), chosen + [inv])
                if found is not None:
                    return found
        return None

    return search(frozenset(), [])


def consistent_states(net: PetriNet, invariants: Sequence[UnitInvariant]) -> list[Marking]:
    """Markings holding one token in every unit invariant.

    Enumerated over a partitioning subset, then filtered by the remaining
    (overlapping) invariants.
    """
    part = partition_invariants(net, invariants)
    if part is None:
        raise PartitionError("no subset of the unit invariants partitions the places")
    idx = [[net.place_index[p] for p in inv.places] for inv in invariants]
    return [
        m
        for m in enumerate_possible_states(part, net)
        if all(sum(m.bits[i] for i in ix) == 1 for ix in idx)
    ]
