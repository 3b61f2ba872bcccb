"""Linear marking constraints from border states, and their reduction.

A constraint ``(places, k)`` stands for ``sum(m(p) for p in places) <= k``.
Each border state ``P_a P_b ... P_n`` gives the initial constraint
``(P_a..P_n, n - 1)``, which excludes exactly that state.  The reduction
merges constraints using unit invariants (one token among their places):

* merge on a full invariant: ``{(R + p, k) for p in I}`` becomes
  ``(R, k - 1)``;
* merge on mutually exclusive places: ``{(R + D_j, k)}`` with the ``D_j``
  disjoint subsets of one invariant becomes ``(R + union(D_j), k)``.

Don't-care states (never reached under supervision) may be used to complete
a merge group.  The result is a set of prime candidates, from which a
Quine-McCluskey style cover of the border states is selected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .classification import InfeasibleError
from .model import Marking, PetriNet, UnitInvariant, sort_states

PROPERTY1 = "property1"
PROPERTY2 = "property2"
EXACT_LIMIT = 20


@dataclass(frozen=True)
class Constraint:
    places: tuple[str, ...]
    bound: int

    def __post_init__(self):
        if not self.places:
            raise ValueError("constraint needs at least one place")
        if len(set(self.places)) != len(self.places):
            raise ValueError(f"repeated place in constraint {self.places}")
        if not 0 <= self.bound < len(self.places):
            raise ValueError(f"bound {self.bound} out of range for {self.places}")

    @property
    def name(self) -> str:
        return f"({''.join(self.places)}, {self.bound})"

    def inequality(self) -> str:
        return " + ".join(f"m({p})" for p in self.places) + f" <= {self.bound}"

    def value(self, net: PetriNet, m: Marking) -> int:
        idx = net.place_index
        return sum(m.bits[idx[p]] for p in self.places)

    def violated_by(self, net: PetriNet, m: Marking) -> bool:
        return self.value(net, m) > self.bound

    def to_json(self) -> dict:
        return {"places": list(self.places), "bound": self.bound}

    def __str__(self) -> str:
        return self.name


def make_constraint(net: PetriNet, places: Iterable[str], bound: int) -> Constraint:
    idx = net.place_index
    return Constraint(tuple(sorted(set(places), key=idx.__getitem__)), bound)


def constraint_from_json(net: PetriNet, raw: Mapping) -> Constraint:
    places = list(raw["places"])
    for p in places:
        if p not in net.place_index:
            raise KeyError(f"constraint references unknown place {p!r}")
    return make_constraint(net, places, int(raw["bound"]))


def sort_key(net: PetriNet, c: Constraint) -> tuple:
    idx = net.place_index
    return (tuple(idx[p] for p in c.places), c.bound)


def sort_constraints(net: PetriNet, cs: Iterable[Constraint]) -> list[Constraint]:
    return sorted(cs, key=lambda c: sort_key(net, c))


@dataclass(frozen=True)
class CoveredSet:
    """A constraint with the states it excludes.

    ``covered`` holds every excluded state of the considered universe
    (border and don't-care alike); ``border_covered`` only the border ones.
    """

    constraint: Constraint
    covered: frozenset[Marking]
    border_covered: frozenset[Marking] = frozenset()

    def to_json(self) -> dict:
        return {
            **self.constraint.to_json(),
            "covered": [m.name for m in sort_states(self.covered)],
            "border_covered": [m.name for m in sort_states(self.border_covered)],
        }


def cover(
    net: PetriNet, c: Constraint, universe: Iterable[Marking], border: Iterable[Marking] = ()
) -> CoveredSet:
    covered = frozenset(m for m in universe if c.violated_by(net, m))
    border = frozenset(border)
    extra = frozenset(m for m in border if c.violated_by(net, m))
    return CoveredSet(c, covered, (covered & border) | extra)


@dataclass(frozen=True)
class TraceStep:
    phase: int
    rule: str
    inputs: tuple[Constraint, ...]
    output: Constraint
    invariant: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "rule": self.rule,
            "inputs": [c.to_json() for c in self.inputs],
            "output": self.output.to_json(),
            "invariant": list(self.invariant),
        }


@dataclass
class ReductionTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def state_constraint(net: PetriNet, m: Marking) -> Constraint:
    marked = [net.place_ids[i] for i in m.marked]
    return make_constraint(net, marked, len(marked) - 1)


def initial_constraints(net: PetriNet, border: Iterable[Marking]) -> list[Constraint]:
    """One constraint per border state: its marked places, bound n - 1."""
    return [state_constraint(net, m) for m in sort_states(border)]


def admissibility_check(net: PetriNet, c: Constraint, admissible: Iterable[Marking]) -> bool:
    return all(not c.violated_by(net, m) for m in admissible)


# -- single merge rules -------------------------------------------------------


def _split(c: Constraint, inv: frozenset[str]) -> tuple[tuple[str, ...], frozenset[str]]:
    return tuple(p for p in c.places if p not in inv), frozenset(p for p in c.places if p in inv)


def _merge_full(net, rest, bound) -> Constraint | None:
    # the invariant contributes exactly one token, so it drops out and the bound decreases
    if not rest or bound < 1:
        return None
    return make_constraint(net, rest, bound - 1)


def apply_property1(
    net: PetriNet,
    constraints: Iterable[Constraint],
    invariant: UnitInvariant,
    dont_cares: Iterable[Marking] = (),
) -> list[Constraint]:
    """Collapse every group ``{(R + p, k) | p in invariant}`` into ``(R, k - 1)``.

    Don't-care states contribute their own constraint as group members but
    are not returned unless they end up merged.  Repeats until no group is
    complete.
    """
    inv = frozenset(invariant.places)
    care = set(constraints)
    pool = care | {state_constraint(net, m) for m in dont_cares}
    while True:
        groups: dict[tuple, dict[str, Constraint]] = {}
        for c in sort_constraints(net, pool):
            rest, inside = _split(c, inv)
            if len(inside) == 1:
                groups.setdefault((rest, c.bound), {})[next(iter(inside))] = c
        changed = False
        for (rest, bound), members in groups.items():
            if len(members) != len(inv):
                continue
            out = _merge_full(net, rest, bound)
            if out is None:
                continue
            used = set(members.values())
            if not used & care:
                continue
            pool -= used
            care -= used
            pool.add(out)
            care.add(out)
            changed = True
        if not changed:
            break
    return sort_constraints(net, care)


def apply_property2(
    net: PetriNet, constraints: Iterable[Constraint], exclusion: Iterable[str]
) -> list[Constraint]:
    """Merge constraints that share bound and remainder and differ only in
    places of ``exclusion`` (a set holding at most one token)."""
    excl = frozenset(exclusion)
    groups: dict[tuple, list[tuple[frozenset[str], Constraint]]] = {}
    untouched = []
    for c in sort_constraints(net, constraints):
        rest, inside = _split(c, excl)
        if inside:
            groups.setdefault((rest, c.bound), []).append((inside, c))
        else:
            untouched.append(c)
    out = list(untouched)
    for (rest, bound), members in groups.items():
        parts = [inside for inside, _ in members]
        disjoint = sum(len(p) for p in parts) == len(frozenset().union(*parts))
        if len(members) == 1 or not disjoint:
            out.extend(c for _, c in members)
            continue
        out.append(make_constraint(net, set(rest).union(*parts), bound))
    return sort_constraints(net, set(out))


# -- full reduction -------------------------------------------------------------


@dataclass
class Reduction:
    seeds: list[Constraint]
    after_property1: list[CoveredSet]
    after_property2: list[CoveredSet]
    candidates: list[CoveredSet]
    rejected: list[CoveredSet]
    trace: ReductionTrace


def _phase1(net, seeds, invariants, trace) -> list[Constraint]:
    pool = set(seeds)
    merged: set[Constraint] = set()
    done: set[tuple] = set()
    while True:
        new = []
        ordered = sort_constraints(net, pool)
        for inv in invariants:
            invset = frozenset(inv.places)
            groups: dict[tuple, dict[str, Constraint]] = {}
            for c in ordered:
                rest, inside = _split(c, invset)
                if len(inside) == 1:
                    groups.setdefault((rest, c.bound), {})[next(iter(inside))] = c
            for (rest, bound), members in groups.items():
                key = (inv.places, rest, bound)
                if key in done or len(members) != len(invset):
                    continue
                out = _merge_full(net, rest, bound)
                if out is None:
                    continue
                done.add(key)
                inputs = tuple(members[p] for p in inv.places)
                trace.steps.append(TraceStep(1, PROPERTY1, inputs, out, inv.places))
                merged.update(inputs)
                if out not in pool:
                    new.append(out)
        if not new:
            break
        pool.update(new)
    return sort_constraints(net, pool - merged)


def _phase2(net, primes1, invariants, trace) -> list[Constraint]:
    pool = set(primes1)
    merged: set[Constraint] = set()
    done: set[tuple] = set()
    while True:
        new = []
        ordered = sort_constraints(net, pool)
        for inv in invariants:
            invset = frozenset(inv.places)
            groups: dict[tuple, list[tuple[frozenset[str], Constraint]]] = {}
            for c in ordered:
                rest, inside = _split(c, invset)
                if inside:
                    groups.setdefault((rest, c.bound), []).append((inside, c))
            for (rest, bound), members in groups.items():
                for (ia, a), (ib, b) in itertools.combinations(members, 2):
                    if ia & ib or (a, b) in done:
                        continue
                    union = ia | ib
                    if union == invset:
                        out = _merge_full(net, rest, bound)
                        rule = PROPERTY1
                        if out is None:
                            continue
                    else:
                        out = make_constraint(net, set(rest) | union, bound)
                        rule = PROPERTY2
                    done.add((a, b))
                    trace.steps.append(TraceStep(2, rule, (a, b), out, inv.places))
                    merged.update((a, b))
                    if out not in pool:
                        new.append(out)
        if not new:
            break
        pool.update(new)
    return sort_constraints(net, pool - merged)


def reduce_constraints(
    net: PetriNet,
    border: Iterable[Marking],
    dont_care: Iterable[Marking],
    admissible: Iterable[Marking],
    invariants: Sequence[UnitInvariant],
    universe: Iterable[Marking],
) -> Reduction:
    """Run both merge phases and return every intermediate stage.

    ``universe`` is the state space over which covered sets are reported
    (all invariant-consistent markings when the invariants partition the
    places, else the quasi-reachable states).
    """
    border = frozenset(border)
    admissible = frozenset(admissible)
    universe = sort_states(set(universe) | border)
    seeds = [state_constraint(net, m) for m in sort_states(border | frozenset(dont_care))]
    trace = ReductionTrace()
    primes1 = _phase1(net, seeds, invariants, trace)
    primes2 = _phase2(net, primes1, invariants, trace)

    def covered(cs):
        return [cover(net, c, universe, border) for c in cs]

    after2 = covered(primes2)
    candidates, rejected = [], []
    for cs in after2:
        if not cs.border_covered:
            continue
        if admissibility_check(net, cs.constraint, admissible):
            candidates.append(cs)
        else:
            rejected.append(cs)
    return Reduction(seeds, covered(primes1), after2, candidates, rejected, trace)


def generate_candidates(
    net: PetriNet,
    border: Iterable[Marking],
    dont_care: Iterable[Marking],
    admissible: Iterable[Marking],
    invariants: Sequence[UnitInvariant],
    universe: Iterable[Marking],
) -> list[CoveredSet]:
    return reduce_constraints(net, border, dont_care, admissible, invariants, universe).candidates


def replay_trace(
    net: PetriNet, seeds: Iterable[Constraint], trace: ReductionTrace
) -> tuple[list[Constraint], list[Constraint]]:
    """Rebuild the prime sets of both phases from the recorded merges."""
    results = []
    pool = set(seeds)
    for phase in (1, 2):
        merged = set()
        for step in trace.steps:
            if step.phase != phase:
                continue
            missing = [c for c in step.inputs if c not in pool]
            if missing:
                raise ValueError(f"trace step uses unknown constraint {missing[0]}")
            merged.update(step.inputs)
            pool.add(step.output)
        primes = sort_constraints(net, pool - merged)
        results.append(primes)
        pool = set(primes)
    return results[0], results[1]


# -- cover selection --------------------------------------------------------------


@dataclass
class Cover:
    selected: list[CoveredSet]
    essential: list[CoveredSet]
    forced: list[CoveredSet]
    method: str


def minimal_cover(
    net: PetriNet,
    candidates: Sequence[CoveredSet],
    border: Iterable[Marking],
    admissible: Iterable[Marking] = (),
    *,
    strategy: str = "auto",
    cost: Callable[[Constraint], int] | None = None,
) -> Cover:
    """Select constraints covering every border state.

    Essential candidates (sole coverers of some border state) come first.
    With ``strategy="auto"`` the rest is covered exactly when at most
    ``EXACT_LIMIT`` useful candidates remain, else greedily by new coverage;
    ``"exact"`` and ``"greedy"`` force one method.  Ties go to lower
    ``cost``, then fewer places, then canonical order.
    """
    if strategy not in ("auto", "exact", "greedy"):
        raise ValueError(f"unknown cover strategy {strategy!r}")
    border = frozenset(border)
    admissible = frozenset(admissible)
    cost = cost or (lambda c: len(c.places))
    pool = sorted(
        {cs.constraint: cs for cs in candidates}.values(),
        key=lambda cs: sort_key(net, cs.constraint),
    )

    forced = []
    coverable = frozenset().union(*(cs.border_covered for cs in pool)) if pool else frozenset()
    for m in sort_states(border - coverable):
        c = state_constraint(net, m)
        if not admissibility_check(net, c, admissible):
            raise InfeasibleError(f"border state {m.name} cannot be excluded without an admissible state")
        forced.append(CoveredSet(c, frozenset({m}), frozenset({m})))

    essential = []
    for m in sort_states(coverable):
        owners = [cs for cs in pool if m in cs.border_covered]
        if len(owners) == 1 and owners[0] not in essential:
            essential.append(owners[0])

    chosen = forced + essential
    remaining = set(border)
    for cs in chosen:
        remaining -= cs.border_covered

    def rank(cs):
        return (cost(cs.constraint), len(cs.constraint.places), sort_key(net, cs.constraint))

    useful = [cs for cs in pool if cs not in chosen and cs.border_covered & remaining]
    method = "essential"
    if remaining:
        if strategy == "exact" or (strategy == "auto" and len(useful) <= EXACT_LIMIT):
            chosen += _exact(useful, remaining, rank)
            method = "exact"
        else:
            chosen += _greedy(useful, remaining, rank)
            method = "greedy"
    return Cover(chosen, essential, forced, method)


def _greedy(useful, remaining, rank):
    remaining = set(remaining)
    picked = []
    while remaining:
        best = min(useful, key=lambda cs: (-len(cs.border_covered & remaining), rank(cs)))
        if not best.border_covered & remaining:
            raise InfeasibleError("border states left uncovered")
        picked.append(best)
        useful = [cs for cs in useful if cs is not best]
        remaining -= best.border_covered
    return picked


def _exact(useful, remaining, rank):
    states = sort_states(remaining)
    bit = {m: 1 << i for i, m in enumerate(states)}
    full = (1 << len(states)) - 1
    masks = [sum(bit[m] for m in cs.border_covered if m in bit) for cs in useful]
    for size in range(1, len(useful) + 1):
        best = None
        for combo in itertools.combinations(range(len(useful)), size):
            acc = 0
            for i in combo:
                acc |= masks[i]
            if acc != full:
                continue
            key = (
                sum(rank(useful[i])[0] for i in combo),
                sum(rank(useful[i])[1] for i in combo),
                [rank(useful[i])[2] for i in combo],
            )
            if best is None or key < best[0]:
                best = (key, combo)
        if best is not None:
            return [useful[i] for i in best[1]]
    raise InfeasibleError("border states left uncovered")


def excluded(net: PetriNet, constraints: Iterable[Constraint], states: Iterable[Marking]) -> frozenset[Marking]:
    constraints = list(constraints)
    return frozenset(m for m in states if any(c.violated_by(net, m) for c in constraints))
