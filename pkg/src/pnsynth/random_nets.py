"""Random safe, conservative nets built from one-token cyclic state machines.

Process components are cycles (plus an occasional chord); each
specification cycle is synchronised with some process transitions, so
every component is a unit place invariant and the net stays safe under
both firing semantics.
"""

from __future__ import annotations

import random

from .model import PROCESS, SPEC, PetriNet, build_net


def random_declaration(
    rng: random.Random, max_places: int = 12, max_transitions: int = 10
) -> dict:
    places = []
    counter = iter(range(1, 10_000))

    def component(size, kind):
        ids = [f"P{next(counter)}" for _ in range(size)]
        places.extend({"id": pid, "kind": kind, "initial": int(i == 0)} for i, pid in enumerate(ids))
        return ids

    budget = max_places
    process = []
    for _ in range(rng.randint(1, 3)):
        size = rng.randint(2, 3)
        if budget - size < 2 or sum(len(c) for c in process) + size > max_transitions:
            break
        process.append(component(size, PROCESS))
        budget -= size

    moves = []  # (inputs, outputs, controllable)
    for comp in process:
        for i, src in enumerate(comp):
            # the step leaving the idle place is the natural controllable event
            ctrl = rng.random() < (0.8 if i == 0 else 0.25)
            moves.append(([src], [comp[(i + 1) % len(comp)]], ctrl))
    while len(moves) < max_transitions and rng.random() < 0.3:
        comp = rng.choice(process)
        src, dst = rng.sample(comp, 2)
        moves.append(([src], [dst], rng.random() < 0.5))

    free = list(range(len(moves)))
    rng.shuffle(free)
    for _ in range(rng.randint(1, 2)):
        size = rng.randint(2, 3)
        if budget < size or len(free) < size:
            break
        spec = component(size, SPEC)
        budget -= size
        for i in range(size):
            j = free.pop()
            moves[j][0].append(spec[i])
            moves[j][1].append(spec[(i + 1) % size])

    if all(ctrl for _, _, ctrl in moves):
        j = rng.randrange(len(moves))
        moves[j] = (moves[j][0], moves[j][1], False)
    transitions = [
        {"id": f"t{j + 1}", "controllable": ctrl, "inputs": ins, "outputs": outs}
        for j, (ins, outs, ctrl) in enumerate(moves)
    ]
    return {"name": f"random-{rng.getrandbits(32):08x}", "places": places, "transitions": transitions}


def random_net(rng: random.Random, max_places: int = 12, max_transitions: int = 10) -> PetriNet:
    return build_net(random_declaration(rng, max_places, max_transitions))
