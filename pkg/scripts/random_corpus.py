"""Synthesize supervisors for a corpus of random safe conservative nets.

Prints one line per outcome class and summary statistics: how many nets
admit a supervisor, how many constraints and arcs the supervisors need, and
how often the reduction shrinks the border-state constraint set.
"""

import argparse
import random
import statistics
import time
from collections import Counter

import numpy as np

from pnsynth.classification import InfeasibleError
from pnsynth.pipeline import synthesize_net
from pnsynth.random_nets import random_net
from pnsynth.synthesis import InadmissibleSupervisor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=500, help="number of nets")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-places", type=int, default=12)
    ap.add_argument("--max-transitions", type=int, default=10)
    args = ap.parse_args()

    outcomes = Counter()
    border, selected, arcs, rg_sizes = [], [], [], []
    t0 = time.perf_counter()
    for i in range(args.n):
        rng = random.Random(args.seed * 1_000_003 + i)
        net = random_net(rng, args.max_places, args.max_transitions)
        try:
            run = synthesize_net(net)
        except InfeasibleError:
            outcomes["infeasible"] += 1
            continue
        except InadmissibleSupervisor:
            outcomes["inadmissible"] += 1
            continue
        outcomes["verified" if run.verification.ok else "unverified"] += 1
        cl = run.analysis.classification
        border.append(len(cl.border))
        selected.append(len(run.selected))
        arcs.append(int(np.count_nonzero(run.result.W_c)))
        rg_sizes.append(len(run.analysis.rg_quasi))
    dt = time.perf_counter() - t0

    for k in ("verified", "unverified", "infeasible", "inadmissible"):
        print(f"{k:>13}: {outcomes[k]}")
    if selected:
        shrunk = sum(s < b for s, b in zip(selected, border))
        print(f"quasi RG size: mean {statistics.mean(rg_sizes):.1f}, max {max(rg_sizes)}")
        print(f"border states: mean {statistics.mean(border):.2f}")
        print(f"constraints:   mean {statistics.mean(selected):.2f} ({shrunk} nets reduced below one per border state)")
        print(f"control arcs:  mean {statistics.mean(arcs):.2f}")
    print(f"{args.n} nets in {dt:.2f} s")


if __name__ == "__main__":
    main()
