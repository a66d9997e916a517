"""Time the exhaustive adversary with and without numba.

Each backend runs in a fresh interpreter because the choice is fixed at import.
Compilation is excluded by a warm-up call.

    python3 benchmarks/bench_adversary.py [--q 3] [--periods 2] [--events 5] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CHILD = """
import json, sys, time
from polyra import _accel
from polyra.adversary import exhaustive_adversary
from polyra.core import ProblemInstance
from polyra.polytope import near_optimal_nests, nested_polytope
q, T, B, reps = map(int, sys.argv[1:5])
inst = ProblemInstance(3, 1, 1.0, (0.25, 0.5, 1.0))
p = nested_polytope(inst, near_optimal_nests(inst))
exhaustive_adversary(inst, p, q=1, T=1, B=1)
times = []
for _ in range(reps):
    t0 = time.perf_counter()
    res = exhaustive_adversary(inst, p, q=q, T=T, B=B)
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": _accel.backend(), "best": min(times), "sequences": res.sequences,
                  "min_cr": res.min_cr}))
"""


def measure(disable: bool, args) -> dict:
    env = dict(os.environ, POLYRA_DISABLE_NUMBA="1" if disable else "0")
    argv = [sys.executable, "-c", CHILD, str(args.q), str(args.periods), str(args.events), str(args.repeat)]
    out = subprocess.run(argv, env=env, check=True, capture_output=True, text=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--periods", type=int, default=2)
    ap.add_argument("--events", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = measure(False, args), measure(True, args)
    assert fast["min_cr"] == slow["min_cr"] and fast["sequences"] == slow["sequences"]
    print(f"sequences searched: {fast['sequences']:,}  (min CR {fast['min_cr']:.6f})")
    for r in (fast, slow):
        print(f"{r['backend']:>7}: {r['best']:.3f} s")
    print(f"speedup: {slow['best'] / fast['best']:.1f}x")


if __name__ == "__main__":
    main()
