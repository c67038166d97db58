"""Scaling benchmark: a chain of two-dimensional statements.

Statement k writes array k and reads array k-1 at the same point, so the
dependence graph is a single path and every statement stays fusable with its
neighbours.  Times the integer scheduler, the relaxed scheduler and the
conflict-graph pipeline at several chain lengths.
"""

import argparse
import json
import sys
import time

from polysched import frontend
from polysched.pluto import SchedulerConfig, schedule
from polysched.postpass import dfp_schedule


def chain(n: int) -> dict:
    stmts = []
    for k in range(n):
        reads = []
        if k:
            reads.append({"array": f"A{k - 1}", "kind": "read",
                          "map": [[1, 0, 0, 0], [0, 1, 0, 0]]})
        stmts.append({
            "id": f"S{k}",
            "iterators": ["i", "j"],
            "domain": [[1, 0, 0, 0, ">="], [-1, 0, 1, -1, ">="],
                       [0, 1, 0, 0, ">="], [0, -1, 1, -1, ">="]],
            "accesses": [{"array": f"A{k}", "kind": "write",
                          "map": [[1, 0, 0, 0], [0, 1, 0, 0]]}] + reads,
            "order": k,
        })
    return {"params": ["N"], "statements": stmts}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="8,16,30",
                        help="comma-separated chain lengths")
    parser.add_argument("--emit", metavar="FILE",
                        help="also write the largest chain as JSON")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]

    print(f"{'n':>4} {'deps':>5} {'ilp':>9} {'lp':>9} {'dfp':>9}   bands")
    for n in sizes:
        program, deps = frontend.analyze(chain(n))
        times = {}
        t0 = time.perf_counter()
        ilp = schedule(program, deps, SchedulerConfig(mode="ilp"))
        times["ilp"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        schedule(program, deps, SchedulerConfig(mode="lp"))
        times["lp"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        dfp = dfp_schedule(program, deps)
        times["dfp"] = time.perf_counter() - t0
        shape = ", ".join(
            f"{b.start}-{b.end}{'p' if b.parallel else ''}"
            for b in dfp.transform.bands)
        print(f"{n:>4} {len(deps):>5} "
              f"{times['ilp'] * 1000:>7.0f}ms {times['lp'] * 1000:>7.0f}ms "
              f"{times['dfp'] * 1000:>7.0f}ms   {shape} "
              f"(integer: {len(ilp.transform.bands)} bands)")

    if args.emit:
        with open(args.emit, "w") as fh:
            json.dump(chain(max(sizes)), fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.emit}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
