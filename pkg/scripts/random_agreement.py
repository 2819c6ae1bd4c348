"""Randomized agreement sweep: full solver vs. brute-force oracle.

Generates seeded pseudo-disk systems, decides FVS (and optionally triangle
hitting) for budgets around the true optimum, and complains loudly on the
first disagreement.  Exit code 1 on any mismatch.

Usage:
    python3 scripts/random_agreement.py --count 100 --seed 0
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pdk.formats import dumps, system_to_json
from pdk.generators import generate_system
from pdk.graphs import build_intersection_graph
from pdk.oracle import brute_force_fvs, brute_force_th
from pdk.rng import child_seed
from pdk.solver import solve_fvs, solve_th

KINDS = ("squares", "disks", "mixed")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--min-n", type=int, default=6)
    ap.add_argument("--max-n", type=int, default=14)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--density", type=float, default=1.3)
    ap.add_argument("--th", action="store_true",
                    help="also check the triangle-hitting pipeline")
    ap.add_argument("--dump-on-fail", default=None,
                    help="write the offending system to this path")
    args = ap.parse_args(argv)

    t0 = time.time()
    mismatches = 0
    for i in range(args.count):
        kind = KINDS[i % len(KINDS)]
        n = args.min_n + (i * 7) % (args.max_n - args.min_n + 1)
        seed = child_seed(args.seed, "agreement", i) % (1 << 30)
        system = generate_system(kind, n, seed, density=args.density)
        g = build_intersection_graph(system)
        opt = brute_force_fvs(g).opt
        for k in sorted({max(0, opt - 1), opt}):
            res = solve_fvs(system, k)
            want = "yes" if opt <= k else "no"
            if res.answer != want:
                mismatches += 1
                sys.stderr.write("MISMATCH fvs kind=%s n=%d seed=%d k=%d "
                                 "opt=%d got=%s\n"
                                 % (kind, n, seed, k, opt, res.answer))
                if args.dump_on_fail:
                    with open(args.dump_on_fail, "w") as fh:
                        fh.write(dumps(system_to_json(system)))
        if args.th:
            opt_t = brute_force_th(g).opt
            for k in sorted({max(0, opt_t - 1), opt_t}):
                res = solve_th(system, k)
                want = "yes" if opt_t <= k else "no"
                if res.answer != want:
                    mismatches += 1
                    sys.stderr.write("MISMATCH th kind=%s n=%d seed=%d k=%d "
                                     "opt=%d got=%s\n"
                                     % (kind, n, seed, k, opt_t, res.answer))
        if (i + 1) % 25 == 0:
            sys.stderr.write("%d/%d checked, %d mismatches, %.1fs\n"
                             % (i + 1, args.count, mismatches,
                                time.time() - t0))
    print("checked %d systems in %.1fs: %s"
          % (args.count, time.time() - t0,
             "all agree" if mismatches == 0 else "%d MISMATCHES" % mismatches))
    return 0 if mismatches == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
