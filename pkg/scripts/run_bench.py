"""Run one benchmark suite (or all of them) and write report.md / data.csv.

Usage:
    python3 scripts/run_bench.py --suite all --seed 0 --out out/bench
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pdk.bench import SUITES, bench_report, run_suite


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=1.0,
                    help="shrink trial counts for a quick look")
    ap.add_argument("--out", default=None, help="directory for the artifacts")
    args = ap.parse_args(argv)

    names = SUITES if args.suite == "all" else (args.suite,)
    results = []
    for name in names:
        t0 = time.time()
        results.append(run_suite(name, seed=args.seed, scale=args.scale))
        sys.stderr.write("%-12s %.1fs\n" % (name, time.time() - t0))
    md, csv = bench_report(results)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.md"), "w") as fh:
            fh.write(md)
        with open(os.path.join(args.out, "data.csv"), "w") as fh:
            fh.write(csv)
    sys.stdout.write(md)
    return 0


if __name__ == "__main__":
    sys.exit(main())
