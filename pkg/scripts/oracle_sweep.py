"""Run the verification suites and summarize the error distribution per suite.

    python scripts/oracle_sweep.py                      # every suite
    python scripts/oracle_sweep.py oracles reductions --csv sweep.csv
"""

import argparse
import csv
import time
from collections import defaultdict

import numpy as np

from propfrac.verify import SUITES, run_suite


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("suites", nargs="*", default=list(SUITES), choices=list(SUITES))
    p.add_argument("--csv", help="write every case to this file")
    args = p.parse_args()

    rows = []
    for name in args.suites:
        start = time.perf_counter()
        results = list(run_suite(name))
        elapsed = time.perf_counter() - start
        # group by the leading words of the label (operator and identity)
        groups = defaultdict(list)
        for r in results:
            groups[r.params.split(" alpha=")[0].split(" beta=")[0].split(" p=")[0]].append(r)
        print(f"{name}: {len(results)} cases in {elapsed:.1f} s")
        for key, rs in sorted(groups.items()):
            ratio = np.array([r.error / r.tol for r in rs])
            fails = sum(not r.passed for r in rs)
            print(f"  {key:<40s} n={len(rs):5d}  median err/tol {np.median(ratio):.2e}  "
                  f"max {ratio.max():.2e}  fail {fails}")
        rows += [(name, r.params, r.computed, r.expected, r.error, r.tol, r.passed) for r in results]

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["suite", "case", "computed", "expected", "error", "tol", "passed"])
            w.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.csv}")


if __name__ == "__main__":
    main()
