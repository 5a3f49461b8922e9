#!/usr/bin/env python3
"""Run the four built-in scenarios, write result bundles, and print a
steady-state summary table."""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pfcsim.engine import run_scenario
from pfcsim.output import write_bundle
from pfcsim.scenario import preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.environ.get("PFCSIM_OUT", "out"))
    parser.add_argument("--svg", action="store_true")
    args = parser.parse_args()

    header = f"{'case':8s} {'wall s':>7s} {'P1 kW':>9s} {'Q1 kVar':>9s} {'P2 kW':>9s} {'Q2 kVar':>9s} {'vdc span V':>12s}"
    print(header)
    print("-" * len(header))
    for name in ("case1", "case2", "case3", "case4"):
        t0 = time.perf_counter()
        result = run_scenario(preset(name))
        wall = time.perf_counter() - t0
        write_bundle(args.out, result, svg=args.svg)
        m = result.summary["tail_metrics"]
        dc = result.summary["dc_extremes"]
        span_lo = min(dc[f"vdc_{p}_v"]["min"] for p in "abc")
        span_hi = max(dc[f"vdc_{p}_v"]["max"] for p in "abc")
        status = "" if result.fault is None else f"  FAULT: {result.fault.cause}"
        print(
            f"{name:8s} {wall:7.2f} {m['p1_w'] / 1e3:9.2f} {m['q1_var'] / 1e3:9.3f} "
            f"{m['p2_w'] / 1e3:9.2f} {m['q2_var'] / 1e3:9.3f} "
            f"{span_lo:5.1f}..{span_hi:5.1f}{status}"
        )
    print(f"\nbundles written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
