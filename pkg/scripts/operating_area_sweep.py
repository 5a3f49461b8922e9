#!/usr/bin/env python3
"""Sweep the series-module dc voltage and map the operating areas: the
admissible load angle for P-Q compensation and the feeder amplitude/phase
differences the module can bridge."""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pfcsim.series import pq_load_operating_region, two_feeder_operating_region


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--v1", type=float, default=230.0, help="feeder phase voltage (V rms)")
    parser.add_argument("--vdc-max", type=float, default=120.0)
    parser.add_argument("--steps", type=int, default=25)
    parser.add_argument("--plot", default=None, help="optional SVG output path")
    args = parser.parse_args()

    rows = []
    print(f"{'vdc V':>7s} {'load angle deg':>15s} {'dV limit V':>11s} {'phase limit deg':>16s}")
    for k in range(1, args.steps + 1):
        v_dc = args.vdc_max * k / args.steps
        pq = pq_load_operating_region(v_dc, args.v1)
        pair = two_feeder_operating_region(v_dc, args.v1, args.v1)
        rows.append((v_dc, math.degrees(pq.load_angle_limit), pair.amplitude_limit,
                     math.degrees(pair.phase_limit)))
        print(f"{rows[-1][0]:7.1f} {rows[-1][1]:15.3f} {rows[-1][2]:11.3f} {rows[-1][3]:16.3f}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        v_dc, angle, amp, phase = zip(*rows)
        fig, ax1 = plt.subplots(figsize=(7, 4))
        ax1.plot(v_dc, angle, "o-", label="load-angle limit (deg)")
        ax1.plot(v_dc, phase, "s--", label="feeder phase limit (deg)")
        ax1.set_xlabel("series module dc voltage (V)")
        ax1.set_ylabel("angle limit (deg)")
        ax2 = ax1.twinx()
        ax2.plot(v_dc, amp, "k.-", label="amplitude limit (V)")
        ax2.set_ylabel("amplitude limit (V)")
        ax1.legend(loc="upper left")
        ax1.grid(True, alpha=0.3)
        fig.savefig(args.plot, format="svg")
        print(f"plot written to {args.plot}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
