#!/usr/bin/env python3
"""Print the loss breakdown of the shared-magnetics design, the
transformer-coupled baseline, the topology comparison, and the
line-frequency transformer bandwidth curve."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pfcsim.losses import (
    BertottiParams,
    UpfcBaseline,
    bertotti_density,
    calibrated_core_volume,
    reference_breakdown,
    topology_comparison,
    transformer_bandwidth,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p-in", type=float, default=15e3, help="injected power (W)")
    args = parser.parse_args()

    b = reference_breakdown()
    print("loss breakdown at the 15 kW reference point (W):")
    for key, value in b.as_dict().items():
        print(f"  {key:22s} {value:10.2f}")
    base = UpfcBaseline()
    print(f"\ntransformer-coupled baseline: {base.transformer_no_load_w:.1f} "
          f"+ {base.inverters_filters_w:.1f} = {base.total:.1f} W")

    print("\ntopology comparison (shared magnetics vs 3 separate dual bridges):")
    for item, mab, dab in topology_comparison().rows():
        print(f"  {item:24s} {mab:>22s} {dab:>22s}")

    vol = calibrated_core_volume(args.p_in)
    p = BertottiParams(core_volume=vol, p_in=args.p_in)
    f3 = transformer_bandwidth(p)
    print(f"\nline-frequency transformer model (calibrated volume {vol:.4f} m^3):")
    print(f"  3 dB bandwidth at {args.p_in / 1e3:.0f} kW: {f3:.1f} Hz")
    print("  loss density (W/m^3): " + ", ".join(
        f"{f:g} Hz: {bertotti_density(f, p):.0f}" for f in (50.0, 400.0, 1000.0, 5000.0)
    ))
    return 0


if __name__ == "__main__":
    sys.exit(main())
