"""Command-line front end.

Subcommands: run, opregion, mab-solve, loss, compare, sweep. Exit codes:
0 on healthy completion, 1 on configuration errors, 2 on simulation faults
or solver non-convergence. Messages go to stderr; results go to files or
stdout. ``PFCSIM_OUT`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from . import losses as losses_mod
from . import mab as mab_mod
from .engine import run_scenario
from .output import write_bundle
from .scenario import PRESETS, ScenarioError, SimConfig, load_scenario, preset
from .series import pq_load_operating_region, two_feeder_operating_region


def _default_outdir() -> str:
    return os.environ.get("PFCSIM_OUT", "out")


def _resolve_scenario(name_or_path: str):
    if name_or_path in PRESETS:
        return preset(name_or_path)
    if not os.path.exists(name_or_path):
        raise ScenarioError(f"no such file or preset: {name_or_path}")
    return load_scenario(name_or_path)


def _with_sim_overrides(scenario, args):
    sim = scenario.sim
    step = args.step if args.step is not None else sim.step_s
    duration = args.duration if args.duration is not None else sim.duration_s
    # keep the record cadence at the default 100 us regardless of the step
    record_interval = sim.step_s * sim.record_every_n
    record_every = max(1, round(record_interval / step))
    new_sim = SimConfig(
        duration_s=duration,
        step_s=step,
        control_period_s=sim.control_period_s,
        record_every_n=record_every,
    )
    return dataclasses.replace(scenario, sim=new_sim)


def cmd_run(args) -> int:
    try:
        scenario = _resolve_scenario(args.scenario)
        scenario = _with_sim_overrides(scenario, args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = run_scenario(scenario)
    paths = write_bundle(args.out, result, svg=args.svg)
    if result.fault is not None:
        print(
            f"simulation fault at t={result.fault.time_s:.6f}s: {result.fault.cause}",
            file=sys.stderr,
        )
        return 2
    print(paths["csv"])
    print(paths["summary"])
    return 0


def cmd_opregion(args) -> int:
    if args.vdc < 0 or args.v1 <= 0 or (args.v2 is not None and args.v2 <= 0):
        print("error: voltages must be positive (vdc >= 0)", file=sys.stderr)
        return 1
    region = pq_load_operating_region(args.vdc, args.v1)
    deg = math.degrees(region.load_angle_limit)
    print(f"load-angle limit: +/-{deg:.2f} deg (+/-{region.load_angle_limit:.6f} rad)")
    if args.v2 is not None:
        pair = two_feeder_operating_region(args.vdc, args.v1, args.v2)
        dv = abs(args.v1 - args.v2)
        print(f"amplitude limit: {pair.amplitude_limit:.2f} V (|dV| = {dv:.2f} V)")
        print(
            f"phase limit: +/-{math.degrees(pair.phase_limit):.2f} deg"
        )
        verdict = "feasible" if pair.feasible else "infeasible (system would bypass)"
        print(f"verdict: {verdict}")
    return 0


def cmd_mab_solve(args) -> int:
    try:
        targets = tuple(float(x) for x in args.targets.split(","))
    except ValueError:
        print("error: --targets expects comma-separated watts", file=sys.stderr)
        return 1
    if args.magnetics is not None:
        try:
            mag = _magnetics_from_file(args.magnetics)
        except (OSError, ScenarioError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        mag = mab_mod.symmetric_magnetics(15e-6, (16.0, 1.0, 1.0, 1.0), 100e3)
    voltages = (args.v_primary, *([args.v_secondary] * (mag.n_bridges - 1)))
    if len(targets) != mag.n_bridges - 1:
        print(
            f"error: expected {mag.n_bridges - 1} targets for this magnetics",
            file=sys.stderr,
        )
        return 1
    try:
        phi = mab_mod.solve_phase_shifts(targets, mag, voltages)
    except mab_mod.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.residual is not None:
            print(f"residual (W): {list(exc.residual)}", file=sys.stderr)
        return 2
    op = mab_mod.MabOperatingPoint(voltages, (0.0, *phi))
    powers = mab_mod.bridge_powers(op, mag)
    print("phase shifts (rad):", ",".join(repr(p) for p in phi))
    print("bridge powers (W):", ",".join(f"{p:.6f}" for p in powers))
    print(f"primary balancing power (W): {powers[0]:.6f}")
    resid = max(abs(p - t) for p, t in zip(powers[1:], targets))
    print(f"max residual (W): {resid:.3e}")
    return 0


def _magnetics_from_file(path: str):
    try:
        import tomllib
    except ModuleNotFoundError:  # pragma: no cover
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    known = {"star_leakage_h", "turns", "magnetizing_h", "f_sw"}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"magnetics: unknown keys: {', '.join(sorted(unknown))}")
    return mab_mod.MabMagnetics(
        tuple(data["star_leakage_h"]),
        tuple(data["turns"]),
        float(data.get("magnetizing_h", math.inf)),
        float(data["f_sw"]),
    )


def cmd_loss(args) -> int:
    if args.devices is not None:
        try:
            breakdown = _breakdown_from_file(args.devices)
        except (OSError, ScenarioError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    elif args.preset == "reference":
        breakdown = losses_mod.reference_breakdown()
    elif args.preset == "upfc-baseline":
        base = losses_mod.UpfcBaseline()
        payload = {
            "transformer_no_load_w": base.transformer_no_load_w,
            "inverters_filters_w": base.inverters_filters_w,
            "total_w": base.total,
        }
        _emit(payload, args)
        return 0
    else:
        print(f"error: unknown preset {args.preset!r}", file=sys.stderr)
        return 1
    _emit(breakdown.as_dict(), args)
    return 0


def _breakdown_from_file(path: str):
    try:
        import tomllib
    except ModuleNotFoundError:  # pragma: no cover
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)

    def params(block: dict) -> losses_mod.SwitchParams:
        return losses_mod.SwitchParams(**block)

    cfg = losses_mod.SystemDeviceConfig(
        series=params(data["series"]),
        mab_hv=params(data["mab_hv"]),
        mab_lv=params(data["mab_lv"]),
        afe=params(data["afe"]),
        transformer_w=float(data.get("transformer_w", 0.0)),
        filter_w=float(data.get("filter_w", 0.0)),
    )
    return losses_mod.system_loss_report(cfg)


def _emit(payload: dict, args) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key},{value}")


def cmd_compare(args) -> int:
    comparison = losses_mod.topology_comparison()
    if args.json:
        payload = {
            "rows": [
                {"item": item, "mab": mab, "three_dab": dab}
                for item, mab, dab in comparison.rows()
            ],
            "weight_ratio": comparison.weight_ratio,
            "volume_ratio": comparison.volume_ratio,
            "hv_switch_ratio": comparison.hv_switch_ratio,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("item,mab,three_dab")
        for item, mab, dab in comparison.rows():
            print(f'"{item}","{mab}","{dab}"')
    return 0


def cmd_sweep(args) -> int:
    from concurrent.futures import ProcessPoolExecutor

    try:
        scenarios = [_resolve_scenario(s) for s in args.scenarios]
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    worst = 0
    if args.workers <= 1:
        results = [_run_and_write(s, args.out) for s in scenarios]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_and_write_star, [(s, args.out) for s in scenarios]))
    for name, code in results:
        print(f"{name}: {'ok' if code == 0 else 'fault'}")
        worst = max(worst, code)
    return worst


def _run_and_write(scenario, outdir: str) -> tuple[str, int]:
    result = run_scenario(scenario)
    write_bundle(outdir, result)
    return scenario.name, 0 if result.fault is None else 2


def _run_and_write_star(pair):
    return _run_and_write(*pair)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfcsim",
        description="Direct-injection power-flow controller simulator and analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario (preset name or TOML file)")
    p_run.add_argument("scenario")
    p_run.add_argument("--step", type=float, default=None, help="integration step (s)")
    p_run.add_argument("--duration", type=float, default=None, help="simulated time (s)")
    p_run.add_argument("--out", default=_default_outdir(), help="output directory")
    p_run.add_argument("--svg", action="store_true", help="also write SVG plots")
    p_run.set_defaults(func=cmd_run)

    p_reg = sub.add_parser("opregion", help="operating-area limits")
    p_reg.add_argument("--vdc", type=float, required=True)
    p_reg.add_argument("--v1", type=float, required=True)
    p_reg.add_argument("--v2", type=float, default=None)
    p_reg.set_defaults(func=cmd_opregion)

    p_mab = sub.add_parser("mab-solve", help="solve phase shifts for power targets")
    p_mab.add_argument("--targets", required=True, help="P1,P2,P3 in watts")
    p_mab.add_argument("--magnetics", default=None, help="TOML magnetics file")
    p_mab.add_argument("--v-primary", type=float, default=800.0)
    p_mab.add_argument("--v-secondary", type=float, default=50.0)
    p_mab.set_defaults(func=cmd_mab_solve)

    p_loss = sub.add_parser("loss", help="loss breakdown report")
    p_loss.add_argument("--preset", default="reference", help="reference | upfc-baseline")
    p_loss.add_argument("--devices", default=None, help="TOML device-parameter file")
    p_loss.add_argument("--json", action="store_true")
    p_loss.set_defaults(func=cmd_loss)

    p_cmp = sub.add_parser("compare", help="shared-magnetics vs 3x dual-bridge table")
    p_cmp.add_argument("--json", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="run several scenarios")
    p_sweep.add_argument("scenarios", nargs="+")
    p_sweep.add_argument("--out", default=_default_outdir())
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
