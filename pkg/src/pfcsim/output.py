"""Result serialization: RFC-4180 CSV with a versioned schema line, summary
JSON with a shipped validation schema, and self-contained SVG line plots."""

from __future__ import annotations

import csv
import json
import os

from .engine import SimResult, TimeSeries

CSV_SCHEMA_LINE = "#schema=1"

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "scenario", "kind", "strategy", "duration_s", "step_s",
        "control_period_s", "events", "tail_window_s", "tail_metrics",
        "dc_extremes", "audit", "region", "fault", "healthy",
    ],
    "properties": {
        "scenario": {"type": "string"},
        "kind": {"enum": ["pq_load", "two_feeder"]},
        "strategy": {"type": "string"},
        "duration_s": {"type": "number"},
        "step_s": {"type": "number"},
        "control_period_s": {"type": "number"},
        "events": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["time_s", "action"],
                "properties": {
                    "time_s": {"type": "number"},
                    "action": {"enum": ["bypass", "activate", "retarget"]},
                    "p_target_w": {"type": ["number", "null"]},
                    "q_target_var": {"type": ["number", "null"]},
                },
            },
        },
        "tail_window_s": {"type": "number"},
        "tail_metrics": {"type": "object"},
        "dc_extremes": {"type": "object"},
        "audit": {"type": "object"},
        "region": {"type": "object"},
        "fault": {
            "type": ["object", "null"],
            "properties": {
                "time_s": {"type": "number"},
                "cause": {"type": "string"},
            },
        },
        "healthy": {"type": "boolean"},
    },
}


def write_csv(path: str, records: TimeSeries) -> None:
    """Write the record stream as RFC-4180 CSV behind a schema comment line.

    Floats are formatted with shortest-round-trip repr.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(CSV_SCHEMA_LINE + "\r\n")
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(records.columns)
        for row in records.rows():
            writer.writerow([repr(float(v)) for v in row])


def read_csv(path: str) -> TimeSeries:
    """Read a record stream written by :func:`write_csv`."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("#schema="):
            raise ValueError(f"{path}: missing schema line")
        reader = csv.reader(fh)
        header = tuple(next(reader))
        ts = TimeSeries(header, {c: [] for c in header})
        for row in reader:
            ts.append({c: float(v) for c, v in zip(header, row)})
    return ts


def write_summary(path: str, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


_FIGURE_GROUPS = {
    "voltages": ("v1_a_v", "v1_b_v", "v1_c_v", "v2_a_v", "v2_b_v", "v2_c_v"),
    "currents": ("i_a_a", "i_b_a", "i_c_a", "i_rms_a_a", "i_rms_b_a", "i_rms_c_a"),
    "power": ("p1_w", "q1_var", "p2_w", "q2_var"),
    "dclink": ("vdc_a_v", "vdc_b_v", "vdc_c_v", "v_bus_v"),
}


def write_svg_plots(outdir: str, records: TimeSeries, prefix: str = "") -> list[str]:
    """Render one self-contained SVG per figure group; render-only output."""
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "pfcsim"
    import matplotlib.pyplot as plt

    t = records.column("time_s")
    written = []
    for group, cols in _FIGURE_GROUPS.items():
        fig, ax = plt.subplots(figsize=(8, 4))
        for col in cols:
            ax.plot(t, records.column(col), label=col, linewidth=0.8)
        ax.set_xlabel("time (s)")
        ax.set_title(group)
        ax.legend(fontsize=7, ncol=2)
        ax.grid(True, alpha=0.3)
        path = os.path.join(outdir, f"{prefix}{group}.svg")
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)
    return written


def write_bundle(outdir: str, result: SimResult, svg: bool = False) -> dict:
    """Write the CSV + summary JSON (+ optional SVG plots) for one run."""
    os.makedirs(outdir, exist_ok=True)
    name = result.scenario.name
    csv_path = os.path.join(outdir, f"{name}.csv")
    json_path = os.path.join(outdir, f"{name}.json")
    write_csv(csv_path, result.records)
    write_summary(json_path, result.summary)
    paths = {"csv": csv_path, "summary": json_path, "svg": []}
    if svg:
        paths["svg"] = write_svg_plots(outdir, result.records, prefix=f"{name}_")
    return paths
