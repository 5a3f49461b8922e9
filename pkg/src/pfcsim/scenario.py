"""Scenario definition: dataclass configuration tree, TOML loading with
path-precise validation, and the built-in presets ``case1``..``case4`` and
``bench``.

Every parameter block carries a ``provenance`` label: ``reference-design``
for values taken from the published system tables, ``user`` for free
inputs, and ``calibrated`` for back-fitted values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .phasor import Impedance

TWO_PI = 2.0 * math.pi
PROVENANCE_VALUES = ("reference-design", "user", "calibrated")


class ScenarioError(ValueError):
    """Configuration problem; the message carries the offending key path."""


@dataclass(frozen=True)
class GridConfig:
    voltage_ll_rms: float = 400.0
    frequency_hz: float = 50.0
    provenance: str = "reference-design"

    @property
    def omega(self) -> float:
        return TWO_PI * self.frequency_hz

    @property
    def phase_v_rms(self) -> float:
        return self.voltage_ll_rms / math.sqrt(3.0)


@dataclass(frozen=True)
class LineConfig:
    resistance_ohm: float = 0.02
    reactance_ohm: float = 0.05
    provenance: str = "reference-design"

    def impedance(self, omega: float) -> Impedance:
        return Impedance(self.resistance_ohm, self.reactance_ohm, omega)


@dataclass(frozen=True)
class SeriesConfig:
    v_dc: float = 50.0
    l_s: float = 100e-6
    c_dc: float = 200e-6
    ramp_time_s: float = 0.02
    provenance: str = "reference-design"


@dataclass(frozen=True)
class AfeConfig:
    v_dc_ref: float = 800.0
    c_dc_per_half: float = 1e-3
    l_f: float = 500e-6
    r_f: float = 0.1
    phase_margin_deg: float = 65.0
    i_limit_a: float = 400.0
    provenance: str = "user"


@dataclass(frozen=True)
class MabConfig:
    f_sw: float = 100e3
    f_s: float = 10e3
    pair_inductance_h: float = 15e-6
    turns_primary: float = 16.0
    turns_secondary: float = 1.0
    # voltage-loop design: crossover from the full loop-phase budget at
    # this margin and a delay of 1.5 sample periods
    phase_margin_deg: float = 45.0
    provenance: str = "reference-design"

    @property
    def t_d(self) -> float:
        return 1.5 / self.f_s


@dataclass(frozen=True)
class LoadConfig:
    """Balanced per-phase series R-L load from a three-phase P-Q rating."""

    p_w: float
    q_var: float
    provenance: str = "reference-design"

    def phase_impedance(self, v_phase_rms: float, omega: float) -> Impedance:
        s = complex(self.p_w, self.q_var) / 3.0
        if abs(s) == 0.0:
            raise ScenarioError("load: P and Q cannot both be zero")
        z = v_phase_rms**2 / s.conjugate()
        return Impedance(z.real, z.imag, omega)


@dataclass(frozen=True)
class Feeder2Config:
    voltage_ll_rms: float = 400.0
    angle_deg: float = 0.0
    provenance: str = "reference-design"

    @property
    def phase_v_rms(self) -> float:
        return self.voltage_ll_rms / math.sqrt(3.0)


@dataclass(frozen=True)
class Event:
    time_s: float
    action: str  # bypass | activate | retarget
    p_target_w: float | None = None
    q_target_var: float | None = None

    def __post_init__(self) -> None:
        if self.action not in ("bypass", "activate", "retarget"):
            raise ScenarioError(f"events: unknown action {self.action!r}")
        if self.time_s < 0.0:
            raise ScenarioError("events: time_s must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    duration_s: float = 1.0
    step_s: float = 10e-6
    control_period_s: float = 100e-6
    record_every_n: int = 10

    def __post_init__(self) -> None:
        if self.duration_s <= 0.0:
            raise ScenarioError("sim.duration_s must be > 0")
        if self.step_s > self.control_period_s:
            raise ScenarioError("sim.step_s must not exceed sim.control_period_s")
        steps = self.control_period_s / self.step_s
        if abs(steps - round(steps)) > 1e-9:
            raise ScenarioError("sim.control_period_s must be an integer multiple of step_s")


@dataclass(frozen=True)
class Scenario:
    """Full parameterization of one simulation run."""

    name: str
    kind: str  # "pq_load" | "two_feeder"
    strategy: str  # "q_compensation" | "balance_currents" | "feeder_power"
    grid: GridConfig = field(default_factory=GridConfig)
    line: LineConfig = field(default_factory=LineConfig)
    series: SeriesConfig = field(default_factory=SeriesConfig)
    afe: AfeConfig = field(default_factory=AfeConfig)
    mab: MabConfig = field(default_factory=MabConfig)
    load: LoadConfig | None = None
    feeder2: Feeder2Config | None = None
    feeder1_phase_v_rms: tuple[float, float, float] | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    events: tuple[Event, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("pq_load", "two_feeder"):
            raise ScenarioError(f"kind: must be 'pq_load' or 'two_feeder', got {self.kind!r}")
        if self.kind == "pq_load" and self.load is None:
            raise ScenarioError("load: required for kind = 'pq_load'")
        if self.kind == "two_feeder" and self.feeder2 is None:
            raise ScenarioError("feeder2: required for kind = 'two_feeder'")
        if self.strategy not in ("q_compensation", "balance_currents", "feeder_power"):
            raise ScenarioError(f"strategy: unknown strategy {self.strategy!r}")
        times = [e.time_s for e in self.events]
        if times != sorted(times):
            raise ScenarioError("events: must be time-sorted")

    def feeder1_phasors(self) -> tuple[complex, complex, complex]:
        """Per-phase rms phasors of Feeder 1 (a, b, c at 0/-120/+120 degrees)."""
        if self.feeder1_phase_v_rms is not None:
            mags = self.feeder1_phase_v_rms
        else:
            mags = (self.grid.phase_v_rms,) * 3
        angles = (0.0, -TWO_PI / 3.0, TWO_PI / 3.0)
        return tuple(m * complex(math.cos(a), math.sin(a)) for m, a in zip(mags, angles))

    def feeder2_phasors(self) -> tuple[complex, complex, complex]:
        if self.feeder2 is None:
            raise ScenarioError("feeder2: not configured")
        mag = self.feeder2.phase_v_rms
        off = math.radians(self.feeder2.angle_deg)
        angles = (off, off - TWO_PI / 3.0, off + TWO_PI / 3.0)
        return tuple(mag * complex(math.cos(a), math.sin(a)) for a in angles)


# ---------------------------------------------------------------------------
# TOML loading with strict, path-precise validation


_SCHEMA: dict = {
    "name": str,
    "kind": str,
    "strategy": str,
    "grid": {"voltage_ll_rms": float, "frequency_hz": float, "provenance": str},
    "line": {"resistance_ohm": float, "reactance_ohm": float, "provenance": str},
    "series": {
        "v_dc": float,
        "l_s": float,
        "c_dc": float,
        "ramp_time_s": float,
        "provenance": str,
    },
    "afe": {
        "v_dc_ref": float,
        "c_dc_per_half": float,
        "l_f": float,
        "r_f": float,
        "phase_margin_deg": float,
        "i_limit_a": float,
        "provenance": str,
    },
    "mab": {
        "f_sw": float,
        "f_s": float,
        "pair_inductance_h": float,
        "turns_primary": float,
        "turns_secondary": float,
        "phase_margin_deg": float,
        "provenance": str,
    },
    "load": {"p_w": float, "q_var": float, "provenance": str},
    "feeder2": {"voltage_ll_rms": float, "angle_deg": float, "provenance": str},
    "feeder1_phase_v_rms": list,
    "sim": {
        "duration_s": float,
        "step_s": float,
        "control_period_s": float,
        "record_every_n": int,
    },
    "events": list,
}

_EVENT_SCHEMA = {"time_s": float, "action": str, "p_target_w": float, "q_target_var": float}

_REQUIRED_TOP = ("name", "kind", "strategy")


def _check_keys(data: dict, schema: dict, path: str) -> None:
    for key, value in data.items():
        if key not in schema:
            raise ScenarioError(f"{path}{key}: unknown key")
        expect = schema[key]
        if isinstance(expect, dict):
            if not isinstance(value, dict):
                raise ScenarioError(f"{path}{key}: expected a table")
            _check_keys(value, expect, f"{path}{key}.")
        elif expect is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ScenarioError(f"{path}{key}: expected a number")
        elif expect is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ScenarioError(f"{path}{key}: expected an integer")
        elif expect is str:
            if not isinstance(value, str):
                raise ScenarioError(f"{path}{key}: expected a string")
        elif expect is list:
            if not isinstance(value, list):
                raise ScenarioError(f"{path}{key}: expected an array")


def _check_provenance(data: dict, path: str) -> None:
    for key, value in data.items():
        if key == "provenance" and value not in PROVENANCE_VALUES:
            raise ScenarioError(
                f"{path}provenance: must be one of {', '.join(PROVENANCE_VALUES)}"
            )
        elif isinstance(value, dict):
            _check_provenance(value, f"{path}{key}.")


def scenario_from_dict(data: dict) -> Scenario:
    """Build a validated :class:`Scenario` from a plain mapping."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a table at the top level")
    _check_keys(data, _SCHEMA, "")
    _check_provenance(data, "")
    for key in _REQUIRED_TOP:
        if key not in data:
            raise ScenarioError(f"{key}: missing required key")
    kind = data["kind"]
    if kind == "pq_load" and "load" not in data:
        raise ScenarioError("load: missing required table for kind = 'pq_load'")
    if kind == "two_feeder" and "feeder2" not in data:
        raise ScenarioError("feeder2: missing required table for kind = 'two_feeder'")

    def build(cls, key, required=()):
        if key not in data:
            return cls()
        block = dict(data[key])
        for req in required:
            if req not in block:
                raise ScenarioError(f"{key}.{req}: missing required key")
        return cls(**block)

    load = None
    if "load" in data:
        block = dict(data["load"])
        for req in ("p_w", "q_var"):
            if req not in block:
                raise ScenarioError(f"load.{req}: missing required key")
        load = LoadConfig(**block)
    feeder2 = None
    if "feeder2" in data:
        feeder2 = Feeder2Config(**dict(data["feeder2"]))
    events = []
    for idx, ev in enumerate(data.get("events", [])):
        if not isinstance(ev, dict):
            raise ScenarioError(f"events[{idx}]: expected a table")
        _check_keys(ev, _EVENT_SCHEMA, f"events[{idx}].")
        if "time_s" not in ev or "action" not in ev:
            raise ScenarioError(f"events[{idx}]: time_s and action are required")
        events.append(Event(**ev))
    feeder1 = None
    if "feeder1_phase_v_rms" in data:
        vals = data["feeder1_phase_v_rms"]
        if len(vals) != 3 or not all(isinstance(v, (int, float)) for v in vals):
            raise ScenarioError("feeder1_phase_v_rms: expected exactly three numbers")
        feeder1 = tuple(float(v) for v in vals)

    return Scenario(
        name=data["name"],
        kind=kind,
        strategy=data["strategy"],
        grid=build(GridConfig, "grid"),
        line=build(LineConfig, "line"),
        series=build(SeriesConfig, "series"),
        afe=build(AfeConfig, "afe"),
        mab=build(MabConfig, "mab"),
        load=load,
        feeder2=feeder2,
        feeder1_phase_v_rms=feeder1,
        sim=build(SimConfig, "sim"),
        events=tuple(events),
    )


def load_scenario(path: str) -> Scenario:
    """Load and validate a TOML scenario file."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"{path}: invalid TOML: {exc}") from exc
    return scenario_from_dict(data)


# ---------------------------------------------------------------------------
# Built-in presets


def case1() -> Scenario:
    """P-Q load 40 kW + j5.621 kVar; reactive compensation engages at t = 0.3 s."""
    return Scenario(
        name="case1",
        kind="pq_load",
        strategy="q_compensation",
        load=LoadConfig(p_w=40e3, q_var=5.621e3),
        events=(Event(0.3, "activate"),),
    )


def case2() -> Scenario:
    """Two feeders, 400 vs 380 V, same phase; regulate down at 0.3 s, reverse at 0.6 s."""
    return Scenario(
        name="case2",
        kind="two_feeder",
        strategy="feeder_power",
        feeder2=Feeder2Config(voltage_ll_rms=380.0, angle_deg=0.0),
        events=(
            Event(0.3, "activate", p_target_w=10e3, q_target_var=0.0),
            Event(0.6, "retarget", p_target_w=-10e3, q_target_var=0.0),
        ),
    )


def case3() -> Scenario:
    """Two feeders, equal amplitude, 8 degree offset; push against the gradient at 0.6 s."""
    return Scenario(
        name="case3",
        kind="two_feeder",
        strategy="feeder_power",
        feeder2=Feeder2Config(voltage_ll_rms=400.0, angle_deg=8.0),
        events=(Event(0.6, "activate", p_target_w=10e3, q_target_var=0.0),),
    )


def case4() -> Scenario:
    """Unbalanced 200/230/250 V feeder with a 30 kW + j4.5 kVar load; balance at 0.5 s."""
    return Scenario(
        name="case4",
        kind="pq_load",
        strategy="balance_currents",
        load=LoadConfig(p_w=30e3, q_var=4.5e3),
        feeder1_phase_v_rms=(200.0, 230.0, 250.0),
        events=(Event(0.5, "activate"),),
    )


def bench() -> Scenario:
    """Experimental-demonstrator parameter set (alternate line and switching values)."""
    return Scenario(
        name="bench",
        kind="two_feeder",
        strategy="feeder_power",
        line=LineConfig(resistance_ohm=0.04, reactance_ohm=TWO_PI * 50.0 * 700e-6),
        afe=AfeConfig(v_dc_ref=750.0),
        mab=MabConfig(f_sw=50e3),
        feeder2=Feeder2Config(voltage_ll_rms=400.0, angle_deg=2.0),
        events=(Event(0.3, "activate", p_target_w=5e3, q_target_var=0.0),),
    )


PRESETS = {
    "case1": case1,
    "case2": case2,
    "case3": case3,
    "case4": case4,
    "bench": bench,
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
