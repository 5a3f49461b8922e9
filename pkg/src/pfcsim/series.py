"""Per-phase series-injection stage: line-current physics, d-q current
control, and the operating-area calculators for P-Q loads and feeder pairs."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .control import PiController
from .phasor import SQRT2, DqSample, Impedance, Phasor, normalize_angle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeriesModuleParams:
    """Electrical parameters of one series-injection module and its loop.

    ``line`` is the total impedance the current loop works against: the
    feeder-to-feeder line for two-feeder operation, or the load impedance
    when the module feeds a P-Q load directly.
    """

    v_dc: float
    l_s: float
    line: Impedance
    omega: float

    def __post_init__(self) -> None:
        if self.v_dc <= 0.0:
            raise ValueError("series module dc voltage must be > 0")
        if self.l_s <= 0.0:
            raise ValueError("series inductance must be > 0")

    @property
    def modulation_radius_peak(self) -> float:
        # An H-bridge on a v_dc link can synthesize a fundamental of at most
        # v_dc peak, i.e. v_dc/sqrt(2) rms, matching r_max = v_dc/(sqrt(2) V1).
        return self.v_dc

    def modulation_ratio_limit(self, v1_rms: float) -> float:
        return self.v_dc / (SQRT2 * v1_rms)


@dataclass(frozen=True)
class SeriesVoltageCommand:
    """Injected voltage as a fraction ``r`` of the feeder phasor, rotated by gamma."""

    r: float
    gamma: float

    def __post_init__(self) -> None:
        if self.r < 0.0:
            raise ValueError("modulation ratio r must be >= 0")
        object.__setattr__(self, "gamma", self.gamma % TWO_PI)

    def voltage(self, v1: Phasor) -> Phasor:
        return v1 * cmath.rect(self.r, self.gamma)


@dataclass(frozen=True)
class OperatingRegion:
    """Feasibility limits, symmetric about zero.

    ``load_angle_limit`` applies to P-Q loads (admissible atan(Q/P)).
    ``amplitude_limit`` / ``phase_limit`` apply to feeder pairs; ``feasible``
    is the verdict for the voltage pair the region was computed for (None
    for the P-Q form). Outside the limits the system would bypass.
    """

    load_angle_limit: float | None = None
    amplitude_limit: float | None = None
    phase_limit: float | None = None
    feasible: bool | None = None

    def contains_load_angle(self, phi: float) -> bool:
        if self.load_angle_limit is None:
            raise ValueError("not a P-Q load region")
        return abs(normalize_angle(phi)) <= self.load_angle_limit


def line_current(v1: Phasor, v2: Phasor, vs: Phasor, zg: Impedance) -> Phasor:
    """Line current (V1 + Vs - V2) / Zg between two feeders."""
    if zg.magnitude == 0.0:
        raise ValueError("degenerate scenario: zero line impedance")
    return Phasor((v1.rect + vs.rect - v2.rect) / zg.z)


def pq_load_operating_region(v_dc: float, v1_rms: float) -> OperatingRegion:
    """Admissible load-angle band for full reactive compensation of a P-Q load.

    The ratio v_dc/(sqrt(2) v1) is saturated at 1, in which case the region
    is the full circle.
    """
    if v_dc < 0.0 or v1_rms <= 0.0:
        raise ValueError("v_dc must be >= 0 and v1 > 0")
    ratio = min(1.0, v_dc / (SQRT2 * v1_rms))
    return OperatingRegion(load_angle_limit=math.asin(ratio))


def two_feeder_operating_region(v_dc: float, v1_rms: float, v2_rms: float) -> OperatingRegion:
    """Amplitude and phase-difference limits a module can bridge between feeders."""
    if v_dc < 0.0 or v1_rms <= 0.0 or v2_rms <= 0.0:
        raise ValueError("voltages must be positive (v_dc >= 0)")
    amplitude_limit = v_dc / SQRT2
    ratio = min(1.0, v_dc / (SQRT2 * v1_rms))
    return OperatingRegion(
        amplitude_limit=amplitude_limit,
        phase_limit=math.asin(ratio),
        feasible=abs(v1_rms - v2_rms) <= amplitude_limit,
    )


def pq_load_power(
    v1: Phasor, cmd: SeriesVoltageCommand, z_l: Impedance, phi: float
) -> tuple[float, float]:
    """Feeder-side active/reactive power when the module feeds a P-Q load.

    P1 = (V1^2/|Z_L|) cos(phi) + (r V1^2/|Z_L|) cos(phi - gamma), and the
    analogous sine expression for Q1.
    """
    if z_l.magnitude == 0.0:
        raise ValueError("degenerate scenario: zero load impedance")
    base = v1.magnitude**2 / z_l.magnitude
    p1 = base * math.cos(phi) + cmd.r * base * math.cos(phi - cmd.gamma)
    q1 = base * math.sin(phi) + cmd.r * base * math.sin(phi - cmd.gamma)
    return p1, q1


def full_compensation_command(phi: float, r: float | None = None) -> SeriesVoltageCommand:
    """Injection command that nulls the feeder's reactive power for load angle phi.

    Q1 vanishes when r*sin(phi - gamma) = -sin(phi); the minimum-amplitude
    solution uses r = |sin(phi)| with phi - gamma = -+pi/2. (Solving with
    the opposite sign of the injection term doubles Q1 instead of cancelling
    it; this sign choice is verified numerically in the test suite.)
    """
    if r is None:
        r = abs(math.sin(phi))
    if r == 0.0:
        if math.sin(phi) != 0.0:
            raise ValueError("r = 0 cannot compensate a reactive load")
        return SeriesVoltageCommand(0.0, 0.0)
    arg = -math.sin(phi) / r
    if abs(arg) > 1.0:
        raise ValueError("r too small to null the reactive power at this load angle")
    gamma = phi - math.asin(arg)
    return SeriesVoltageCommand(r, gamma % TWO_PI)


def two_feeder_injected_power(
    v1: Phasor, v2: Phasor, cmd: SeriesVoltageCommand, x_g: float
) -> tuple[float, float]:
    """Active/reactive power injected into Feeder 2 over a reactance-dominated line.

    Positive P flows into Feeder 2.
    """
    if x_g <= 0.0:
        raise ValueError("line reactance must be > 0")
    d = v1.angle - v2.angle
    vv = v1.magnitude * v2.magnitude / x_g
    p = vv * math.sin(d) + cmd.r * vv * math.sin(d + cmd.gamma)
    q = vv * math.cos(d) + cmd.r * vv * math.cos(d + cmd.gamma) - v2.magnitude**2 / x_g
    return p, q


def two_feeder_nulling_command(v1: Phasor, v2: Phasor) -> SeriesVoltageCommand:
    """Command that nulls both injected P and Q between two feeders.

    From the complex form of the injected power, r e^{j(d+gamma)} must equal
    V2/V1 - e^{jd}; the closed form below satisfies both components exactly.
    """
    d = v1.angle - v2.angle
    target = v2.magnitude / v1.magnitude - cmath.exp(1j * d)
    r = abs(target)
    gamma = (cmath.phase(target) - d) % TWO_PI
    return SeriesVoltageCommand(r, gamma)


def series_gains(params: SeriesModuleParams, t_s: float, a: float = 2.0) -> tuple[float, float]:
    """PI gains for the series current loop from the first-order L/R plant.

    Same tuning rule as the shunt stage: k_p = L/(1.5 a t_s), tau_i = L/R,
    with a = 2 as the stability guideline.
    """
    inductance = params.line.inductance
    resistance = params.line.resistance
    if resistance <= 0.0:
        raise ValueError("loop resistance must be > 0 for the tuning rule")
    return inductance / (1.5 * a * t_s), inductance / resistance


class SeriesCurrentController:
    """d-q current regulator of one series module (one phase).

    Implements the synchronous-frame voltage command

        V_Sd = V_2d - V_1d - w L I_q + PI(I_d_err)
        V_Sq = V_2q - V_1q + w L I_d + PI(I_q_err)

    with the output vector-clamped to the modulation circle (angle
    preserved, magnitude scaled). Saturation is reported via a flag, and
    both integrators are frozen on the tick after a clamped output.
    """

    def __init__(self, params: SeriesModuleParams, t_s: float, a: float = 2.0):
        self.params = params
        k_p, tau_i = series_gains(params, t_s, a)
        self.pi_d = PiController(k_p, tau_i, t_s)
        self.pi_q = PiController(k_p, tau_i, t_s)
        self.saturated = False

    def reset(self) -> None:
        self.pi_d.reset()
        self.pi_q.reset()
        self.saturated = False

    def voltage_setpoint(
        self,
        i_ref: DqSample,
        i_meas: DqSample,
        v1: DqSample,
        v2: DqSample,
    ) -> tuple[DqSample, bool]:
        w_l = self.params.omega * self.params.line.inductance
        freeze = self.saturated
        ud = self.pi_d.step(i_ref.d - i_meas.d, freeze=freeze)
        uq = self.pi_q.step(i_ref.q - i_meas.q, freeze=freeze)
        vd = v2.d - v1.d - w_l * i_meas.q + ud
        vq = v2.q - v1.q + w_l * i_meas.d + uq
        mag = math.hypot(vd, vq)
        limit = self.params.modulation_radius_peak
        if mag > limit:
            scale = limit / mag
            vd *= scale
            vq *= scale
            self.saturated = True
        else:
            self.saturated = False
        return DqSample(vd, vq, i_meas.theta), self.saturated
