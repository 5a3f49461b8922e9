"""Averaged model and voltage-oriented control of the three-phase four-wire
active front end: inner d-q current loops, the gain design rule, the outer
dc-bus voltage loop, and the dc-bus energy balance."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .control import PiController
from .phasor import DqSample

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class AfeParams:
    """Design parameters of the active front end.

    ``c_dc`` is the split-bus capacitance per half; the two halves in
    series give the equivalent bus capacitance ``c_eq = c_dc / 2``. The
    filter values are not part of the published parameter set and default
    to plausible desk-scale values in the scenario presets.
    """

    l_f: float
    r_f: float
    t_s: float
    phase_margin: float
    v_dc_ref: float
    c_dc: float
    omega: float
    i_limit: float = 400.0

    def __post_init__(self) -> None:
        if not 0.0 < self.phase_margin < HALF_PI:
            raise ValueError("phase margin must lie in (0, pi/2)")
        if self.l_f <= 0.0 or self.r_f <= 0.0 or self.t_s <= 0.0:
            raise ValueError("l_f, r_f, t_s must be > 0")
        if self.a <= 2.0:
            warnings.warn(
                "a = 1/(pi/2 - phase_margin) <= 2; a > 2 is the practical stability guideline",
                stacklevel=2,
            )
        if self.v_dc_ref < 700.0:
            warnings.warn(
                "dc bus reference below 700 V increases current distortion", stacklevel=2
            )

    @property
    def a(self) -> float:
        return 1.0 / (HALF_PI - self.phase_margin)

    @property
    def c_eq(self) -> float:
        return self.c_dc / 2.0


@dataclass
class AfeState:
    """Averaged electrical state of the front end.

    Currents follow the inverter convention of the voltage-command
    equations: positive i_d exports power from the dc bus into the grid.
    The split-bus midpoint is modeled as ideally balanced, so each half
    carries v_bus / 2.
    """

    i_d: float = 0.0
    i_q: float = 0.0
    v_bus: float = 800.0

    @property
    def v_dc_upper(self) -> float:
        return self.v_bus / 2.0

    @property
    def v_dc_lower(self) -> float:
        return self.v_bus / 2.0


def afe_gains(params: AfeParams) -> tuple[float, float]:
    """Inner current-loop PI gains: k_p = L_f/(1.5 a T_s), tau_i = L_f/R_f."""
    return params.l_f / (1.5 * params.a * params.t_s), params.l_f / params.r_f


class AfeCurrentController:
    """Inner d-q current regulator.

    V_d = U_d - w L_f I_q + PI(I_d_err); V_q = U_q + w L_f I_d + PI(I_q_err),
    vector-clamped to the half-bridge modulation limit v_bus/2 per leg.
    """

    def __init__(self, params: AfeParams):
        self.params = params
        k_p, tau_i = afe_gains(params)
        self.pi_d = PiController(k_p, tau_i, params.t_s)
        self.pi_q = PiController(k_p, tau_i, params.t_s)
        self.saturated = False

    def reset(self) -> None:
        self.pi_d.reset()
        self.pi_q.reset()
        self.saturated = False

    def voltage_command(
        self, i_ref: DqSample, i_meas: DqSample, u: DqSample, v_bus: float
    ) -> tuple[DqSample, bool]:
        w_l = self.params.omega * self.params.l_f
        freeze = self.saturated
        ud = self.pi_d.step(i_ref.d - i_meas.d, freeze=freeze)
        uq = self.pi_q.step(i_ref.q - i_meas.q, freeze=freeze)
        vd = u.d - w_l * i_meas.q + ud
        vq = u.q + w_l * i_meas.d + uq
        limit = v_bus / 2.0
        mag = math.hypot(vd, vq)
        if mag > limit:
            scale = limit / mag
            vd *= scale
            vq *= scale
            self.saturated = True
        else:
            self.saturated = False
        return DqSample(vd, vq, i_meas.theta), self.saturated


def afe_voltage_command(
    controller: AfeCurrentController, i_ref: DqSample, i_meas: DqSample, u: DqSample, v_bus: float
) -> DqSample:
    """Functional wrapper around :meth:`AfeCurrentController.voltage_command`."""
    cmd, _ = controller.voltage_command(i_ref, i_meas, u, v_bus)
    return cmd


def outer_loop_gains(params: AfeParams, u_d_peak: float) -> tuple[float, float]:
    """dc-bus voltage-loop PI gains.

    The loop bandwidth is placed one decade below the inner current-loop
    crossover, with the PI zero at the bandwidth (45 degrees of margin
    recovery over the capacitor integrator).
    """
    w_inner = 1.0 / (1.5 * params.a * params.t_s)
    w_outer = w_inner / 10.0
    plant_gain = 1.5 * u_d_peak / (params.c_eq * params.v_dc_ref)
    k_p = w_outer / plant_gain
    tau_i = 1.0 / w_outer
    return k_p, tau_i


class DcBusVoltageController:
    """Outer loop regulating the shared dc bus.

    Returns a d-axis current reference with import-positive sign: a
    positive reference means the front end should draw power from the
    grid into the bus.
    """

    def __init__(self, params: AfeParams, u_d_peak: float):
        k_p, tau_i = outer_loop_gains(params, u_d_peak)
        self.pi = PiController(k_p, tau_i, params.t_s, u_min=-params.i_limit, u_max=params.i_limit)
        self.v_dc_ref = params.v_dc_ref

    def reset(self) -> None:
        self.pi.reset()

    def current_reference(self, v_dc_measured: float) -> float:
        return self.pi.step(self.v_dc_ref - v_dc_measured)


def dc_bus_outer_loop(controller: DcBusVoltageController, v_dc_measured: float) -> float:
    """Functional wrapper around :meth:`DcBusVoltageController.current_reference`."""
    return controller.current_reference(v_dc_measured)


def grid_power(state: AfeState, u: DqSample) -> float:
    """Three-phase power drawn from the grid into the bus (import-positive).

    Equals 1.5*(U_d I_d + U_q I_q) on the import-positive current; the
    state stores inverter-convention currents, hence the negation.
    """
    return -1.5 * (u.d * state.i_d + u.q * state.i_q)


def afe_power_balance(
    state: AfeState, p_mab_draw: float, dt: float, params: AfeParams, u: DqSample
) -> AfeState:
    """Advance the dc-bus energy balance by one step.

    c_eq * dV/dt = (P_grid_in - P_mab_draw) / V; raises on bus collapse.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    p_in = grid_power(state, u)
    v_new = state.v_bus + dt * (p_in - p_mab_draw) / (params.c_eq * state.v_bus)
    if v_new <= 0.0:
        raise DcBusCollapse(f"dc bus collapsed to {v_new:.1f} V")
    return AfeState(i_d=state.i_d, i_q=state.i_q, v_bus=v_new)


class DcBusCollapse(RuntimeError):
    """Raised when the averaged dc-bus voltage reaches zero."""
