"""Averaged-model simulator and analysis toolkit for a transformerless
direct-injection power-flow controller: per-phase series-injection modules,
a shared active-front-end shunt converter, and a multi-active-bridge power
router."""

from .phasor import (
    DqSample,
    Impedance,
    Phasor,
    QuadratureDelay,
    ThreePhaseSet,
    from_dq,
    phasor_to_dq,
    dq_to_phasor,
    quadrature_of,
    to_dq,
)
from .control import PiController
from .series import (
    OperatingRegion,
    SeriesCurrentController,
    SeriesModuleParams,
    SeriesVoltageCommand,
    full_compensation_command,
    line_current,
    pq_load_operating_region,
    pq_load_power,
    two_feeder_injected_power,
    two_feeder_nulling_command,
    two_feeder_operating_region,
)
from .afe import (
    AfeCurrentController,
    AfeParams,
    AfeState,
    DcBusVoltageController,
    afe_gains,
    afe_power_balance,
)
from .mab import (
    MabGainMatrix,
    MabMagnetics,
    MabOperatingPoint,
    MabVoltageController,
    bridge_currents,
    bridge_powers,
    decoupling_terms,
    delta_inductances,
    mab_pi_tuning,
    small_signal_gains,
    solve_phase_shifts,
    symmetric_magnetics,
)
from .losses import (
    BertottiParams,
    LossBreakdown,
    SwitchParams,
    bertotti_density,
    calibrated_core_volume,
    filter_resonance_check,
    reference_breakdown,
    switch_loss,
    topology_comparison,
    transformer_bandwidth,
)
from .scenario import Scenario, load_scenario, preset, scenario_from_dict
from .engine import (
    SimResult,
    TimeSeries,
    bypass_current_prediction,
    power_audit,
    run_scenario,
    steady_state_check,
)

__version__ = "0.1.0"
