"""Scenario tree validation, TOML loading, and the built-in presets."""

import math
import textwrap

import pytest

from pfcsim.scenario import (
    PRESETS,
    Event,
    ScenarioError,
    SimConfig,
    load_scenario,
    preset,
    scenario_from_dict,
)

MINIMAL_TOML = textwrap.dedent(
    """
    name = "mini"
    kind = "two_feeder"
    strategy = "feeder_power"

    [feeder2]
    voltage_ll_rms = 380.0
    angle_deg = 0.0
    provenance = "user"

    [[events]]
    time_s = 0.1
    action = "activate"
    p_target_w = 5000.0
    q_target_var = 0.0
    """
)


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_construct(self, name):
        s = preset(name)
        assert s.name == name
        assert s.sim.duration_s > 0

    def test_unknown_preset(self):
        with pytest.raises(ScenarioError, match="unknown preset"):
            preset("case9")

    def test_case_parameters(self):
        c1 = preset("case1")
        assert c1.load.p_w == 40e3 and c1.load.q_var == 5.621e3
        assert c1.events[0].time_s == 0.3
        c2 = preset("case2")
        assert c2.feeder2.voltage_ll_rms == 380.0
        assert [e.time_s for e in c2.events] == [0.3, 0.6]
        c3 = preset("case3")
        assert c3.feeder2.angle_deg == 8.0
        assert c3.events[0].time_s == 0.6
        c4 = preset("case4")
        assert c4.feeder1_phase_v_rms == (200.0, 230.0, 250.0)
        assert c4.load.p_w == 30e3 and c4.load.q_var == 4.5e3
        assert c4.events[0].time_s == 0.5
        b = preset("bench")
        assert b.line.resistance_ohm == 0.04
        assert b.afe.v_dc_ref == 750.0
        assert b.mab.f_sw == 50e3

    def test_feeder_phasors(self):
        s = preset("case4")
        v1 = s.feeder1_phasors()
        assert [abs(v) for v in v1] == pytest.approx([200.0, 230.0, 250.0])
        s3 = preset("case3")
        v2 = s3.feeder2_phasors()
        assert math.degrees(math.atan2(v2[0].imag, v2[0].real)) == pytest.approx(8.0)


class TestTomlLoading:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "mini.toml"
        path.write_text(MINIMAL_TOML)
        s = load_scenario(str(path))
        assert s.name == "mini"
        assert s.feeder2.voltage_ll_rms == 380.0
        assert s.events[0].p_target_w == 5000.0

    def test_unknown_key_rejected_with_path(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(MINIMAL_TOML + "\n[grid]\nvoltag = 400.0\n")
        with pytest.raises(ScenarioError, match=r"grid\.voltag: unknown key"):
            load_scenario(str(path))

    def test_missing_required_key(self):
        with pytest.raises(ScenarioError, match="strategy: missing required key"):
            scenario_from_dict({"name": "x", "kind": "pq_load", "load": {"p_w": 1.0, "q_var": 0.0}})

    def test_missing_load_block(self):
        with pytest.raises(ScenarioError, match="load: missing required table"):
            scenario_from_dict({"name": "x", "kind": "pq_load", "strategy": "q_compensation"})

    def test_missing_load_field(self):
        with pytest.raises(ScenarioError, match=r"load\.q_var: missing required key"):
            scenario_from_dict(
                {
                    "name": "x",
                    "kind": "pq_load",
                    "strategy": "q_compensation",
                    "load": {"p_w": 1.0},
                }
            )

    def test_bad_provenance(self):
        data = {
            "name": "x",
            "kind": "two_feeder",
            "strategy": "feeder_power",
            "feeder2": {"voltage_ll_rms": 380.0, "provenance": "paper"},
        }
        with pytest.raises(ScenarioError, match="provenance"):
            scenario_from_dict(data)

    def test_type_checking(self):
        data = {
            "name": "x",
            "kind": "two_feeder",
            "strategy": "feeder_power",
            "feeder2": {"voltage_ll_rms": "high"},
        }
        with pytest.raises(ScenarioError, match=r"feeder2\.voltage_ll_rms: expected a number"):
            scenario_from_dict(data)

    def test_invalid_toml_reported(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("name = [unclosed")
        with pytest.raises(ScenarioError, match="invalid TOML"):
            load_scenario(str(path))


class TestValidation:
    def test_events_must_be_sorted(self):
        with pytest.raises(ScenarioError, match="time-sorted"):
            scenario_from_dict(
                {
                    "name": "x",
                    "kind": "two_feeder",
                    "strategy": "feeder_power",
                    "feeder2": {"voltage_ll_rms": 380.0},
                    "events": [
                        {"time_s": 0.5, "action": "activate"},
                        {"time_s": 0.2, "action": "bypass"},
                    ],
                }
            )

    def test_unknown_action(self):
        with pytest.raises(ScenarioError, match="unknown action"):
            Event(0.1, "explode")

    def test_sim_config_constraints(self):
        with pytest.raises(ScenarioError, match="integer multiple"):
            SimConfig(step_s=3e-5, control_period_s=1e-4)
        with pytest.raises(ScenarioError, match="must not exceed"):
            SimConfig(step_s=2e-4, control_period_s=1e-4)

    def test_zero_load_rejected(self):
        s = preset("case1")
        from pfcsim.scenario import LoadConfig

        with pytest.raises(ScenarioError, match="cannot both be zero"):
            LoadConfig(0.0, 0.0).phase_impedance(230.0, 314.159)
