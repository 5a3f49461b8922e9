"""Shared fixtures: the four scenario presets simulated once per session."""

import time

import pytest

from pfcsim.engine import run_scenario
from pfcsim.scenario import preset


@pytest.fixture(scope="session")
def case1_run():
    t0 = time.perf_counter()
    result = run_scenario(preset("case1"))
    wall = time.perf_counter() - t0
    return result, wall


@pytest.fixture(scope="session")
def case2_run():
    return run_scenario(preset("case2"))


@pytest.fixture(scope="session")
def case3_run():
    return run_scenario(preset("case3"))


@pytest.fixture(scope="session")
def case4_run():
    return run_scenario(preset("case4"))


@pytest.fixture(scope="session")
def all_case_runs(case1_run, case2_run, case3_run, case4_run):
    return {
        "case1": case1_run[0],
        "case2": case2_run,
        "case3": case3_run,
        "case4": case4_run,
    }
