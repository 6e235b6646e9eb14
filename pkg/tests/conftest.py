import os
from dataclasses import replace

import pytest

from dtnetsim.scenario import ScenarioConfig, parse_file

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


@pytest.fixture
def default_cfg():
    return parse_file(os.path.join(SCENARIO_DIR, "default.cfg"))


@pytest.fixture
def mixed_cfg():
    return parse_file(os.path.join(SCENARIO_DIR, "mixed.cfg"))


@pytest.fixture
def base_cfg():
    """Case-study defaults (the empty-file configuration)."""
    return ScenarioConfig()


def quiet_cfg(cfg: ScenarioConfig, **workload_overrides) -> ScenarioConfig:
    """No mobility, no model updates; optional workload tweaks."""
    out = replace(cfg,
                  mobility=replace(cfg.mobility, movers=0),
                  model_update=replace(cfg.model_update, period_s=0.0))
    if workload_overrides:
        out = replace(out, workload=replace(out.workload, **workload_overrides))
    return out
