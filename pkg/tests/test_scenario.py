import pytest

from dtnetsim.scenario import (ScenarioConfig, ScenarioError, parse_text,
                               serialize, validate, with_overrides)


def errors_of(text):
    with pytest.raises(ScenarioError) as exc:
        parse_text(text)
    return exc.value.errors


def test_empty_file_resolves_to_case_study_defaults():
    cfg = parse_text("")
    assert cfg.topology.terminals == 10
    assert cfg.topology.edges == 2
    assert cfg.topology.wireless_uplink_mbps == 50.0
    assert cfg.topology.wireless_downlink_mbps == 200.0
    assert cfg.topology.fiber_gbps == 1.0
    assert cfg.compute.terminal_gflops == 1.0
    assert cfg.compute.edge_gflops == 20.0
    assert cfg.compute.cloud_gflops == 500.0
    assert cfg.mobility.movers == 5
    assert cfg.mobility.switch_period_s == 1.0
    assert cfg.signaling.centralized_total_bytes == 15000


def test_partial_file_overrides_one_key():
    cfg = parse_text("[workload]\nrate_per_terminal = 0.25\n")
    assert cfg.workload.rate_per_terminal == 0.25
    assert cfg.workload.mix_local == 0.5  # untouched default


def test_comments_and_blank_lines_ignored():
    cfg = parse_text(
        "# leading comment\n\n[topology]\nterminals = 12  # inline\n")
    assert cfg.topology.terminals == 12


def test_mix_not_summing_to_one_pinpoints_workload():
    errs = errors_of("[workload]\nmix_local = 0.5\nmix_edge = 0.3\n"
                     "mix_cloud = 0.1\n")
    assert any(e.section == "workload" and "sum to 1" in e.message
               for e in errs)


def test_movers_exceeding_terminals_pinpoints_mobility():
    errs = errors_of("[mobility]\nmovers = 11\n")
    assert any(e.section == "mobility" and e.key == "movers" for e in errs)


def test_unknown_key_rejected():
    errs = errors_of("[topology]\nwarp_speed = 9\n")
    assert any(e.key == "warp_speed" and "unknown" in e.message for e in errs)


def test_unknown_section_rejected():
    errs = errors_of("[wormholes]\nradius = 2\n")
    assert any(e.section == "wormholes" for e in errs)


def test_syntax_error_reports_line():
    errs = errors_of("[topology]\nterminals 10\n")
    assert any("line 2" in e.message for e in errs)


def test_bad_value_type_reported():
    errs = errors_of("[topology]\nterminals = lots\n")
    assert any(e.key == "terminals" for e in errs)


def test_all_errors_collected_at_once():
    errs = errors_of("[topology]\nterminals = lots\n"
                     "[mobility]\nmovers = 99\n[workload]\nmix_local = 0.9\n")
    assert len(errs) >= 3


def test_semantic_exceeding_raw_rejected():
    errs = errors_of("[workload]\nlocal_semantic_kb = 500.0\n"
                     "local_raw_kb = 200.0\n")
    assert any(e.key == "local_semantic_kb" for e in errs)


def test_mobility_needs_two_edges():
    errs = errors_of("[topology]\nedges = 1\n")
    assert any(e.section == "mobility" and e.key == "movers" for e in errs)


def test_round_trip_identity():
    cfg = parse_text("[simulation]\nseed = 7\nduration_s = 12.5\n"
                     "[workload]\nrate_per_terminal = 0.125\n"
                     "[p2p]\nenabled = true\n")
    assert parse_text(serialize(cfg)) == cfg


def test_round_trip_identity_of_defaults():
    cfg = ScenarioConfig()
    assert parse_text(serialize(cfg)) == cfg


def test_validate_clean_config_returns_no_errors():
    assert validate(ScenarioConfig()) == []


def test_overrides_apply_only_given_fields():
    cfg = ScenarioConfig()
    out = with_overrides(cfg, seed=123, duration=5.0)
    assert out.simulation.seed == 123
    assert out.simulation.duration_s == 5.0
    assert out.simulation.deployment == cfg.simulation.deployment
