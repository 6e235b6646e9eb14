import json
import os

from dtnetsim.cli import main

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")
DEFAULT = os.path.join(SCENARIOS, "default.cfg")


def test_run_both_writes_five_files(tmp_path, capsys):
    out = tmp_path / "results"
    code = main(["run", "--scenario", DEFAULT, "--deployment", "both",
                 "--out", str(out)])
    assert code == 0
    names = sorted(os.listdir(out))
    assert names == ["centralized.records.csv", "centralized.summary.json",
                     "comparison.json", "multilayer.records.csv",
                     "multilayer.summary.json"]
    printed = capsys.readouterr().out
    assert "comparison.json" in printed


def test_run_twice_identical_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--scenario", DEFAULT, "--deployment", "both",
                     "--out", str(out)]) == 0
    for name in os.listdir(a):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_override_changes_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--scenario", DEFAULT, "--out", str(a),
                 "--seed", "1"]) == 0
    assert main(["run", "--scenario", DEFAULT, "--out", str(b),
                 "--seed", "2"]) == 0
    assert (a / "multilayer.records.csv").read_bytes() != \
        (b / "multilayer.records.csv").read_bytes()


def test_duration_override(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--scenario", DEFAULT, "--out", str(out),
                 "--duration", "10"]) == 0
    summary = json.loads((out / "multilayer.summary.json").read_text())
    assert summary["duration_s"] == 10.0
    assert len(summary["per_second_mean_latency_s"]) == 10


def test_json_records_format(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--scenario", DEFAULT, "--out", str(out),
                 "--format", "json"]) == 0
    rows = json.loads((out / "multilayer.records.json").read_text())
    assert rows and {"demand_id", "latency_s"} <= set(rows[0])


def test_validation_error_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[workload]\nmix_local = 0.9\n")
    code = main(["run", "--scenario", str(bad)])
    assert code == 1
    assert "workload" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    code = main(["run", "--scenario", str(tmp_path / "absent.cfg")])
    assert code == 2


def test_unwritable_destination_exits_2(tmp_path):
    target = tmp_path / "blocked"
    target.write_text("a file where the out directory should go")
    code = main(["run", "--scenario", DEFAULT, "--out", str(target)])
    assert code == 2


def test_runtime_failure_flushes_partial_metrics(tmp_path, monkeypatch):
    import dtnetsim.cli as cli
    from dtnetsim.kernel import SimulationError

    class Poisoned(cli.Simulation):
        def __init__(self, cfg, mode, **kwargs):
            super().__init__(cfg, mode, **kwargs)

            def boom():
                raise SimulationError("induced mid-run failure")

            self.kernel.schedule(30.0, "Test", boom)

    monkeypatch.setattr(cli, "Simulation", Poisoned)
    out = tmp_path / "r"
    code = main(["run", "--scenario", DEFAULT, "--out", str(out)])
    assert code == 2
    summary = json.loads((out / "multilayer.summary.json").read_text())
    assert summary["failed"] is True
    assert summary["demands"]["generated"] > 0  # partial metrics, not empty


def test_calibrate_prints_fragment(capsys):
    code = main(["calibrate", "--scenario", DEFAULT,
                 "--solve-for", "fiber_prop_ms"])
    assert code == 0
    out = capsys.readouterr().out
    assert "fiber_prop_ms" in out
    assert "predicted_s" in out


def test_calibrate_infeasible_exits_3(capsys):
    code = main(["calibrate", "--scenario", DEFAULT,
                 "--centralized-band", "0.001", "0.002"])
    assert code == 3
    assert "nearest achievable" in capsys.readouterr().err


def test_calibrate_never_overwrites_input(tmp_path, capsys):
    scenario = tmp_path / "s.cfg"
    scenario.write_text("")
    before = scenario.read_text()
    code = main(["calibrate", "--scenario", str(scenario),
                 "--out", str(scenario)])
    assert code == 2
    assert scenario.read_text() == before


def test_calibrate_writes_fragment_file(tmp_path):
    frag = tmp_path / "fragment.cfg"
    code = main(["calibrate", "--scenario", DEFAULT, "--out", str(frag)])
    assert code == 0
    assert "local_compute_gflop" in frag.read_text()
