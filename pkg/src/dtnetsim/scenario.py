"""Scenario files: sectioned key-value grammar, validation, canonical form.

Grammar: `[section]` headers, `key = value` pairs, `#` comments (full line or
trailing). Unknown sections or keys are rejected. An empty file resolves to
the case-study defaults: 10 terminals, 2 edges, one cloud, 1/20/500 GFLOPS,
50/200 Mbps wireless, 1 Gbps fiber, 5 movers switching every second.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional

from .workload import ClassSpec, DemandClass, Priority, WorkloadConfig


@dataclass(frozen=True)
class ValidationError:
    section: str
    key: str
    message: str

    def __str__(self) -> str:
        return f"[{self.section}] {self.key}: {self.message}"


class ScenarioError(ValueError):
    """Carries the complete list of validation errors for one file."""

    def __init__(self, errors: List[ValidationError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


@dataclass(frozen=True)
class SimulationCfg:
    duration_s: float = 60.0
    seed: int = 42
    deployment: str = "multilayer"  # centralized | multilayer


@dataclass(frozen=True)
class TopologyCfg:
    terminals: int = 10
    edges: int = 2
    wireless_uplink_mbps: float = 50.0
    wireless_downlink_mbps: float = 200.0
    fiber_gbps: float = 1.0
    wireless_prop_ms: float = 1.0
    fiber_prop_ms: float = 5.0

    @property
    def uplink_bps(self) -> float:
        return self.wireless_uplink_mbps * 1e6

    @property
    def downlink_bps(self) -> float:
        return self.wireless_downlink_mbps * 1e6

    @property
    def fiber_bps(self) -> float:
        return self.fiber_gbps * 1e9

    @property
    def wireless_prop_s(self) -> float:
        return self.wireless_prop_ms / 1000.0

    @property
    def fiber_prop_s(self) -> float:
        return self.fiber_prop_ms / 1000.0


@dataclass(frozen=True)
class ComputeCfg:
    terminal_gflops: float = 1.0
    edge_gflops: float = 20.0
    cloud_gflops: float = 500.0
    centralized_cost_gflop: float = 60.0


@dataclass(frozen=True)
class WorkloadCfg:
    rate_per_terminal: float = 0.5
    mix_local: float = 0.5
    mix_edge: float = 0.3
    mix_cloud: float = 0.2
    local_compute_gflop: float = 0.1
    local_raw_kb: float = 200.0
    local_semantic_kb: float = 20.0
    local_result_kb: float = 5.0
    local_priority: str = "high"
    edge_compute_gflop: float = 4.0
    edge_raw_kb: float = 4000.0
    edge_semantic_kb: float = 800.0
    edge_result_kb: float = 200.0
    edge_priority: str = "normal"
    cloud_compute_gflop: float = 30.0
    cloud_raw_kb: float = 4000.0
    cloud_semantic_kb: float = 800.0
    cloud_result_kb: float = 200.0
    cloud_priority: str = "low"

    def to_workload(self) -> WorkloadConfig:
        def spec(prefix: str) -> ClassSpec:
            get = lambda name: getattr(self, f"{prefix}_{name}")
            return ClassSpec(
                compute_gflop=get("compute_gflop"),
                raw_bytes=int(get("raw_kb") * 1000),
                semantic_bytes=int(get("semantic_kb") * 1000),
                result_bytes=int(get("result_kb") * 1000),
                priority=Priority[get("priority").upper()],
            )

        return WorkloadConfig(
            rate_per_terminal=self.rate_per_terminal,
            mix={DemandClass.LOCAL: self.mix_local,
                 DemandClass.EDGE: self.mix_edge,
                 DemandClass.CLOUD: self.mix_cloud},
            specs={DemandClass.LOCAL: spec("local"),
                   DemandClass.EDGE: spec("edge"),
                   DemandClass.CLOUD: spec("cloud")},
        )


@dataclass(frozen=True)
class MobilityCfg:
    switch_period_s: float = 1.0
    movers: int = 5
    selection: str = "resample-each-period"  # or fixed-set


@dataclass(frozen=True)
class HandoverCfg:
    agent_state_kb: float = 50.0

    @property
    def agent_state_bytes(self) -> int:
        return int(self.agent_state_kb * 1000)


@dataclass(frozen=True)
class EdgeCfg:
    escalation_wait_s: float = 0.5
    anomaly_window: int = 32
    forward_fraction: float = 0.1


@dataclass(frozen=True)
class ModelUpdateCfg:
    period_s: float = 10.0
    size_kb: float = 100.0

    @property
    def size_bytes(self) -> int:
        return int(self.size_kb * 1000)


@dataclass(frozen=True)
class SignalingCfg:
    header_bytes: int = 250
    status_summary_bytes: int = 2000
    result_report_bytes: int = 1000
    demand_packet_bytes: int = 750
    cloud_relay_bytes: int = 750
    centralized_total_bytes: int = 15000
    pool_notice_bytes: int = 250
    handover_notice_bytes: int = 250
    anomaly_flag_bytes: int = 250


@dataclass(frozen=True)
class P2PCfg:
    enabled: bool = False
    bandwidth_mbps: float = 50.0


@dataclass(frozen=True)
class ScenarioConfig:
    simulation: SimulationCfg = field(default_factory=SimulationCfg)
    topology: TopologyCfg = field(default_factory=TopologyCfg)
    compute: ComputeCfg = field(default_factory=ComputeCfg)
    workload: WorkloadCfg = field(default_factory=WorkloadCfg)
    mobility: MobilityCfg = field(default_factory=MobilityCfg)
    handover: HandoverCfg = field(default_factory=HandoverCfg)
    edge: EdgeCfg = field(default_factory=EdgeCfg)
    model_update: ModelUpdateCfg = field(default_factory=ModelUpdateCfg)
    signaling: SignalingCfg = field(default_factory=SignalingCfg)
    p2p: P2PCfg = field(default_factory=P2PCfg)


_SECTIONS = {
    "simulation": SimulationCfg,
    "topology": TopologyCfg,
    "compute": ComputeCfg,
    "workload": WorkloadCfg,
    "mobility": MobilityCfg,
    "handover": HandoverCfg,
    "edge": EdgeCfg,
    "model_update": ModelUpdateCfg,
    "signaling": SignalingCfg,
    "p2p": P2PCfg,
}

_PRIORITIES = ("high", "normal", "low")
_DEPLOYMENTS = ("centralized", "multilayer")
_SELECTIONS = ("fixed-set", "resample-each-period")


def _parse_value(raw: str, target_type: type, section: str, key: str,
                 errors: List[ValidationError]):
    raw = raw.strip()
    try:
        if target_type is bool:
            if raw.lower() in ("true", "yes", "on", "1"):
                return True
            if raw.lower() in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        errors.append(ValidationError(section, key, str(exc)))
        return None


def parse_text(text: str) -> ScenarioConfig:
    """Parse scenario text; raises ScenarioError with the full error list."""
    errors: List[ValidationError] = []
    values: Dict[str, Dict[str, object]] = {}
    section: Optional[str] = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SECTIONS:
                errors.append(ValidationError(section, "-",
                                              f"unknown section (line {lineno})"))
                section = None
            continue
        if "=" not in stripped:
            errors.append(ValidationError(section or "-", "-",
                                          f"expected 'key = value' at line {lineno}"))
            continue
        if section is None:
            errors.append(ValidationError("-", "-",
                                          f"key outside any section at line {lineno}"))
            continue
        key, raw = (part.strip() for part in stripped.split("=", 1))
        cls = _SECTIONS[section]
        field_types = {f.name: f.type for f in fields(cls)}
        if key not in field_types:
            errors.append(ValidationError(section, key, "unknown key"))
            continue
        ftype = {"int": int, "float": float, "str": str, "bool": bool}[field_types[key]]
        parsed = _parse_value(raw, ftype, section, key, errors)
        if parsed is not None:
            values.setdefault(section, {})[key] = parsed

    config = ScenarioConfig(**{
        name: cls(**values.get(name, {})) for name, cls in _SECTIONS.items()
    })
    errors.extend(validate(config))
    if errors:
        raise ScenarioError(errors)
    return config


def parse_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_text(fh.read())


def validate(cfg: ScenarioConfig) -> List[ValidationError]:
    errs: List[ValidationError] = []

    def check(ok: bool, section: str, key: str, msg: str) -> None:
        if not ok:
            errs.append(ValidationError(section, key, msg))

    sim, topo, comp, wl = cfg.simulation, cfg.topology, cfg.compute, cfg.workload
    check(sim.duration_s > 0, "simulation", "duration_s", "must be > 0")
    check(sim.seed >= 0, "simulation", "seed", "must be >= 0")
    check(sim.deployment in _DEPLOYMENTS, "simulation", "deployment",
          f"must be one of {_DEPLOYMENTS}")
    check(topo.terminals >= 1, "topology", "terminals", "must be >= 1")
    check(topo.edges >= 1, "topology", "edges", "must be >= 1")
    check(topo.wireless_uplink_mbps > 0, "topology", "wireless_uplink_mbps",
          "must be > 0")
    check(topo.wireless_downlink_mbps > 0, "topology", "wireless_downlink_mbps",
          "must be > 0")
    check(topo.fiber_gbps > 0, "topology", "fiber_gbps", "must be > 0")
    check(topo.wireless_prop_ms >= 0, "topology", "wireless_prop_ms", "must be >= 0")
    check(topo.fiber_prop_ms >= 0, "topology", "fiber_prop_ms", "must be >= 0")
    for key in ("terminal_gflops", "edge_gflops", "cloud_gflops"):
        check(getattr(comp, key) > 0, "compute", key, "must be > 0")
    check(comp.centralized_cost_gflop >= 0, "compute", "centralized_cost_gflop",
          "must be >= 0")
    check(wl.rate_per_terminal > 0, "workload", "rate_per_terminal", "must be > 0")
    mix_sum = wl.mix_local + wl.mix_edge + wl.mix_cloud
    check(abs(mix_sum - 1.0) <= 1e-9, "workload", "mix_local",
          f"class mix must sum to 1 (got {mix_sum})")
    for frac_key in ("mix_local", "mix_edge", "mix_cloud"):
        frac = getattr(wl, frac_key)
        check(0.0 <= frac <= 1.0, "workload", frac_key, "must be in [0, 1]")
    for prefix in ("local", "edge", "cloud"):
        check(getattr(wl, f"{prefix}_compute_gflop") >= 0, "workload",
              f"{prefix}_compute_gflop", "must be >= 0")
        for size_key in ("raw_kb", "semantic_kb", "result_kb"):
            check(getattr(wl, f"{prefix}_{size_key}") >= 0, "workload",
                  f"{prefix}_{size_key}", "must be >= 0")
        check(getattr(wl, f"{prefix}_semantic_kb") <= getattr(wl, f"{prefix}_raw_kb"),
              "workload", f"{prefix}_semantic_kb",
              "semantic size may not exceed raw size")
        check(getattr(wl, f"{prefix}_priority") in _PRIORITIES, "workload",
              f"{prefix}_priority", f"must be one of {_PRIORITIES}")
    mob = cfg.mobility
    check(mob.switch_period_s > 0, "mobility", "switch_period_s", "must be > 0")
    check(0 <= mob.movers <= topo.terminals, "mobility", "movers",
          f"must be between 0 and terminals ({topo.terminals})")
    check(mob.movers == 0 or topo.edges >= 2, "mobility", "movers",
          "mobility requires at least 2 edges")
    check(mob.selection in _SELECTIONS, "mobility", "selection",
          f"must be one of {_SELECTIONS}")
    check(cfg.handover.agent_state_kb >= 0, "handover", "agent_state_kb",
          "must be >= 0")
    check(cfg.edge.escalation_wait_s >= 0, "edge", "escalation_wait_s",
          "must be >= 0")
    check(cfg.edge.anomaly_window >= 2, "edge", "anomaly_window", "must be >= 2")
    check(0.0 <= cfg.edge.forward_fraction <= 1.0, "edge", "forward_fraction",
          "must be in [0, 1]")
    check(cfg.model_update.period_s >= 0, "model_update", "period_s",
          "must be >= 0")
    check(cfg.model_update.size_kb >= 0, "model_update", "size_kb", "must be >= 0")
    for f in fields(SignalingCfg):
        check(getattr(cfg.signaling, f.name) >= 0, "signaling", f.name,
              "must be >= 0")
    sig = cfg.signaling
    edge_total = (sig.status_summary_bytes + sig.result_report_bytes
                  + sig.demand_packet_bytes + 3 * sig.header_bytes)
    cloud_total = edge_total + 2 * sig.cloud_relay_bytes + 2 * sig.header_bytes
    check(cloud_total > edge_total, "signaling", "cloud_relay_bytes",
          "cloud-served signaling must exceed edge-served")
    check(cfg.p2p.bandwidth_mbps > 0, "p2p", "bandwidth_mbps", "must be > 0")
    return errs


def serialize(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    lines: List[str] = []
    for name, cls in _SECTIONS.items():
        lines.append(f"[{name}]")
        section = getattr(cfg, name)
        for f in fields(cls):
            value = getattr(section, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)


def with_overrides(cfg: ScenarioConfig, seed: Optional[int] = None,
                   duration: Optional[float] = None,
                   deployment: Optional[str] = None) -> ScenarioConfig:
    """Apply CLI-style overrides on top of a parsed config."""
    sim = cfg.simulation
    if seed is not None:
        sim = replace(sim, seed=seed)
    if duration is not None:
        sim = replace(sim, duration_s=duration)
    if deployment is not None:
        sim = replace(sim, deployment=deployment)
    return replace(cfg, simulation=sim)
