"""Run orchestration: builds one isolated simulation per (scenario, mode).

A Simulation owns its kernel, network, DT state machines, mobility controller
and metrics ledger; two runs of the same seed share nothing and produce
byte-identical outputs. Demand generation draws only depend on the workload
substream, so centralized and multi-layer runs of one seed see the same
arrival sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

from .deployment import DeploymentMode, decide
from .kernel import Kernel, SimulationError
from .metrics import (MetricsLedger, SignalingTable, build_summary,
                      comparison_report)
from .mobility import MobilityController
from .network import Message, MessageKind, Network, NodeKind, RoutingError
from .nodes import CloudDT, DigitalAgent, EdgeDT, LocalDT
from .scenario import ScenarioConfig
from .workload import (Demand, DemandClass, DemandFactory, LAYER_ORDER,
                       WorkloadConfig)

_LAYER_RANK = {"local": 0, "edge": 1, "cloud": 2}


@dataclass
class RunResult:
    mode: str
    config: ScenarioConfig
    ledger: MetricsLedger
    summary: Dict
    trace_digest: str
    sim: "Simulation"


class Simulation:
    """One deployment mode of one scenario, executed strictly sequentially."""

    def __init__(self, cfg: ScenarioConfig, mode: str, auto_workload: bool = True):
        if mode not in ("centralized", "multilayer"):
            raise SimulationError(f"unknown deployment mode {mode!r}")
        self.cfg = cfg
        self.mode = mode
        self.deployment = DeploymentMode(mode)
        self.kernel = Kernel(cfg.simulation.seed)
        self.kernel.post_dispatch = self._invariant_sweep
        topo = cfg.topology
        self.net = Network(
            self.kernel, topo.terminals, topo.edges, topo.uplink_bps,
            topo.downlink_bps, topo.fiber_bps, topo.wireless_prop_s,
            topo.fiber_prop_s, p2p_enabled=cfg.p2p.enabled,
            p2p_bps=cfg.p2p.bandwidth_mbps * 1e6)
        self.net.on_deliver = self._on_deliver
        self.ledger = MetricsLedger(mode, cfg.simulation.seed,
                                    cfg.simulation.duration_s)
        self.signaling = SignalingTable(cfg.signaling)
        self.workload: WorkloadConfig = cfg.workload.to_workload()
        self.factory = DemandFactory(self.workload, self.kernel.rng.workload)
        self.demands_by_id: Dict[int, Demand] = {}
        self.sweeps = 0

        self.cloud_dt = CloudDT(self)
        self.local_dts: Dict[int, LocalDT] = {}
        self.edge_dts: Dict[int, EdgeDT] = {}
        self.agents: Dict[int, DigitalAgent] = {}
        if self.multilayer:
            self.edge_dts = {e: EdgeDT(self, e) for e in self.net.edges}
            self.local_dts = {t: LocalDT(self, t) for t in self.net.terminals}
            state_size = cfg.handover.agent_state_bytes
            for t in self.net.terminals:
                agent = DigitalAgent(terminal=t, state_size=state_size)
                self.agents[t] = agent
                self.edge_dts[self.net.assoc.edge_of(t)].admit(agent)

        self.mobility = MobilityController(self)
        self.mobility.schedule_first()
        if self.multilayer and cfg.model_update.period_s > 0:
            self.kernel.schedule(cfg.model_update.period_s, "ModelUpdateTick",
                                 self.cloud_dt.model_update_tick)
        if auto_workload:
            for t in self.net.terminals:
                self._schedule_arrival(t)

    # ---- mode helpers ----

    @property
    def multilayer(self) -> bool:
        return self.mode == "multilayer"

    @property
    def centralized(self) -> bool:
        return self.mode == "centralized"

    # ---- workload ----

    def _schedule_arrival(self, terminal: int) -> None:
        gap = self.factory.next_gap()
        self.kernel.schedule(self.kernel.now() + gap, "DemandGenerated",
                             lambda t=terminal: self._arrival(t))

    def _arrival(self, terminal: int) -> None:
        demand = self.factory.new_demand(terminal, self.kernel.now())
        self._dispatch(demand)
        self._schedule_arrival(terminal)

    def inject_demand(self, terminal: int, dclass: DemandClass) -> Demand:
        """Create one demand outside the Poisson process (test/oracle harness)."""
        demand = Demand(id=len(self.demands_by_id), origin=terminal,
                        dclass=dclass, spec=self.workload.specs[dclass],
                        t_created=self.kernel.now())
        self._dispatch(demand)
        return demand

    def _dispatch(self, demand: Demand) -> None:
        self.ledger.add_demand(demand)
        self.demands_by_id[demand.id] = demand
        decision = decide(demand, self.deployment)
        if self.centralized:
            # raw payload straight to the cloud; relays stay passive
            payload = self.make_data(MessageKind.DEMAND_DATA, demand.origin,
                                     self.net.cloud, demand.spec.raw_bytes,
                                     demand)
            try:
                self.net.transmit(payload)
            except RoutingError as exc:
                self.fail_demand(demand, f"no-route: {exc}")
                return
            self.signaling.emit_centralized_bundle(self, demand.origin, demand)
            return
        assert decision.initial_layer in ("local", "edge", "cloud")
        self.local_dts[demand.origin].handle(demand)

    # ---- message helpers ----

    def make_data(self, kind: MessageKind, src: int, dst: int, size: int,
                  demand: Demand) -> Message:
        msg = self.net.new_message(kind, src, dst, size, demand_ref=demand.id,
                                   track=demand)
        self.ledger.add_bytes("data_plane", size)
        return msg

    def emit_status_summary(self, terminal: int, edge: int,
                            demand: Demand) -> None:
        self.signaling.emit_status_summary(self, terminal, edge, demand)

    def emit_model_update(self, src: int, dst: int, size: int) -> None:
        msg = self.net.new_message(MessageKind.MODEL_UPDATE, src, dst, size)
        self.ledger.add_bytes("model_update", size)
        self.net.transmit(msg)

    def nearest_associated_neighbor(self, terminal: int) -> Optional[int]:
        for t in self.net.terminals:
            if t != terminal and self.net.assoc.edge_of(t) is not None:
                return t
        return None

    def forward_p2p(self, demand: Demand, src: int, neighbor: int) -> None:
        demand.signaling_incomplete = True
        demand.p2p_forwarded = True
        demand.p2p_via = neighbor
        payload = self.make_data(MessageKind.DEMAND_DATA, src, neighbor,
                                 demand.spec.semantic_bytes, demand)
        self.net.transmit(payload)

    # ---- demand lifecycle ----

    def fail_demand(self, demand: Demand, reason: str) -> None:
        demand.fail(reason)

    def complete_demand(self, demand: Demand, layer: str) -> None:
        demand.complete(self.kernel.now(), layer)
        if self.centralized and layer != "cloud":
            raise SimulationError(
                f"centralized demand {demand.id} served at {layer}")
        if self.multilayer:
            if _LAYER_RANK[layer] < LAYER_ORDER[demand.dclass]:
                raise SimulationError(
                    f"demand {demand.id} served below its class layer")

    # ---- delivery dispatch ----

    def _on_deliver(self, msg: Message) -> None:
        kind = msg.kind
        dst_kind = self.net.kind(msg.dst)
        if kind is MessageKind.DEMAND_DATA:
            demand = self.demands_by_id[msg.demand_ref]
            if demand.status != "pending":
                return
            if dst_kind is NodeKind.CLOUD:
                cost = (self.cfg.compute.centralized_cost_gflop
                        if self.centralized else demand.spec.compute_gflop)
                self.cloud_dt.receive_demand(demand, cost)
            elif dst_kind is NodeKind.EDGE:
                self.edge_dts[msg.dst].receive_demand(demand)
            else:
                self._receive_p2p(msg.dst, demand)
        elif kind is MessageKind.RESULT_DATA:
            demand = self.demands_by_id[msg.demand_ref]
            if demand.status != "pending":
                return
            if msg.dst != demand.origin:
                # p2p return leg: the neighbor relays the result home
                relay = self.make_data(MessageKind.RESULT_DATA, msg.dst,
                                       demand.origin, msg.size, demand)
                relay._serving_layer = msg._serving_layer
                self.net.transmit(relay)
                return
            self.complete_demand(demand, msg._serving_layer)
        elif kind is MessageKind.STATUS_SUMMARY:
            if dst_kind is NodeKind.EDGE and msg.dst in self.edge_dts:
                self.edge_dts[msg.dst].receive_status(
                    msg.src, msg._status_value, msg.size)
        elif kind is MessageKind.HANDOVER_NOTICE:
            action = getattr(msg, "_pool_action", None)
            if action is not None:
                self.cloud_dt.on_pool_notice(msg.src, action)
            else:
                self.mobility.on_notice(msg)
        elif kind is MessageKind.AGENT_MIGRATION:
            self.mobility.on_migration(msg)
        elif kind is MessageKind.MODEL_UPDATE:
            if dst_kind is NodeKind.EDGE and msg.dst in self.edge_dts:
                self.edge_dts[msg.dst].relay_model_update(msg.size)
        # DemandPacket / Feedback / DataForward / AnomalyFlag are bookkeeping

    def _receive_p2p(self, terminal: int, demand: Demand) -> None:
        """Neighbor terminal forwards an orphan demand up its own edge path."""
        edge = self.net.assoc.edge_of(terminal)
        if edge is None:
            self.fail_demand(demand, "no-route")
            return
        payload = self.make_data(MessageKind.DEMAND_DATA, terminal, edge,
                                 demand.spec.semantic_bytes, demand)
        self.net.transmit(payload)

    # ---- invariants ----

    def _invariant_sweep(self) -> None:
        """Exactly-one-pool check for every agent, after every event."""
        self.sweeps += 1
        for ldt in self.local_dts.values():
            if ldt.held_back and not self.net.assoc.in_handover(ldt.terminal):
                raise SimulationError(
                    f"terminal {ldt.terminal} holds buffered messages outside "
                    f"a handover window")
        for agent in self.agents.values():
            memberships = [e for e, dt in self.edge_dts.items()
                           if dt.pool.get(agent.terminal) is agent]
            if agent.location is None:
                if memberships:
                    raise SimulationError(
                        f"agent {agent.terminal} migrating but pooled at "
                        f"{memberships}")
                if agent.migrating_to is None:
                    raise SimulationError(
                        f"agent {agent.terminal} in no pool and not migrating")
            else:
                if memberships != [agent.location]:
                    raise SimulationError(
                        f"agent {agent.terminal} location {agent.location} "
                        f"but pooled at {memberships}")
                if not self.net.assoc.in_handover(agent.terminal):
                    assoc = self.net.assoc.edge_of(agent.terminal)
                    if assoc != agent.location:
                        raise SimulationError(
                            f"agent {agent.terminal} pool {agent.location} "
                            f"does not mirror association {assoc}")

    # ---- run ----

    def run(self, duration_s: Optional[float] = None) -> RunResult:
        duration = (self.cfg.simulation.duration_s
                    if duration_s is None else duration_s)
        try:
            self.kernel.run_until(duration)
        except Exception:
            self.ledger.failed_marker = True
            raise
        finally:
            self._result = self._finalize()
        return self._result

    def _finalize(self) -> RunResult:
        wasted = sum(link.bytes_wasted for link in self.net.all_links())
        if not self.ledger.failed_marker:
            self._check_conservation()
        summary = build_summary(self.ledger, wasted)
        return RunResult(mode=self.mode, config=self.cfg, ledger=self.ledger,
                         summary=summary, trace_digest=self.kernel.trace_digest(),
                         sim=self)

    def _check_conservation(self) -> None:
        for d in self.ledger.records():
            parts = d.queue_wait + d.transmission + d.compute + d.buffering
            if abs(d.latency - parts) > 1e-9:
                raise SimulationError(
                    f"demand {d.id}: breakdown {parts} != latency {d.latency}")
            if not d.signaling_incomplete:
                expected = self.signaling.budget(self.mode, d.serving_layer)
                if d.signaling_bytes != expected:
                    raise SimulationError(
                        f"demand {d.id}: signaling {d.signaling_bytes} != "
                        f"budget {expected} for {d.serving_layer}")
        for msg in self.net.messages:
            if msg.state == "delivered" and msg.delivered_at is None:
                raise SimulationError(f"message {msg.id} delivered without time")


def run_scenario(cfg: ScenarioConfig, mode: Optional[str] = None) -> RunResult:
    sim = Simulation(cfg, mode or cfg.simulation.deployment)
    return sim.run()


def run_comparison(cfg: ScenarioConfig):
    """Run both modes with identical seeds; returns (centralized, multilayer, report)."""
    cent = run_scenario(cfg, "centralized")
    multi = run_scenario(cfg, "multilayer")
    report = comparison_report(cent.summary, multi.summary)
    return cent, multi, report


def single_demand_latency(cfg: ScenarioConfig, dclass: DemandClass,
                          mode: str) -> float:
    """Zero-load single-demand run; the engine side of the oracle cross-check."""
    from dataclasses import replace
    quiet = replace(cfg,
                    mobility=replace(cfg.mobility, movers=0),
                    model_update=replace(cfg.model_update, period_s=0.0))
    sim = Simulation(quiet, mode, auto_workload=False)
    demand = sim.inject_demand(sim.net.terminals[0], dclass)
    horizon = 60.0
    while demand.status == "pending" and horizon < 1e5:
        sim.kernel.run_until(horizon)
        horizon *= 4
    if demand.status != "completed":
        raise SimulationError(f"single demand did not complete: {demand.status}")
    return demand.latency
