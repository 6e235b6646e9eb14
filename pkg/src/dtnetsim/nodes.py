"""The three digital-twin state machines and their compute queues.

Local DTs compress and classify demands at the terminal, edge DTs pool
digital agents and escalate overload to the cloud, and the cloud DT serves
escalated work and periodically fans out model updates.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional

from .kernel import Kernel, SimulationError
from .network import MessageKind
from .workload import Demand, DemandClass, Priority


@dataclass
class Job:
    demand: Demand
    cost_gflop: float
    priority: Priority
    enqueued_at: float
    seq: int


class ComputeQueue:
    """Single-server, non-preemptive queue; FIFO or priority discipline."""

    def __init__(self, kernel: Kernel, capacity_gflops: float,
                 discipline: str = "fifo"):
        if capacity_gflops <= 0:
            raise SimulationError("compute capacity must be > 0")
        if discipline not in ("fifo", "priority"):
            raise SimulationError(f"unknown discipline {discipline!r}")
        self.kernel = kernel
        self.capacity = capacity_gflops
        self.discipline = discipline
        self.pending: List[Job] = []
        self.current: Optional[Job] = None
        self.busy_until = 0.0
        self.on_job_done = lambda job: None
        self.admitted = 0
        self.served = 0
        self._seq = 0

    def service_time(self, cost_gflop: float) -> float:
        return cost_gflop / self.capacity

    def submit(self, demand: Demand, cost_gflop: float,
               priority: Priority) -> int:
        """Admit a job; returns its position (0 = entered service now)."""
        self._seq += 1
        job = Job(demand, cost_gflop, priority, self.kernel.now(), self._seq)
        self.admitted += 1
        if self.current is None:
            self._start(job)
            return 0
        # insertion keeps pending ordered by the discipline key; the
        # running job is never displaced
        key = self._sort_key(job)
        pos = 0
        while pos < len(self.pending) and \
                self._sort_key(self.pending[pos]) <= key:
            pos += 1
        self.pending.insert(pos, job)
        return pos + 1

    def _sort_key(self, job: Job):
        if self.discipline == "priority":
            return (job.priority.value, job.enqueued_at, job.seq)
        return (job.enqueued_at, job.seq)

    def _start(self, job: Job) -> None:
        t = self.kernel.now()
        job.demand.queue_wait += t - job.enqueued_at
        service = self.service_time(job.cost_gflop)
        job.demand.compute += service
        self.current = job
        self.busy_until = t + service
        self.kernel.schedule(self.busy_until, "ComputeDone",
                             lambda j=job: self._done(j))

    def _done(self, job: Job) -> None:
        if self.current is not job:
            raise SimulationError("compute completion for a job not in service")
        self.current = None
        self.served += 1
        if self.pending:
            self._start(self.pending.pop(0))
        self.on_job_done(job)

    def estimated_wait(self) -> float:
        """Queued work plus residual service, in seconds at this capacity."""
        t = self.kernel.now()
        residual = max(0.0, self.busy_until - t) if self.current else 0.0
        return residual + sum(j.cost_gflop for j in self.pending) / self.capacity

    def queue_length(self) -> int:
        return len(self.pending) + (1 if self.current else 0)


def anomaly_check(window, value: float, z: float = 3.0) -> bool:
    """Sliding-window z-score rule: flag iff |value - mean| > z * population sd.

    A zero-variance window flags any value different from the mean. Windows
    with fewer than two observations never flag.
    """
    n = len(window)
    if n < 2:
        return False
    mean = sum(window) / n
    var = sum((x - mean) ** 2 for x in window) / n
    if var == 0.0:
        return value != mean
    return abs(value - mean) > z * math.sqrt(var)


@dataclass
class DigitalAgent:
    """Edge-resident representative of a terminal; lives in exactly one pool."""
    terminal: int
    state_size: int
    location: Optional[int] = None  # edge id, or None while migrating
    migrating_to: Optional[int] = None


class LocalDT:
    """Terminal-side twin: classification, compression, priority scheduling."""

    def __init__(self, sim, terminal: int):
        self.sim = sim
        self.terminal = terminal
        self.cpu = ComputeQueue(sim.kernel, sim.cfg.compute.terminal_gflops,
                                discipline="priority")
        self.cpu.on_job_done = self._cpu_done
        # outbound demand messages held back while the terminal is in handover
        self.held_back: List[object] = []

    def handle(self, demand: Demand) -> str:
        """Dispatch one freshly generated demand; returns the action taken."""
        sim = self.sim
        edge = sim.net.assoc.edge_of(self.terminal)
        if demand.dclass is DemandClass.LOCAL:
            self.cpu.submit(demand, demand.spec.compute_gflop, demand.spec.priority)
            if edge is not None:
                sim.emit_status_summary(self.terminal, edge, demand)
            return "serve-locally"
        if edge is None:
            if sim.net.p2p_enabled:
                neighbor = sim.nearest_associated_neighbor(self.terminal)
                if neighbor is not None:
                    sim.forward_p2p(demand, self.terminal, neighbor)
                    return "p2p-forward"
            sim.fail_demand(demand, "no-route")
            return "failed"
        # compress raw -> semantic at the source; raw bytes never leave the terminal
        payload = sim.make_data(MessageKind.DEMAND_DATA, self.terminal, edge,
                                demand.spec.semantic_bytes, demand)
        packet = sim.signaling.demand_packet_msg(sim, self.terminal, edge, demand)
        if sim.net.assoc.in_handover(self.terminal):
            self.buffer_outbound(payload)
            self.buffer_outbound(packet)
        else:
            sim.net.transmit(payload)
            sim.net.transmit(packet)
        sim.emit_status_summary(self.terminal, edge, demand)
        return "send-up"

    def buffer_outbound(self, msg) -> None:
        msg._buffered_at = self.sim.kernel.now()
        self.held_back.append(msg)

    def flush_buffer(self) -> None:
        """Release held-back messages in FIFO order after handover completion."""
        now = self.sim.kernel.now()
        for msg in self.held_back:
            if msg.track is not None:
                msg.track.buffering += now - msg._buffered_at
                msg.track.handover_affected = True
            # destination edge changed during the handover; re-resolve
            msg.dst = self.sim.net.assoc.edge_of(self.terminal)
            self.sim.net.transmit(msg)
        self.held_back.clear()

    def _cpu_done(self, job: Job) -> None:
        sim = self.sim
        demand = job.demand
        sim.complete_demand(demand, "local")
        edge = sim.net.assoc.edge_of(self.terminal)
        if edge is not None:
            sim.signaling.emit_result_report(sim, self.terminal, edge, demand)


class EdgeDT:
    """Regional twin: agent pool, aggregation, anomaly detection, escalation."""

    def __init__(self, sim, edge_id: int):
        self.sim = sim
        self.id = edge_id
        self.cpu = ComputeQueue(sim.kernel, sim.cfg.compute.edge_gflops,
                                discipline="priority")
        self.cpu.on_job_done = self._cpu_done
        self.pool: Dict[int, DigitalAgent] = {}
        self.windows: Dict[int, Deque[float]] = {}
        self.aggregated_bytes = 0

    # ---- agent pooling ----

    def admit(self, agent: DigitalAgent) -> None:
        if agent.location is not None:
            raise SimulationError(
                f"agent {agent.terminal} admitted while already in pool {agent.location}")
        if agent.terminal in self.pool:
            raise SimulationError(f"agent {agent.terminal} already in pool {self.id}")
        self.pool[agent.terminal] = agent
        agent.location = self.id
        agent.migrating_to = None
        self.sim.signaling.emit_pool_notice(self.sim, self.id, "admit", agent.terminal)

    def evict(self, agent: DigitalAgent) -> DigitalAgent:
        if self.pool.get(agent.terminal) is not agent:
            raise SimulationError(f"agent {agent.terminal} not in pool {self.id}")
        del self.pool[agent.terminal]
        agent.location = None
        self.sim.signaling.emit_pool_notice(self.sim, self.id, "evict", agent.terminal)
        return agent

    # ---- demand serving ----

    def receive_demand(self, demand: Demand) -> str:
        sim = self.sim
        agent = sim.agents[demand.origin]
        if not demand.p2p_forwarded:  # forwarded demands ride the neighbor's agent
            if agent.location is not None and agent.location != self.id:
                # terminal moved while the payload was in flight; relay onward
                relay = sim.make_data(MessageKind.DEMAND_DATA, self.id,
                                      agent.location,
                                      demand.spec.semantic_bytes, demand)
                sim.net.transmit(relay)
                return "relay"
            if agent.location is None and agent.migrating_to is None:
                sim.fail_demand(demand, "orphaned")
                return "failed"
        if demand.dclass is DemandClass.CLOUD:
            self._forward_to_cloud(demand)
            return "escalate"
        if self.cpu.estimated_wait() > sim.cfg.edge.escalation_wait_s:
            self._forward_to_cloud(demand)
            return "escalate"
        self.cpu.submit(demand, demand.spec.compute_gflop, demand.spec.priority)
        return "serve-here"

    def _forward_to_cloud(self, demand: Demand) -> None:
        sim = self.sim
        payload = sim.make_data(MessageKind.DEMAND_DATA, self.id, sim.net.cloud,
                                demand.spec.semantic_bytes, demand)
        sim.net.transmit(payload)
        sim.signaling.emit_cloud_relay(sim, self.id, sim.net.cloud, demand)

    def _cpu_done(self, job: Job) -> None:
        sim = self.sim
        demand = job.demand
        home = demand.p2p_via if demand.p2p_via is not None else demand.origin
        result = sim.make_data(MessageKind.RESULT_DATA, self.id, home,
                               demand.spec.result_bytes, demand)
        result._serving_layer = "edge"
        sim.net.transmit(result)
        if not demand.p2p_forwarded:
            sim.signaling.emit_result_report(sim, self.id, demand.origin, demand)

    # ---- data module ----

    def receive_status(self, terminal: int, value: float, size: int) -> None:
        sim = self.sim
        window = self.windows.setdefault(
            terminal, deque(maxlen=sim.cfg.edge.anomaly_window))
        if anomaly_check(window, value):
            sim.signaling.emit_anomaly_flag(sim, self.id, terminal)
        window.append(value)
        self.aggregated_bytes += size
        forward = int(size * sim.cfg.edge.forward_fraction)
        if forward > 0:
            sim.signaling.emit_data_forward(sim, self.id, forward)

    def relay_model_update(self, size: int) -> None:
        for terminal in sorted(self.pool):
            self.sim.emit_model_update(self.id, terminal, size)


class CloudDT:
    """Global twin: escalated serving, state digest, model-update fan-out."""

    def __init__(self, sim):
        self.sim = sim
        self.cpu = ComputeQueue(sim.kernel, sim.cfg.compute.cloud_gflops,
                                discipline="fifo")
        self.cpu.on_job_done = self._cpu_done
        self.pool_digest: Dict[int, int] = {}  # edge id -> pooled agent count

    def receive_demand(self, demand: Demand, cost_gflop: float) -> None:
        self.cpu.submit(demand, cost_gflop, demand.spec.priority)

    def _cpu_done(self, job: Job) -> None:
        sim = self.sim
        demand = job.demand
        home = demand.p2p_via if demand.p2p_via is not None else demand.origin
        result = sim.make_data(MessageKind.RESULT_DATA, sim.net.cloud, home,
                               demand.spec.result_bytes, demand)
        result._serving_layer = "cloud"
        sim.net.transmit(result)
        if sim.multilayer and not demand.p2p_forwarded:
            edge = sim.net.assoc.edge_of(demand.origin)
            if edge is not None:
                sim.signaling.emit_cloud_relay(sim, sim.net.cloud, edge, demand)
            sim.signaling.emit_result_report(sim, sim.net.cloud, demand.origin,
                                             demand)

    def on_pool_notice(self, edge: int, action: str) -> None:
        count = self.pool_digest.get(edge, 0)
        self.pool_digest[edge] = count + (1 if action == "admit" else -1)

    def model_update_tick(self) -> None:
        sim = self.sim
        size = sim.cfg.model_update.size_bytes
        for edge in sim.net.edges:
            sim.emit_model_update(sim.net.cloud, edge, size)
        period = sim.cfg.model_update.period_s
        sim.kernel.schedule(sim.kernel.now() + period, "ModelUpdateTick",
                            self.model_update_tick)
