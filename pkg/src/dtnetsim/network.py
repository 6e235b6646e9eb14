"""Network of the case-study topology: nodes, directed FIFO links, routing.

Terminals talk to their associated edge over dedicated wireless channels
(separate uplink/downlink), edges reach the cloud over shared fiber, and all
transfers are store-and-forward at whole-message granularity. Decimal units
throughout: 1 KB = 1000 B, 1 Mbps = 10^6 bit/s.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, Dict, List, Optional, Tuple

from .kernel import ConfigurationError, Kernel, SimulationError


class NodeKind(Enum):
    TERMINAL = "terminal"
    EDGE = "edge"
    CLOUD = "cloud"


class MessageKind(Enum):
    DEMAND_DATA = "DemandData"
    RESULT_DATA = "ResultData"
    STATUS_SUMMARY = "StatusSummary"
    DEMAND_PACKET = "DemandPacket"
    FEEDBACK = "Feedback"
    MODEL_UPDATE = "ModelUpdate"
    HANDOVER_NOTICE = "HandoverNotice"
    AGENT_MIGRATION = "AgentMigration"
    DATA_FORWARD = "DataForward"
    ANOMALY_FLAG = "AnomalyFlag"


DATA_PLANE_KINDS = frozenset({MessageKind.DEMAND_DATA, MessageKind.RESULT_DATA})


class RoutingError(SimulationError):
    """No route exists between the requested pair."""


def transmission_time(size_bytes: float, bandwidth_bps: float) -> float:
    """Serialization delay of a whole message over one link."""
    if bandwidth_bps <= 0:
        raise ConfigurationError(f"bandwidth must be > 0, got {bandwidth_bps}")
    return size_bytes * 8.0 / bandwidth_bps


@dataclass
class Message:
    id: int
    kind: MessageKind
    src: int
    dst: int
    size: int
    created_at: float
    demand_ref: Optional[int] = None
    # demand whose latency breakdown this transfer feeds (critical-path data only)
    track: Optional[object] = None
    route: List["Link"] = field(default_factory=list)
    hop: int = 0
    state: str = "created"  # created | in_transit | delivered | aborted
    delivered_at: Optional[float] = None
    _hop_enqueued: float = 0.0

    @property
    def plane(self) -> str:
        return "data" if self.kind in DATA_PLANE_KINDS else "control"


class Link:
    """Directed link: FIFO transmit queue, one serialization at a time."""

    def __init__(self, name: str, src: int, dst: int, bandwidth_bps: float,
                 prop_s: float, kernel: Kernel, arrive_cb: Callable[[Message], None]):
        if bandwidth_bps <= 0:
            raise ConfigurationError(f"link {name}: bandwidth must be > 0")
        if prop_s < 0:
            raise ConfigurationError(f"link {name}: propagation must be >= 0")
        self.name = name
        self.src = src
        self.dst = dst
        self.bandwidth_bps = bandwidth_bps
        self.prop_s = prop_s
        self._kernel = kernel
        self._arrive_cb = arrive_cb
        self._queue: Deque[Message] = deque()
        self._current: Optional[Message] = None
        self._current_start = 0.0
        self._current_finish = 0.0
        self.bytes_delivered = 0.0
        self.bytes_wasted = 0.0
        # (message id, serialization start) in service order
        self.serving_log: List[Tuple[int, float]] = []

    def enqueue(self, msg: Message, t: float) -> None:
        msg.state = "in_transit"
        msg._hop_enqueued = t
        if self._current is None:
            self._start(msg, t)
        else:
            self._queue.append(msg)

    def busy(self) -> bool:
        return self._current is not None

    def _start(self, msg: Message, t: float) -> None:
        wait = t - msg._hop_enqueued
        if msg.track is not None:
            msg.track.queue_wait += wait
        self._current = msg
        self._current_start = t
        trans = transmission_time(msg.size, self.bandwidth_bps)
        self._current_finish = t + trans
        self.serving_log.append((msg.id, t))
        self._kernel.schedule(self._current_finish, "MessageHopDone",
                              lambda m=msg: self._serialized(m))

    def _serialized(self, msg: Message) -> None:
        if self._current is not msg or msg.state == "aborted":
            return  # transmission was aborted after this event was scheduled
        t = self._kernel.now()
        self.bytes_delivered += msg.size
        if msg.track is not None:
            msg.track.transmission += (t - self._current_start) + self.prop_s
        self._current = None
        if self._queue:
            self._start(self._queue.popleft(), t)
        # propagation does not occupy the link; arrival fires after prop_s
        self._kernel.schedule(t + self.prop_s, "MessageHopDone",
                              lambda m=msg: self._arrive_cb(m))

    def extract_queued(self, predicate, t: float) -> List[Message]:
        """Pull matching not-yet-serializing messages out of the queue."""
        kept: Deque[Message] = deque()
        pulled: List[Message] = []
        while self._queue:
            msg = self._queue.popleft()
            if predicate(msg):
                if msg.track is not None:
                    msg.track.queue_wait += t - msg._hop_enqueued
                pulled.append(msg)
            else:
                kept.append(msg)
        self._queue = kept
        return pulled

    def abort_all(self, t: float) -> List[Tuple[Message, float]]:
        """Drop the in-flight and queued messages; returns (message, wasted_bytes)."""
        dropped: List[Tuple[Message, float]] = []
        if self._current is not None:
            msg = self._current
            total = self._current_finish - self._current_start
            elapsed = t - self._current_start
            wasted = msg.size * (elapsed / total) if total > 0 else 0.0
            self.bytes_wasted += wasted
            if msg.track is not None:
                msg.track.transmission += elapsed
            msg.state = "aborted"
            dropped.append((msg, wasted))
            self._current = None
        while self._queue:
            msg = self._queue.popleft()
            if msg.track is not None:
                msg.track.queue_wait += t - msg._hop_enqueued
            msg.state = "aborted"
            dropped.append((msg, 0.0))
        return dropped


@dataclass
class HandoverMark:
    """In-handover marker: the terminal is migrating toward target_edge."""
    target_edge: int
    started_at: float


class AssociationMap:
    """Terminal -> current edge, plus optional in-handover markers."""

    def __init__(self, terminals: List[int], edges: List[int]):
        # round-robin initial association, terminals split evenly across edges
        self._assoc: Dict[int, Optional[int]] = {
            t: edges[i % len(edges)] for i, t in enumerate(terminals)
        }
        self._handover: Dict[int, HandoverMark] = {}

    def edge_of(self, terminal: int) -> Optional[int]:
        return self._assoc[terminal]

    def set_edge(self, terminal: int, edge: Optional[int]) -> None:
        self._assoc[terminal] = edge

    def mark_handover(self, terminal: int, mark: Optional[HandoverMark]) -> None:
        if mark is None:
            self._handover.pop(terminal, None)
        else:
            self._handover[terminal] = mark

    def handover_mark(self, terminal: int) -> Optional[HandoverMark]:
        return self._handover.get(terminal)

    def in_handover(self, terminal: int) -> bool:
        return terminal in self._handover

    def terminals_of(self, edge: int) -> List[int]:
        return [t for t, e in self._assoc.items() if e == edge]


class Network:
    """Node registry, link inventory, hierarchical routing and transport."""

    def __init__(self, kernel: Kernel, n_terminals: int, n_edges: int,
                 uplink_bps: float, downlink_bps: float, fiber_bps: float,
                 wireless_prop_s: float, fiber_prop_s: float,
                 p2p_enabled: bool = False, p2p_bps: float = 50e6):
        if n_edges < 1 or n_terminals < 1:
            raise ConfigurationError("topology needs >= 1 terminal and >= 1 edge")
        self.kernel = kernel
        self.terminals = list(range(n_terminals))
        self.edges = list(range(n_terminals, n_terminals + n_edges))
        self.cloud = n_terminals + n_edges
        self.assoc = AssociationMap(self.terminals, self.edges)
        self.p2p_enabled = p2p_enabled
        self._p2p_bps = p2p_bps
        self._wireless_prop = wireless_prop_s
        self.on_deliver: Callable[[Message], None] = lambda msg: None
        self._msg_seq = 0
        self.messages: List[Message] = []

        arrive = self._arrive
        self.uplink: Dict[int, Link] = {
            t: Link(f"ul:{t}", t, -1, uplink_bps, wireless_prop_s, kernel, arrive)
            for t in self.terminals
        }
        self.downlink: Dict[int, Link] = {
            t: Link(f"dl:{t}", -1, t, downlink_bps, wireless_prop_s, kernel, arrive)
            for t in self.terminals
        }
        self.fiber_up: Dict[int, Link] = {
            e: Link(f"fu:{e}", e, self.cloud, fiber_bps, fiber_prop_s, kernel, arrive)
            for e in self.edges
        }
        self.fiber_down: Dict[int, Link] = {
            e: Link(f"fd:{e}", self.cloud, e, fiber_bps, fiber_prop_s, kernel, arrive)
            for e in self.edges
        }
        self._d2d: Dict[Tuple[int, int], Link] = {}

    # ---- node helpers ----

    def kind(self, node: int) -> NodeKind:
        if node in self.uplink:
            return NodeKind.TERMINAL
        if node in self.fiber_up:
            return NodeKind.EDGE
        if node == self.cloud:
            return NodeKind.CLOUD
        raise ConfigurationError(f"unknown node id {node}")

    def all_links(self) -> List[Link]:
        return (list(self.uplink.values()) + list(self.downlink.values())
                + list(self.fiber_up.values()) + list(self.fiber_down.values())
                + list(self._d2d.values()))

    def _d2d_link(self, a: int, b: int) -> Link:
        key = (a, b)
        if key not in self._d2d:
            self._d2d[key] = Link(f"d2d:{a}-{b}", a, b, self._p2p_bps,
                                  self._wireless_prop, self.kernel, self._arrive)
        return self._d2d[key]

    # ---- routing ----

    def route(self, src: int, dst: int) -> List[Link]:
        """Hierarchical route: terminal <-> edge <-> cloud; edge-to-edge via cloud."""
        if src == dst:
            raise RoutingError(f"route requires src != dst, got {src}")
        ks, kd = self.kind(src), self.kind(dst)
        if ks is NodeKind.TERMINAL:
            if kd is NodeKind.TERMINAL:
                return self._route_t2t(src, dst)
            e = self.assoc.edge_of(src)
            if e is None:
                raise RoutingError(f"terminal {src} has no edge association")
            if kd is NodeKind.EDGE:
                if dst == e:
                    return [self.uplink[src]]
                return [self.uplink[src], self.fiber_up[e], self.fiber_down[dst]]
            return [self.uplink[src], self.fiber_up[e]]
        if ks is NodeKind.EDGE:
            if kd is NodeKind.CLOUD:
                return [self.fiber_up[src]]
            if kd is NodeKind.EDGE:
                return [self.fiber_up[src], self.fiber_down[dst]]
            e = self.assoc.edge_of(dst)
            if e is None:
                raise RoutingError(f"terminal {dst} has no edge association")
            if e == src:
                return [self.downlink[dst]]
            return [self.fiber_up[src], self.fiber_down[e], self.downlink[dst]]
        # cloud source
        if kd is NodeKind.EDGE:
            return [self.fiber_down[dst]]
        if kd is NodeKind.TERMINAL:
            e = self.assoc.edge_of(dst)
            if e is None:
                raise RoutingError(f"terminal {dst} has no edge association")
            return [self.fiber_down[e], self.downlink[dst]]
        raise RoutingError(f"unroutable pair {src} -> {dst}")

    def _route_t2t(self, a: int, b: int) -> List[Link]:
        if self.p2p_enabled:
            return [self._d2d_link(a, b)]
        ea, eb = self.assoc.edge_of(a), self.assoc.edge_of(b)
        if ea is None or eb is None:
            raise RoutingError(
                f"terminals {a},{b}: P2P disabled and no common parent")
        if ea == eb:
            return [self.uplink[a], self.downlink[b]]
        return [self.uplink[a], self.fiber_up[ea], self.fiber_down[eb],
                self.downlink[b]]

    # ---- transport ----

    def new_message(self, kind: MessageKind, src: int, dst: int, size: int,
                    demand_ref: Optional[int] = None,
                    track: Optional[object] = None) -> Message:
        if size < 0:
            raise ConfigurationError("message size must be >= 0")
        self._msg_seq += 1
        msg = Message(id=self._msg_seq, kind=kind, src=src, dst=dst,
                      size=int(size), created_at=self.kernel.now(),
                      demand_ref=demand_ref, track=track)
        self.messages.append(msg)
        return msg

    def transmit(self, msg: Message, route: Optional[List[Link]] = None) -> None:
        msg.route = self.route(msg.src, msg.dst) if route is None else route
        msg.hop = 0
        msg.route[0].enqueue(msg, self.kernel.now())

    def _arrive(self, msg: Message) -> None:
        msg.hop += 1
        if msg.hop < len(msg.route):
            msg.route[msg.hop].enqueue(msg, self.kernel.now())
            return
        msg.state = "delivered"
        msg.delivered_at = self.kernel.now()
        self.on_deliver(msg)

    def abort_inflight(self, terminal: int) -> List[Tuple[Message, float]]:
        """Abort every message on the terminal's wireless links (both directions)."""
        t = self.kernel.now()
        dropped = self.uplink[terminal].abort_all(t)
        dropped += self.downlink[terminal].abort_all(t)
        for (a, b), link in self._d2d.items():
            if a == terminal or b == terminal:
                dropped += link.abort_all(t)
        return dropped
