"""Periodic edge reassociation and the two handover reactions.

Multi-layer: notice -> evict -> agent migration via cloud -> admit, with the
terminal buffering outbound demand messages until the migration lands.
Centralized: association flips immediately and every in-flight wireless
transfer of the terminal is aborted and retransmitted from zero.
"""
from __future__ import annotations

from typing import List, Optional

from .kernel import SimulationError
from .metrics import AbortRecord, HandoverRecord
from .network import HandoverMark, Message, MessageKind


class MobilityController:
    """Drives mobility ticks and executes per-terminal handovers."""

    def __init__(self, sim):
        self.sim = sim
        self.plan = sim.cfg.mobility
        self._fixed_set: Optional[List[int]] = None
        self._active: dict = {}  # terminal -> HandoverRecord in progress

    def schedule_first(self) -> None:
        if self.plan.movers > 0:
            self.sim.kernel.schedule(self.plan.switch_period_s, "MobilityTick",
                                     self.tick)

    def select_movers(self) -> List[int]:
        terminals = self.sim.net.terminals
        if self.plan.selection == "fixed-set":
            if self._fixed_set is None:
                self._fixed_set = list(terminals[: self.plan.movers])
            return list(self._fixed_set)
        rng = self.sim.kernel.rng.mover_selection
        picked = rng.choice(len(terminals), size=self.plan.movers, replace=False)
        return sorted(terminals[i] for i in picked)

    def tick(self) -> List[HandoverRecord]:
        sim = self.sim
        reassociations = []
        for terminal in self.select_movers():
            from_edge = sim.net.assoc.edge_of(terminal)
            to_edge = self._pick_target(terminal, from_edge)
            if sim.centralized:
                rec = self.handover_centralized(terminal, from_edge, to_edge)
            else:
                rec = self.handover_multilayer(terminal, from_edge, to_edge)
            reassociations.append(rec)
        sim.kernel.schedule(sim.kernel.now() + self.plan.switch_period_s,
                            "MobilityTick", self.tick)
        return reassociations

    def _pick_target(self, terminal: int, from_edge: int) -> int:
        others = [e for e in self.sim.net.edges if e != from_edge]
        if not others:
            raise SimulationError("mobility requires at least 2 edges")
        if len(others) == 1:
            return others[0]
        rng = self.sim.kernel.rng.mobility
        return others[int(rng.integers(0, len(others)))]

    # ---- multi-layer protocol ----

    def handover_multilayer(self, terminal: int, from_edge: int,
                            to_edge: int) -> HandoverRecord:
        sim = self.sim
        now = sim.kernel.now()
        agent = sim.agents[terminal]
        coalesced = sim.net.assoc.in_handover(terminal)
        if coalesced:
            # the newer handover supersedes the one still in flight
            self._active[terminal].superseded = True
        record = HandoverRecord(terminal, from_edge, to_edge, now)
        self._active[terminal] = record
        sim.ledger.handover_records.append(record)
        sim.net.assoc.mark_handover(terminal, HandoverMark(to_edge, now))
        if coalesced and agent.migrating_to is not None:
            # agent state is mid-flight; redirect it at its next fiber hop
            agent.migrating_to = to_edge
            return record
        # demand messages still waiting on the uplink must not depart during
        # the window; pull them back into the terminal's hold buffer
        pulled = sim.net.uplink[terminal].extract_queued(
            lambda m: m.kind in (MessageKind.DEMAND_DATA,
                                 MessageKind.DEMAND_PACKET)
            and m.demand_ref is not None, now)
        for msg in pulled:
            sim.local_dts[terminal].buffer_outbound(msg)
        size = sim.signaling.handover_notice_size()
        notice = sim.net.new_message(MessageKind.HANDOVER_NOTICE, terminal,
                                     agent.location, size)
        notice._handover_terminal = terminal
        sim.ledger.add_bytes("maintenance_signaling", size)
        sim.net.transmit(notice)
        return record

    def on_notice(self, msg: Message) -> None:
        """Notice reached the old edge: evict the agent and ship its state."""
        sim = self.sim
        terminal = msg._handover_terminal
        mark = sim.net.assoc.handover_mark(terminal)
        if mark is None:
            return  # handover was cancelled; nothing to do
        agent = sim.agents[terminal]
        if agent.location is None:
            return  # already migrating; delivery chasing covers the retarget
        from_edge = agent.location
        # the state transfer hits the fiber ahead of the trailing pool notice
        agent.migrating_to = mark.target_edge
        self._send_migration(agent, from_edge, mark.target_edge)
        sim.edge_dts[from_edge].evict(agent)

    def _send_migration(self, agent, from_edge: int, to_edge: int) -> None:
        sim = self.sim
        migration = sim.net.new_message(MessageKind.AGENT_MIGRATION, from_edge,
                                        to_edge, agent.state_size)
        migration._agent_terminal = agent.terminal
        sim.ledger.add_bytes("maintenance_signaling", agent.state_size)
        sim.net.transmit(migration)

    def on_migration(self, msg: Message) -> None:
        """Agent state reached an edge; admit there or chase a newer target."""
        sim = self.sim
        terminal = msg._agent_terminal
        agent = sim.agents[terminal]
        landed = msg.dst
        target = agent.migrating_to
        if target is not None and target != landed:
            # handover was superseded mid-flight; keep chasing the new target
            self._send_migration(agent, landed, target)
            return
        sim.edge_dts[landed].admit(agent)
        sim.net.assoc.set_edge(terminal, landed)
        record = self._active.get(terminal)
        now = sim.kernel.now()

        def complete(rec=record):
            if self._active.get(terminal) is not rec:
                return  # superseded within the same instant
            self._active.pop(terminal, None)
            sim.net.assoc.mark_handover(terminal, None)
            if rec is not None:
                rec.t_complete = sim.kernel.now()
                rec.buffered_messages = len(sim.local_dts[terminal].held_back)
            sim.local_dts[terminal].flush_buffer()

        sim.kernel.schedule(now, "HandoverComplete", complete)

    # ---- centralized reaction ----

    def handover_centralized(self, terminal: int, from_edge: int,
                             to_edge: int) -> HandoverRecord:
        sim = self.sim
        now = sim.kernel.now()
        record = HandoverRecord(terminal, from_edge, to_edge, now,
                                t_complete=now)
        sim.ledger.handover_records.append(record)
        sim.net.assoc.set_edge(terminal, to_edge)
        for msg, wasted in sim.net.abort_inflight(terminal):
            restart = sim.net.new_message(msg.kind, msg.src, msg.dst, msg.size,
                                          demand_ref=msg.demand_ref,
                                          track=msg.track)
            restart._retry_of = msg.id
            if getattr(msg, "_serving_layer", None) is not None:
                restart._serving_layer = msg._serving_layer
            sim.net.transmit(restart)
            trans_total = msg.size * 8.0 / self._wireless_rate(msg, terminal)
            elapsed = (wasted / msg.size) * trans_total if msg.size else 0.0
            record.aborted_ids.append(msg.id)
            sim.ledger.abort_records.append(AbortRecord(
                time=now, terminal=terminal, message_id=msg.id,
                kind=msg.kind.value, size=msg.size, wasted_bytes=wasted,
                elapsed_s=elapsed, total_s=trans_total, restart_id=restart.id))
            if msg.track is not None:
                msg.track.handover_affected = True
        return record

    def _wireless_rate(self, msg: Message, terminal: int) -> float:
        link = msg.route[min(msg.hop, len(msg.route) - 1)] if msg.route else None
        if link is not None:
            return link.bandwidth_bps
        return self.sim.net.uplink[terminal].bandwidth_bps
