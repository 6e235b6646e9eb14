"""Per-demand latency records, signaling byte ledgers, series, exports.

Control-plane bytes are attributed once per logical emission: per-demand
components sum exactly to the serving-layer budget, pool/handover/anomaly
traffic lands in the maintenance bucket, and model updates get their own
ledger. Transport-level retries after an abort never re-attribute.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .kernel import ConfigurationError
from .network import Message, MessageKind
from .workload import Demand
from .scenario import SignalingCfg

CSV_COLUMNS = ("demand_id", "origin", "class", "serving_layer", "t_created",
               "t_completed", "latency_s", "queue_wait_s", "transmission_s",
               "compute_s", "buffering_s", "signaling_bytes", "handover_affected")


def _fmt(x: float) -> str:
    return repr(float(x))


class SignalingTable:
    """Control-message sizes and per-serving-layer budget arithmetic."""

    def __init__(self, cfg: SignalingCfg):
        self.cfg = cfg

    # ---- budgets ----

    def budget(self, mode: str, layer: str) -> int:
        if mode == "centralized":
            return self.cfg.centralized_total_bytes
        c = self.cfg
        local = c.status_summary_bytes + c.result_report_bytes + 2 * c.header_bytes
        if layer == "local":
            return local
        edge = local + c.demand_packet_bytes + c.header_bytes
        if layer == "edge":
            return edge
        return edge + 2 * c.cloud_relay_bytes + 2 * c.header_bytes

    # ---- per-demand emissions ----

    def _demand_control(self, sim, kind: MessageKind, src: int, dst: int,
                        size: int, demand: Demand) -> Message:
        msg = sim.net.new_message(kind, src, dst, size, demand_ref=demand.id)
        demand.signaling_bytes += size
        sim.ledger.add_bytes("per_demand_signaling", size)
        return msg

    def emit_status_summary(self, sim, terminal: int, edge: int,
                            demand: Demand) -> Message:
        size = self.cfg.status_summary_bytes + self.cfg.header_bytes
        msg = self._demand_control(sim, MessageKind.STATUS_SUMMARY, terminal,
                                   edge, size, demand)
        msg._status_value = demand.spec.compute_gflop
        sim.net.transmit(msg)
        return msg

    def demand_packet_msg(self, sim, terminal: int, edge: int,
                          demand: Demand) -> Message:
        size = self.cfg.demand_packet_bytes + self.cfg.header_bytes
        return self._demand_control(sim, MessageKind.DEMAND_PACKET, terminal,
                                    edge, size, demand)

    def emit_cloud_relay(self, sim, src: int, dst: int, demand: Demand) -> None:
        size = self.cfg.cloud_relay_bytes + self.cfg.header_bytes
        kind = (MessageKind.DEMAND_PACKET if dst == sim.net.cloud
                else MessageKind.FEEDBACK)
        sim.net.transmit(self._demand_control(sim, kind, src, dst, size, demand))

    def emit_result_report(self, sim, src: int, dst: int, demand: Demand) -> None:
        size = self.cfg.result_report_bytes + self.cfg.header_bytes
        sim.net.transmit(self._demand_control(sim, MessageKind.FEEDBACK, src,
                                              dst, size, demand))

    def emit_centralized_bundle(self, sim, terminal: int, demand: Demand) -> None:
        size = self.cfg.centralized_total_bytes
        sim.net.transmit(self._demand_control(sim, MessageKind.DEMAND_PACKET,
                                              terminal, sim.net.cloud, size,
                                              demand))

    # ---- maintenance emissions ----

    def _maintenance(self, sim, kind: MessageKind, src: int, dst: int,
                     size: int) -> None:
        msg = sim.net.new_message(kind, src, dst, size)
        sim.ledger.add_bytes("maintenance_signaling", size)
        sim.net.transmit(msg)

    def emit_pool_notice(self, sim, edge: int, action: str, terminal: int) -> None:
        size = self.cfg.pool_notice_bytes + self.cfg.header_bytes
        msg = sim.net.new_message(MessageKind.HANDOVER_NOTICE, edge,
                                  sim.net.cloud, size)
        msg._pool_action = action
        sim.ledger.add_bytes("maintenance_signaling", size)
        sim.net.transmit(msg)

    def emit_anomaly_flag(self, sim, edge: int, terminal: int) -> None:
        size = self.cfg.anomaly_flag_bytes + self.cfg.header_bytes
        self._maintenance(sim, MessageKind.ANOMALY_FLAG, edge, sim.net.cloud, size)
        sim.ledger.anomaly_flags += 1

    def emit_data_forward(self, sim, edge: int, nbytes: int) -> None:
        self._maintenance(sim, MessageKind.DATA_FORWARD, edge, sim.net.cloud,
                          nbytes)

    def handover_notice_size(self) -> int:
        return self.cfg.handover_notice_bytes + self.cfg.header_bytes


def account_signaling(demand: Demand, messages: List[Message]) -> int:
    """Sum the control-plane bytes attributed to one demand.

    Transport retries after an abort carry no fresh attribution. Data-plane
    payload bytes are tracked separately as data volume.
    """
    if demand is None:
        raise ConfigurationError("signaling attributed to an unknown demand")
    total = 0
    for msg in messages:
        if msg.demand_ref != demand.id or msg.plane != "control":
            continue
        if getattr(msg, "_retry_of", None) is not None:
            continue
        total += msg.size
    return total


@dataclass
class AbortRecord:
    time: float
    terminal: int
    message_id: int
    kind: str
    size: int
    wasted_bytes: float
    elapsed_s: float
    total_s: float
    restart_id: Optional[int] = None


@dataclass
class HandoverRecord:
    terminal: int
    from_edge: int
    to_edge: int
    t_start: float
    t_complete: Optional[float] = None
    buffered_messages: int = 0
    aborted_ids: List[int] = field(default_factory=list)
    superseded: bool = False


class MetricsLedger:
    """Owned by one run; collects demands, byte buckets and protocol records."""

    BUCKETS = ("data_plane", "per_demand_signaling", "maintenance_signaling",
               "model_update")

    def __init__(self, mode: str, seed: int, duration_s: float):
        self.mode = mode
        self.seed = seed
        self.duration_s = duration_s
        self.demands: List[Demand] = []
        self.bytes: Dict[str, int] = {b: 0 for b in self.BUCKETS}
        self.abort_records: List[AbortRecord] = []
        self.handover_records: List[HandoverRecord] = []
        self.anomaly_flags = 0
        self.failed_marker = False

    def add_demand(self, demand: Demand) -> None:
        self.demands.append(demand)

    def add_bytes(self, bucket: str, size: int) -> None:
        self.bytes[bucket] += size

    # ---- views ----

    def records(self) -> List[Demand]:
        return [d for d in self.demands if d.status == "completed"]

    def counts(self) -> Dict[str, int]:
        return {
            "generated": len(self.demands),
            "completed": sum(1 for d in self.demands if d.status == "completed"),
            "failed": sum(1 for d in self.demands if d.status == "failed"),
            "pending": sum(1 for d in self.demands if d.status == "pending"),
        }


def per_second_series(records: List[Demand], duration_s: float) -> List[Optional[float]]:
    """Mean latency per completion second; absent seconds stay None."""
    length = math.ceil(duration_s)
    sums = [0.0] * length
    counts = [0] * length
    for d in records:
        bucket = min(int(math.floor(d.t_completed)), length - 1)
        sums[bucket] += d.latency
        counts[bucket] += 1
    return [sums[i] / counts[i] if counts[i] else None for i in range(length)]


def volatility(series: List[Optional[float]]):
    """Population sd and coefficient of variation over present buckets."""
    present = [x for x in series if x is not None]
    if len(present) < 2:
        return None, None
    if all(x == present[0] for x in present):
        return 0.0, 0.0 if present[0] != 0 else None
    mean = sum(present) / len(present)
    sd = math.sqrt(sum((x - mean) ** 2 for x in present) / len(present))
    cv = sd / mean if mean != 0 else None
    return sd, cv


def _mean(values: List[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def _percentile(values: List[float], q: float) -> Optional[float]:
    if not values:
        return None
    data = sorted(values)
    pos = (len(data) - 1) * q
    lo = int(math.floor(pos))
    hi = int(math.ceil(pos))
    if lo == hi:
        return data[lo]
    return data[lo] + (data[hi] - data[lo]) * (pos - lo)


def build_summary(ledger: MetricsLedger, wasted_bytes: float) -> Dict:
    records = ledger.records()
    latencies = [d.latency for d in records]
    series = per_second_series(records, ledger.duration_s)
    sd, cv = volatility(series)
    by_layer = {"local": [], "edge": [], "cloud": []}
    for d in records:
        by_layer[d.serving_layer].append(d)
    signaling = {layer: _mean([d.signaling_bytes for d in ds])
                 for layer, ds in by_layer.items()}
    return {
        "mode": ledger.mode,
        "seed": ledger.seed,
        "duration_s": ledger.duration_s,
        "demands": ledger.counts(),
        "latency_s": {
            "mean": _mean(latencies),
            "median": _percentile(latencies, 0.5),
            "p95": _percentile(latencies, 0.95),
        },
        "per_second_volatility": {"sd": sd, "cv": cv},
        "served_by_layer": {layer: len(ds) for layer, ds in by_layer.items()},
        "signaling_per_demand_bytes": {
            **signaling,
            "overall": _mean([float(d.signaling_bytes) for d in records]),
        },
        "bytes": {**ledger.bytes, "wasted": wasted_bytes},
        "handovers": {
            "count": len(ledger.handover_records),
            "aborted_transfers": len(ledger.abort_records),
            "restarts": sum(1 for a in ledger.abort_records
                            if a.restart_id is not None),
        },
        "anomaly_flags": ledger.anomaly_flags,
        "per_second_mean_latency_s": series,
        "failed": ledger.failed_marker,
    }


# ---- file output ----

def records_csv_text(records: List[Demand]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for d in records:
        lines.append(",".join((
            str(d.id), str(d.origin), d.dclass.value, d.serving_layer,
            _fmt(d.t_created), _fmt(d.t_completed), _fmt(d.latency),
            _fmt(d.queue_wait), _fmt(d.transmission), _fmt(d.compute),
            _fmt(d.buffering), str(d.signaling_bytes),
            "true" if d.handover_affected else "false",
        )))
    return "\n".join(lines) + "\n"


def records_json_text(records: List[Demand]) -> str:
    rows = []
    for d in records:
        rows.append({
            "demand_id": d.id, "origin": d.origin, "class": d.dclass.value,
            "serving_layer": d.serving_layer, "t_created": d.t_created,
            "t_completed": d.t_completed, "latency_s": d.latency,
            "queue_wait_s": d.queue_wait, "transmission_s": d.transmission,
            "compute_s": d.compute, "buffering_s": d.buffering,
            "signaling_bytes": d.signaling_bytes,
            "handover_affected": d.handover_affected,
        })
    return json.dumps(rows, indent=2) + "\n"


def parse_records_csv(text: str) -> List[Dict]:
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        row: Dict = dict(zip(header, parts))
        for key in ("demand_id", "origin", "signaling_bytes"):
            row[key] = int(row[key])
        for key in ("t_created", "t_completed", "latency_s", "queue_wait_s",
                    "transmission_s", "compute_s", "buffering_s"):
            row[key] = float(row[key])
        row["handover_affected"] = row["handover_affected"] == "true"
        rows.append(row)
    return rows


def export_run(ledger: MetricsLedger, summary: Dict, out_dir: str,
               fmt: str = "csv") -> List[str]:
    """Write {mode}.records.{fmt} and {mode}.summary.json; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    records = ledger.records()
    if fmt == "json":
        rec_path = os.path.join(out_dir, f"{ledger.mode}.records.json")
        rec_text = records_json_text(records)
    else:
        rec_path = os.path.join(out_dir, f"{ledger.mode}.records.csv")
        rec_text = records_csv_text(records)
    with open(rec_path, "w", encoding="utf-8") as fh:
        fh.write(rec_text)
    sum_path = os.path.join(out_dir, f"{ledger.mode}.summary.json")
    with open(sum_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, indent=2) + "\n")
    return [rec_path, sum_path]


def comparison_report(cent: Dict, multi: Dict) -> Dict:
    """Headline deltas between the two deployments of one seed."""
    c_mean = cent["latency_s"]["mean"]
    m_mean = multi["latency_s"]["mean"]
    c_sd, c_cv = (cent["per_second_volatility"]["sd"],
                  cent["per_second_volatility"]["cv"])
    m_sd, m_cv = (multi["per_second_volatility"]["sd"],
                  multi["per_second_volatility"]["cv"])

    def ratio(a, b):
        if a is None or b in (None, 0):
            return None
        return a / b

    return {
        "seed": cent["seed"],
        "duration_s": cent["duration_s"],
        "mean_latency_s": {"centralized": c_mean, "multilayer": m_mean},
        "latency_delta_s": (c_mean - m_mean
                            if None not in (c_mean, m_mean) else None),
        "volatility": {
            "centralized": {"sd": c_sd, "cv": c_cv},
            "multilayer": {"sd": m_sd, "cv": m_cv},
            "sd_ratio": ratio(c_sd, m_sd),
            "cv_ratio": ratio(c_cv, m_cv),
        },
        "signaling_per_demand_bytes": {
            "centralized": cent["signaling_per_demand_bytes"]["overall"],
            "multilayer": multi["signaling_per_demand_bytes"]["overall"],
        },
    }


def write_comparison(report: Dict, out_dir: str) -> str:
    path = os.path.join(out_dir, "comparison.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2) + "\n")
    return path
