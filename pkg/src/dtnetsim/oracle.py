"""Closed-form idle-path latency oracle and the band calibration search.

The oracle sums per-hop serialization, propagation and compute service for a
single demand on an idle network. It is independent of the event engine and
must agree with a zero-load simulation to 1e-9 s, which the test suite
enforces. Calibration solves one knob so the oracle lands on a band midpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Tuple

from .scenario import ScenarioConfig
from .workload import DemandClass


class CalibrationInfeasible(ValueError):
    """Requested band cannot be reached; carries the nearest achievable value."""

    def __init__(self, message: str, nearest: float):
        super().__init__(message)
        self.nearest = nearest


def class_path_latency(cfg: ScenarioConfig, mode: str,
                       dclass: DemandClass) -> float:
    """Idle-network latency of one demand of the given class under a mode."""
    topo, comp = cfg.topology, cfg.compute
    spec = cfg.workload.to_workload().specs[dclass]
    wp, fp = topo.wireless_prop_s, topo.fiber_prop_s
    ul, dl, fb = topo.uplink_bps, topo.downlink_bps, topo.fiber_bps
    if mode == "centralized":
        total = spec.raw_bytes * 8.0 / ul
        total += wp
        total += spec.raw_bytes * 8.0 / fb
        total += fp
        total += comp.centralized_cost_gflop / comp.cloud_gflops
        total += spec.result_bytes * 8.0 / fb
        total += fp
        total += spec.result_bytes * 8.0 / dl
        total += wp
        return total
    if dclass is DemandClass.LOCAL:
        return spec.compute_gflop / comp.terminal_gflops
    if dclass is DemandClass.EDGE:
        total = spec.semantic_bytes * 8.0 / ul
        total += wp
        total += spec.compute_gflop / comp.edge_gflops
        total += spec.result_bytes * 8.0 / dl
        total += wp
        return total
    total = spec.semantic_bytes * 8.0 / ul
    total += wp
    total += spec.semantic_bytes * 8.0 / fb
    total += fp
    total += spec.compute_gflop / comp.cloud_gflops
    total += spec.result_bytes * 8.0 / fb
    total += fp
    total += spec.result_bytes * 8.0 / dl
    total += wp
    return total


def mix_weighted_latency(cfg: ScenarioConfig, mode: str) -> float:
    wl = cfg.workload
    mix = {DemandClass.LOCAL: wl.mix_local, DemandClass.EDGE: wl.mix_edge,
           DemandClass.CLOUD: wl.mix_cloud}
    return sum(frac * class_path_latency(cfg, mode, cls)
               for cls, frac in mix.items() if frac > 0)


def utilization_estimates(cfg: ScenarioConfig, mode: str) -> Dict[str, float]:
    """Coarse per-resource utilization under the configured Poisson rate."""
    topo, comp, wl = cfg.topology, cfg.compute, cfg.workload
    specs = wl.to_workload().specs
    rate = wl.rate_per_terminal
    mix = {DemandClass.LOCAL: wl.mix_local, DemandClass.EDGE: wl.mix_edge,
           DemandClass.CLOUD: wl.mix_cloud}
    per_edge_terminals = topo.terminals / topo.edges
    total_rate = rate * topo.terminals
    if mode == "centralized":
        up_bytes = sum(mix[c] * specs[c].raw_bytes for c in mix)
        down_bytes = sum(mix[c] * specs[c].result_bytes for c in mix)
        return {
            "uplink": rate * up_bytes * 8.0 / topo.uplink_bps,
            "downlink": rate * down_bytes * 8.0 / topo.downlink_bps,
            "fiber": rate * per_edge_terminals * (up_bytes + down_bytes) * 8.0
                     / topo.fiber_bps,
            "cloud_cpu": total_rate * comp.centralized_cost_gflop
                         / comp.cloud_gflops,
        }
    edge_work = mix[DemandClass.EDGE] * specs[DemandClass.EDGE].compute_gflop
    return {
        "terminal_cpu": rate * mix[DemandClass.LOCAL]
                        * specs[DemandClass.LOCAL].compute_gflop
                        / comp.terminal_gflops,
        "uplink": rate * sum(
            mix[c] * specs[c].semantic_bytes
            for c in (DemandClass.EDGE, DemandClass.CLOUD)) * 8.0
            / topo.uplink_bps,
        "edge_cpu": rate * per_edge_terminals * edge_work / comp.edge_gflops,
        "cloud_cpu": total_rate * mix[DemandClass.CLOUD]
                     * specs[DemandClass.CLOUD].compute_gflop / comp.cloud_gflops,
    }


@dataclass
class CalibrationResult:
    config: ScenarioConfig
    solved: Dict[str, float]
    predicted: Dict[str, float]
    headroom: Dict[str, float]
    utilization: Dict[str, Dict[str, float]]

    def fragment(self) -> str:
        """Config fragment with the solved values and oracle predictions."""
        lines = ["# calibrated fragment; idle-path oracle predictions:"]
        for mode, value in self.predicted.items():
            lines.append(f"#   {mode} = {value!r} s")
        sections: Dict[str, list] = {}
        for dotted, value in self.solved.items():
            section, key = dotted.split(".", 1)
            sections.setdefault(section, []).append((key, value))
        for section, pairs in sections.items():
            lines.append(f"[{section}]")
            for key, value in pairs:
                lines.append(f"{key} = {value!r}")
        return "\n".join(lines) + "\n"


def calibrate(cfg: ScenarioConfig,
              centralized_band: Tuple[float, float],
              multilayer_band: Tuple[float, float],
              solve_for: str = "cost") -> CalibrationResult:
    """Solve workload knobs so idle-path oracles hit the band midpoints.

    The multilayer side adjusts the local-class compute cost; the centralized
    side adjusts `solve_for`: "cost" (cloud processing), "raw_kb" (uniform
    upload size) or "fiber_prop_ms" (path delay to a remote cloud).
    """
    if centralized_band[0] > centralized_band[1] or \
            multilayer_band[0] > multilayer_band[1]:
        raise CalibrationInfeasible("bands must be non-empty intervals", 0.0)
    cent_mid = (centralized_band[0] + centralized_band[1]) / 2.0
    ml_mid = (multilayer_band[0] + multilayer_band[1]) / 2.0
    solved: Dict[str, float] = {}
    out = cfg

    # multilayer: local compute carries the weighted oracle to the midpoint
    wl = out.workload
    if wl.mix_local <= 0:
        raise CalibrationInfeasible(
            "multilayer band needs a nonzero local mix to solve against",
            mix_weighted_latency(out, "multilayer"))
    rest = (wl.mix_edge * class_path_latency(out, "multilayer", DemandClass.EDGE)
            + wl.mix_cloud * class_path_latency(out, "multilayer",
                                                DemandClass.CLOUD))
    local_cost = (ml_mid - rest) / wl.mix_local * out.compute.terminal_gflops
    if local_cost < 0:
        raise CalibrationInfeasible(
            f"multilayer midpoint {ml_mid} below the fixed path share {rest}",
            rest)
    out = replace(out, workload=replace(wl, local_compute_gflop=local_cost))
    solved["workload.local_compute_gflop"] = local_cost

    # centralized: one knob closes the gap to the midpoint
    base = mix_weighted_latency(out, "centralized")
    gap = cent_mid - base
    comp, topo = out.compute, out.topology
    if solve_for == "cost":
        cost = comp.centralized_cost_gflop + gap * comp.cloud_gflops
        if cost < 0:
            raise CalibrationInfeasible(
                f"centralized midpoint {cent_mid} below zero-cost path",
                base - comp.centralized_cost_gflop / comp.cloud_gflops)
        out = replace(out, compute=replace(comp, centralized_cost_gflop=cost))
        solved["compute.centralized_cost_gflop"] = cost
    elif solve_for == "raw_kb":
        per_byte = 8.0 / topo.uplink_bps + 8.0 / topo.fiber_bps
        wl = out.workload
        mean_raw = (wl.mix_local * wl.local_raw_kb + wl.mix_edge * wl.edge_raw_kb
                    + wl.mix_cloud * wl.cloud_raw_kb)
        delta_kb = gap / (per_byte * 1000.0)
        if mean_raw + delta_kb < 0:
            raise CalibrationInfeasible(
                f"centralized midpoint {cent_mid} below zero-payload path",
                base - mean_raw * 1000 * per_byte)
        wl = replace(wl,
                     local_raw_kb=wl.local_raw_kb + delta_kb,
                     edge_raw_kb=wl.edge_raw_kb + delta_kb,
                     cloud_raw_kb=wl.cloud_raw_kb + delta_kb)
        out = replace(out, workload=wl)
        solved["workload.local_raw_kb"] = wl.local_raw_kb
        solved["workload.edge_raw_kb"] = wl.edge_raw_kb
        solved["workload.cloud_raw_kb"] = wl.cloud_raw_kb
    elif solve_for == "fiber_prop_ms":
        # the centralized path crosses the fiber twice; multilayer local/edge
        # paths never touch it
        fp_ms = topo.fiber_prop_ms + gap / 2.0 * 1000.0
        if fp_ms < 0:
            raise CalibrationInfeasible(
                f"centralized midpoint {cent_mid} below zero-propagation path",
                base - 2.0 * topo.fiber_prop_s)
        out = replace(out, topology=replace(topo, fiber_prop_ms=fp_ms))
        solved["topology.fiber_prop_ms"] = fp_ms
    else:
        raise CalibrationInfeasible(f"unknown solve_for {solve_for!r}", 0.0)

    predicted = {
        "centralized": mix_weighted_latency(out, "centralized"),
        "multilayer": mix_weighted_latency(out, "multilayer"),
    }
    headroom = {
        "centralized": centralized_band[0] - predicted["centralized"],
        "multilayer": multilayer_band[0] - predicted["multilayer"],
    }
    utilization = {
        "centralized": utilization_estimates(out, "centralized"),
        "multilayer": utilization_estimates(out, "multilayer"),
    }
    for mode, usage in utilization.items():
        hot = max(usage.values())
        if hot >= 1.0:
            raise CalibrationInfeasible(
                f"{mode}: utilization {hot:.2f} saturates a queue at the "
                f"configured rate", hot)
    return CalibrationResult(config=out, solved=solved, predicted=predicted,
                             headroom=headroom, utilization=utilization)
