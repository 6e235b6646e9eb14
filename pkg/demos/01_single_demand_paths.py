"""
Single-demand path latencies: closed form vs. event engine
===========================================================

Every serving path has a closed-form idle-network latency: the sum of
per-hop serialization (size * 8 / bandwidth), propagation, and compute
service (cost / capacity). The event engine must land on the same number
to within a nanosecond; this is the cross-check the calibration tool
relies on.
"""
import os

from dtnetsim.oracle import class_path_latency
from dtnetsim.scenario import parse_file
from dtnetsim.simulation import single_demand_latency
from dtnetsim.workload import DemandClass

cfg = parse_file(os.path.join(os.path.dirname(__file__), "..",
                              "scenarios", "default.cfg"))

print(f"{'mode':<12} {'class':<7} {'oracle (s)':>14} {'engine (s)':>14} {'|diff|':>10}")
for mode in ("multilayer", "centralized"):
    for cls in DemandClass:
        oracle = class_path_latency(cfg, mode, cls)
        engine = single_demand_latency(cfg, cls, mode)
        print(f"{mode:<12} {cls.value:<7} {oracle:>14.9f} {engine:>14.9f} "
              f"{abs(oracle - engine):>10.2e}")

# The multilayer local path never leaves the terminal (pure compute), while
# the centralized path hauls raw data across the wireless link and the
# long-haul fiber to the remote cloud and back.
