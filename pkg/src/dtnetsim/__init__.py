"""dtnetsim: deterministic simulator of a three-layer digital-twin network."""

from .deployment import DeploymentMode, ServingDecision, decide
from .kernel import (ConfigurationError, Kernel, RngStreams, SimulationError,
                     draw_exponential, inverse_exponential)
from .metrics import (MetricsLedger, comparison_report, export_run,
                      per_second_series, volatility, write_comparison)
from .network import (AssociationMap, Link, Message, MessageKind, Network,
                      NodeKind, RoutingError, transmission_time)
from .nodes import CloudDT, ComputeQueue, DigitalAgent, EdgeDT, LocalDT, \
    anomaly_check
from .oracle import (CalibrationInfeasible, CalibrationResult, calibrate,
                     class_path_latency, mix_weighted_latency)
from .scenario import (ScenarioConfig, ScenarioError, ValidationError,
                       parse_file, parse_text, serialize, with_overrides)
from .simulation import (RunResult, Simulation, run_comparison, run_scenario,
                         single_demand_latency)
from .workload import (ClassSpec, Demand, DemandClass, DemandFactory, Priority,
                       WorkloadConfig)

__version__ = "0.1.0"

__all__ = [
    "AssociationMap", "CalibrationInfeasible", "CalibrationResult", "ClassSpec",
    "CloudDT", "ComputeQueue", "ConfigurationError", "Demand", "DemandClass",
    "DemandFactory", "DeploymentMode", "DigitalAgent", "EdgeDT", "Kernel",
    "Link", "LocalDT", "Message", "MessageKind", "MetricsLedger", "Network",
    "NodeKind", "Priority", "RngStreams", "RoutingError", "RunResult",
    "ScenarioConfig", "ScenarioError", "ServingDecision", "Simulation",
    "SimulationError", "ValidationError", "WorkloadConfig", "anomaly_check",
    "calibrate", "class_path_latency", "comparison_report", "decide",
    "draw_exponential", "export_run", "inverse_exponential",
    "mix_weighted_latency", "parse_file", "parse_text", "per_second_series",
    "run_comparison", "run_scenario", "serialize", "single_demand_latency",
    "transmission_time", "volatility", "with_overrides", "write_comparison",
]
