"""The two deployment strategies and the per-demand dispatch decision."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .workload import Demand, DemandClass


class DeploymentMode(Enum):
    CENTRALIZED = "centralized"
    MULTILAYER = "multilayer"


@dataclass(frozen=True)
class ServingDecision:
    """Initial dispatch for one demand; escalation may still move it upward."""
    initial_layer: str          # local | edge | cloud
    payload: Optional[str]      # raw | semantic | None (served in place)
    path: str                   # route descriptor for the data payload
    budget: str                 # signaling budget id for the initial layer


_CLASS_LAYER = {DemandClass.LOCAL: "local", DemandClass.EDGE: "edge",
                DemandClass.CLOUD: "cloud"}

_CLASS_PATH = {DemandClass.LOCAL: "on-terminal",
               DemandClass.EDGE: "terminal->edge",
               DemandClass.CLOUD: "terminal->edge->cloud"}


def decide(demand: Demand, mode: DeploymentMode) -> ServingDecision:
    """Centralized: raw to the cloud, always. Multi-layer: dispatch by class."""
    if mode is DeploymentMode.CENTRALIZED:
        return ServingDecision(initial_layer="cloud", payload="raw",
                               path="terminal->edge->cloud",
                               budget="centralized")
    layer = _CLASS_LAYER[demand.dclass]
    payload = None if demand.dclass is DemandClass.LOCAL else "semantic"
    return ServingDecision(initial_layer=layer, payload=payload,
                           path=_CLASS_PATH[demand.dclass], budget=layer)
