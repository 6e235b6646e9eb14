"""Workload generation: Poisson demand arrivals with a local/edge/cloud class mix."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .kernel import ConfigurationError, draw_exponential


class DemandClass(Enum):
    LOCAL = "local"
    EDGE = "edge"
    CLOUD = "cloud"


class Priority(Enum):
    HIGH = 0
    NORMAL = 1
    LOW = 2


LAYER_ORDER = {DemandClass.LOCAL: 0, DemandClass.EDGE: 1, DemandClass.CLOUD: 2}


@dataclass(frozen=True)
class ClassSpec:
    """Per-class payload sizes, compute cost and priority."""
    compute_gflop: float
    raw_bytes: int
    semantic_bytes: int
    result_bytes: int
    priority: Priority

    def validate(self, name: str) -> None:
        if self.compute_gflop < 0:
            raise ConfigurationError(f"{name}: compute cost must be >= 0")
        if min(self.raw_bytes, self.semantic_bytes, self.result_bytes) < 0:
            raise ConfigurationError(f"{name}: sizes must be >= 0")
        if self.semantic_bytes > self.raw_bytes:
            raise ConfigurationError(
                f"{name}: semantic size {self.semantic_bytes} exceeds raw "
                f"{self.raw_bytes} (compression never inflates)")


@dataclass(frozen=True)
class WorkloadConfig:
    rate_per_terminal: float
    mix: Dict[DemandClass, float]
    specs: Dict[DemandClass, ClassSpec]

    def validate(self) -> None:
        if self.rate_per_terminal <= 0:
            raise ConfigurationError("demand rate must be > 0")
        total = sum(self.mix.values())
        if any(f < 0 or f > 1 for f in self.mix.values()) or abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"class mix must sum to 1, got {total}")
        for cls, spec in self.specs.items():
            spec.validate(cls.value)


@dataclass
class Demand:
    """A unit of work born at a terminal; class is immutable after generation."""
    id: int
    origin: int
    dclass: DemandClass
    spec: ClassSpec
    t_created: float
    t_completed: Optional[float] = None
    serving_layer: Optional[str] = None  # local | edge | cloud, set on completion
    status: str = "pending"  # pending | completed | failed
    fail_reason: Optional[str] = None
    queue_wait: float = 0.0
    transmission: float = 0.0
    compute: float = 0.0
    buffering: float = 0.0
    signaling_bytes: int = 0
    handover_affected: bool = False
    # set when an emission was skipped (no association), so the budget
    # equality check does not apply
    signaling_incomplete: bool = False
    # reached the hierarchy through a neighbor instead of an own association;
    # results return through the same neighbor
    p2p_forwarded: bool = False
    p2p_via: Optional[int] = None

    @property
    def latency(self) -> Optional[float]:
        if self.t_completed is None:
            return None
        return self.t_completed - self.t_created

    def complete(self, t: float, serving_layer: str) -> None:
        if self.status != "pending":
            raise ConfigurationError(f"demand {self.id} finalized twice")
        self.t_completed = t
        self.serving_layer = serving_layer
        self.status = "completed"

    def fail(self, reason: str) -> None:
        if self.status != "pending":
            raise ConfigurationError(f"demand {self.id} finalized twice")
        self.status = "failed"
        self.fail_reason = reason


class DemandFactory:
    """Draws inter-arrival gaps and class labels from the workload substream."""

    CLASS_ORDER = (DemandClass.LOCAL, DemandClass.EDGE, DemandClass.CLOUD)

    def __init__(self, cfg: WorkloadConfig, rng: np.random.Generator):
        cfg.validate()
        self.cfg = cfg
        self._rng = rng
        self._next_id = 0

    def next_gap(self) -> float:
        return draw_exponential(self._rng, self.cfg.rate_per_terminal)

    def sample_class(self) -> DemandClass:
        u = self._rng.random()
        acc = 0.0
        for cls in self.CLASS_ORDER:
            acc += self.cfg.mix.get(cls, 0.0)
            if u < acc:
                return cls
        return self.CLASS_ORDER[-1]

    def new_demand(self, origin: int, t: float) -> Demand:
        cls = self.sample_class()
        demand = Demand(id=self._next_id, origin=origin, dclass=cls,
                        spec=self.cfg.specs[cls], t_created=t)
        self._next_id += 1
        return demand
