"""Latency- and radio-aware embedding of robotic service chains.

The package models a substrate of robots, points of access, switches, and
tiered servers; services as function chains with bandwidth demands and an
end-to-end delay budget; and embeddings as joint placement, routing, and
radio-attachment decisions. Solvers include a greedy cost/latency trade-off
placer, two reconstructed baselines, and an exhaustive optimal search, all
wired into a time-stepped mobility simulator with CSV output.
"""

from .feasibility import (
    DelayReport,
    Violation,
    ViolationKind,
    channel_capacity,
    check_embedding,
    delay_report,
    network_delay,
    objective,
    processing_delay,
)
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    Node,
    NodeKind,
    RadioState,
    ServiceSpec,
    Tier,
    VfSpec,
    VlSpec,
    build_graph,
    hosted_vfs,
    hosted_vls,
)
from .scenario import Scenario, build_stress_scenario, load_scenario, warehouse_scenario

__all__ = [
    "DelayReport",
    "Embedding",
    "HardwareGraph",
    "Link",
    "Node",
    "NodeKind",
    "RadioState",
    "Scenario",
    "ServiceSpec",
    "Tier",
    "VfSpec",
    "Violation",
    "ViolationKind",
    "VlSpec",
    "build_graph",
    "build_stress_scenario",
    "channel_capacity",
    "check_embedding",
    "delay_report",
    "hosted_vfs",
    "hosted_vls",
    "load_scenario",
    "network_delay",
    "objective",
    "processing_delay",
    "warehouse_scenario",
]

__version__ = "0.1.0"
