"""Scenario files: JSON (de)serialization and the bundled scenario builders.

A scenario file has five sections - ``nodes``, ``links``, ``services``,
``radio``, ``trace`` - whose field names mirror the model types, plus an
optional top-level ``alpha`` (the bandwidth-term weight of the routing
metric). Unbounded deadlines serialize as null.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Union

from .errors import ScenarioError
from .model import (
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
)
from .sim import (
    MobilityTrace,
    PathLossSignal,
    SigmaWindow,
    TableSignal,
    TracePoint,
)

SignalModel = Union[TableSignal, PathLossSignal]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Scenario:
    graph: HardwareGraph
    services: tuple[ServiceSpec, ...]
    radio: RadioState
    trace: Optional[MobilityTrace] = None
    signal: Optional[SignalModel] = None
    alpha: float = 1.0

    def __post_init__(self) -> None:
        seen_vfs: set[int] = set()
        seen_services: set[int] = set()
        for service in self.services:
            if service.id in seen_services:
                raise ScenarioError(f"duplicate service id {service.id}")
            seen_services.add(service.id)
            for vf in service.vfs:
                if vf.id in seen_vfs:
                    raise ScenarioError(f"function id {vf.id} reused across services")
                seen_vfs.add(vf.id)
                if vf.pin is not None and vf.pin not in self.graph.nodes:
                    raise ScenarioError(f"function {vf.id} pinned to unknown node {vf.pin}")
        if self.trace is not None and self.trace.robot not in self.graph.nodes:
            raise ScenarioError(f"trace robot {self.trace.robot} not in graph")


# -- JSON --------------------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    graph = scenario.graph
    doc: dict = {
        "version": SCHEMA_VERSION,
        "alpha": scenario.alpha,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "compute_capacity": n.compute_capacity,
                "cost": n.cost,
                "processing_rate": n.processing_rate,
                "tier": n.tier.value if n.tier else None,
                "label": n.label,
            }
            for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "links": [
            {
                "endpoints": list(l.endpoints),
                "bandwidth": l.bandwidth,
                "delay": l.delay,
                "queuing": l.queuing,
                "drop": l.drop,
                "wireless": l.wireless,
            }
            for l in (graph.links[key] for key in sorted(graph.links))
        ],
        "services": [
            {
                "id": s.id,
                "deadline": None if math.isinf(s.deadline) else s.deadline,
                "vfs": [{"id": vf.id, "compute": vf.compute, "pin": vf.pin} for vf in s.vfs],
                "vls": [{"src": vl.src, "dst": vl.dst, "demand": vl.demand} for vl in s.vls],
            }
            for s in scenario.services
        ],
        "radio": {
            "noise": scenario.radio.noise,
            "sigma": [
                {"robot": r, "poa": p, "sigma": value}
                for (r, p), value in sorted(scenario.radio.sigma.items())
            ],
            "model": _signal_to_dict(scenario.signal),
        },
        "trace": None,
    }
    if scenario.trace is not None:
        doc["trace"] = {
            "robot": scenario.trace.robot,
            "step": scenario.trace.step,
            "duration": scenario.trace.duration,
            "timesteps": [
                {"t": tp.t, "position": [tp.x, tp.y]} for tp in scenario.trace.timesteps
            ],
        }
    return doc


def _signal_to_dict(signal: Optional[SignalModel]) -> Optional[dict]:
    if signal is None:
        return None
    if isinstance(signal, TableSignal):
        return {
            "mode": "table",
            "windows": [
                {
                    "robot": w.robot,
                    "poa": w.poa,
                    "sigma": w.sigma,
                    "t_from": w.t_from,
                    "t_to": w.t_to,
                }
                for w in signal.windows
            ],
        }
    return {
        "mode": "path_loss",
        "reference_power": signal.reference_power,
        "exponent": signal.exponent,
        "reference_distance": signal.reference_distance,
        "poa_positions": [
            {"poa": poa, "x": xy[0], "y": xy[1]}
            for poa, xy in sorted(signal.poa_positions.items())
        ],
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        nodes = [
            Node(
                id=raw["id"],
                kind=NodeKind(raw["kind"]),
                compute_capacity=raw.get("compute_capacity", 0.0),
                cost=raw.get("cost", 0.0),
                processing_rate=raw.get("processing_rate", 0.0),
                tier=Tier(raw["tier"]) if raw.get("tier") else None,
                label=raw.get("label"),
            )
            for raw in doc["nodes"]
        ]
        links = [
            Link(
                endpoints=tuple(raw["endpoints"]),
                bandwidth=raw["bandwidth"],
                delay=raw.get("delay", 0.0),
                queuing=raw.get("queuing", 0.0),
                drop=raw.get("drop", 0.0),
                wireless=raw.get("wireless", False),
            )
            for raw in doc["links"]
        ]
        graph = build_graph(nodes, links)
        services = tuple(
            ServiceSpec(
                id=raw["id"],
                vfs=tuple(
                    VfSpec(id=vf["id"], compute=vf["compute"], pin=vf.get("pin"))
                    for vf in raw["vfs"]
                ),
                vls=tuple(
                    VlSpec(src=vl["src"], dst=vl["dst"], demand=vl["demand"])
                    for vl in raw.get("vls", [])
                ),
                deadline=math.inf if raw.get("deadline") is None else raw["deadline"],
            )
            for raw in doc["services"]
        )
        radio_doc = doc["radio"]
        radio = RadioState(
            sigma={(s["robot"], s["poa"]): s["sigma"] for s in radio_doc.get("sigma", [])},
            noise=radio_doc["noise"],
        )
        trace = None
        if doc.get("trace"):
            trace_doc = doc["trace"]
            trace = MobilityTrace(
                robot=trace_doc["robot"],
                step=trace_doc["step"],
                timesteps=tuple(
                    TracePoint(tp["t"], tp["position"][0], tp["position"][1])
                    for tp in trace_doc["timesteps"]
                ),
            )
        signal = _signal_from_dict(radio_doc.get("model"), radio, graph)
        return Scenario(
            graph=graph,
            services=services,
            radio=radio,
            trace=trace,
            signal=signal,
            alpha=doc.get("alpha", 1.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario document: {exc}") from exc


def _signal_from_dict(
    doc: Optional[dict], radio: RadioState, graph: HardwareGraph
) -> Optional[SignalModel]:
    if doc is None:
        return None
    if doc["mode"] == "table":
        return TableSignal(
            base=radio,
            windows=tuple(
                SigmaWindow(w["robot"], w["poa"], w["sigma"], w["t_from"], w["t_to"])
                for w in doc["windows"]
            ),
        )
    if doc["mode"] == "path_loss":
        pairs = []
        for robot in graph.robots():
            for link in graph.wireless_links(robot):
                a, b = link.endpoints
                pairs.append((robot, b if a == robot else a))
        return PathLossSignal(
            noise=radio.noise,
            reference_power=doc["reference_power"],
            exponent=doc["exponent"],
            reference_distance=doc["reference_distance"],
            poa_positions={
                entry["poa"]: (entry["x"], entry["y"]) for entry in doc["poa_positions"]
            },
            pairs=tuple(sorted(pairs)),
        )
    raise ScenarioError(f"unknown signal model mode {doc['mode']!r}")


def load_scenario(path: str) -> Scenario:
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def dump_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w") as handle:
        json.dump(scenario_to_dict(scenario), handle, indent=2, sort_keys=True)
        handle.write("\n")


# -- bundled scenarios ---------------------------------------------------------

#: Wired delay (ms) from each PoA to the near-Edge, far-Edge, and Cloud server.
WAREHOUSE_DELAYS = {
    1: (3.0, 4.0, 9.0),
    2: (9.0, 8.0, 18.0),
    3: (3.0, 4.0, 9.0),
    4: (9.0, 8.0, 18.0),
    5: (9.0, 12.0, 27.0),
    6: (9.0, 12.0, 27.0),
}

WAREHOUSE_POA_POSITIONS = {
    1: (25.0, 0.0),
    2: (50.0, 60.0),
    3: (75.0, 0.0),
    4: (150.0, 60.0),
    5: (127.0, 0.0),
    6: (179.0, 0.0),
}

_WAREHOUSE_STEPS = 200
_WAREHOUSE_POWER = 7700.0
#: The last PoA gets a much fatter radio pipe; capacity-blind placers chase it.
_WAREHOUSE_WIDE_POA = 6
_WAREHOUSE_WIDE_BANDWIDTH = 730.0


def warehouse_scenario() -> Scenario:
    """The bundled warehouse driving scenario.

    One robot drives a 200 m corridor past six PoAs; its remote-driving
    function must stay within a 15 ms round-trip budget. Cloud hosting is
    cheap but slow from the far half of the corridor, so a latency-aware
    placer has to migrate to the far Edge there. Server costs are scaled so
    that the cost gap between tiers dominates the per-path delay differences.
    """
    nodes = [
        Node(0, NodeKind.ROBOT, compute_capacity=1.0, processing_rate=26.0, label="r1"),
        Node(7, NodeKind.SERVER, compute_capacity=10.0, cost=40.0, processing_rate=26.0,
             tier=Tier.NEAR_EDGE, label="near-edge"),
        Node(8, NodeKind.SERVER, compute_capacity=10.0, cost=20.0, processing_rate=26.0,
             tier=Tier.FAR_EDGE, label="far-edge"),
        Node(9, NodeKind.SERVER, compute_capacity=10.0, cost=1.0, processing_rate=26.0,
             tier=Tier.CLOUD, label="cloud"),
    ]
    for poa in range(1, 7):
        nodes.append(Node(poa, NodeKind.POA, label=f"R{poa}"))

    links = []
    for poa, (d_near, d_far, d_cloud) in WAREHOUSE_DELAYS.items():
        links.append(Link((poa, 7), bandwidth=1000.0, delay=d_near))
        links.append(Link((poa, 8), bandwidth=1000.0, delay=d_far))
        links.append(Link((poa, 9), bandwidth=1000.0, delay=d_cloud))
    for poa in range(1, 7):
        bandwidth = _WAREHOUSE_WIDE_BANDWIDTH if poa == _WAREHOUSE_WIDE_POA else 100.0
        links.append(Link((0, poa), bandwidth=bandwidth, wireless=True))

    graph = build_graph(nodes, links)
    service = ServiceSpec(
        id=0,
        vfs=(VfSpec(0, compute=1.0, pin=0), VfSpec(1, compute=2.0)),
        vls=(VlSpec(0, 1, demand=50.0),),
        deadline=15.0,
    )
    trace = MobilityTrace(
        robot=0,
        step=1.0,
        timesteps=tuple(TracePoint(float(t), float(t), 0.0) for t in range(_WAREHOUSE_STEPS)),
    )
    signal = PathLossSignal(
        noise=1.0,
        reference_power=_WAREHOUSE_POWER,
        exponent=3.0,
        reference_distance=1.0,
        poa_positions=dict(WAREHOUSE_POA_POSITIONS),
        pairs=tuple((0, poa) for poa in range(1, 7)),
    )
    radio = signal.radio_at(trace.timesteps[0].t, (trace.timesteps[0].x, trace.timesteps[0].y))
    return Scenario(graph, (service,), radio, trace, signal)


def build_stress_scenario(n: int, p: float, seed: int, *, steps_per_leg: int = 3) -> Scenario:
    """A stress-test scenario over one random substrate sample.

    The robot loops past the 12 dataset PoAs while a four-function chain
    (driver pinned to the robot plus three offloadable functions) must stay
    within 15 ms.
    """
    from .topology import TierRedundancySpec, generate, load_poa_locations

    graph = generate(n, p, TierRedundancySpec(), seed)
    robot = n + 12
    positions = {n + pid: (x, y) for pid, x, y in load_poa_locations()}

    waypoints = [positions[n + i] for i in range(12)]
    points: list[TracePoint] = []
    t = 0.0
    for i in range(12):
        ax, ay = waypoints[i]
        bx, by = waypoints[(i + 1) % 12]
        for j in range(steps_per_leg):
            frac = j / steps_per_leg
            points.append(TracePoint(t, ax + frac * (bx - ax), ay + frac * (by - ay)))
            t += 1.0
    trace = MobilityTrace(robot=robot, step=1.0, timesteps=tuple(points))

    service = ServiceSpec(
        id=0,
        vfs=(
            VfSpec(0, compute=1.0, pin=robot),
            VfSpec(1, compute=1.0),
            VfSpec(2, compute=1.0),
            VfSpec(3, compute=1.0),
        ),
        vls=(VlSpec(0, 1, 10.0), VlSpec(1, 2, 10.0), VlSpec(2, 3, 10.0)),
        deadline=15.0,
    )
    signal = PathLossSignal(
        noise=1.0,
        reference_power=60000.0,
        exponent=3.0,
        reference_distance=1.0,
        poa_positions=positions,
        pairs=tuple((robot, poa) for poa in sorted(positions)),
    )
    radio = signal.radio_at(0.0, (points[0].x, points[0].y))
    return Scenario(graph, (service,), radio, trace, signal)


def bundled_warehouse_path() -> str:
    """Filesystem path of the packaged warehouse scenario JSON."""
    return str(resources.files("vfembed.data").joinpath("warehouse.json"))
