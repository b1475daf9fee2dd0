"""Constraint evaluation: capacity, routing, delay, radio, and the cost objective.

Everything here is a pure function over immutable inputs. Constraint failures
are returned as :class:`Violation` records, never raised; exceptions are
reserved for computations that cannot produce a number at all (e.g. asking for
the delay of an unrouted virtual link).

Checks that depend on missing prerequisites are skipped rather than reported
twice: an unplaced function suppresses the endpoint checks of its virtual
links, a robot without any attachment suppresses the per-route attachment
consistency check, and a service with an unplaced/unrouted/unstable element
suppresses its deadline check. Each defect therefore surfaces as exactly one
violation kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .errors import NotWirelessError, UnroutedVlError, UnstableError
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    NodeKind,
    RadioState,
    ServiceSpec,
    hosted_vfs,
    link_key,
    route_links,
)


class ViolationKind(str, Enum):
    COMPUTE = "Compute"
    VF_UNPLACED = "VfUnplaced"
    BANDWIDTH = "Bandwidth"
    VL_UNROUTED = "VlUnrouted"
    FLOW = "Flow"
    STEER_TO_VF = "SteerToVf"
    DEADLINE = "Deadline"
    STEER_IF_ATTACHED = "SteerIfAttached"
    ATTACHMENT = "Attachment"
    WIRELESS_CAPACITY = "WirelessCapacity"
    STABILITY = "Stability"


_KIND_ORDER = {kind: i for i, kind in enumerate(ViolationKind)}


@dataclass(frozen=True)
class Violation:
    """One failed constraint at one location; ``measured`` breaks ``bound``."""

    kind: ViolationKind
    location: str
    measured: float
    bound: float


@dataclass(frozen=True)
class DelayReport:
    """Per-service delay decomposition; total = d_net + sum of d_pro."""

    service_id: int
    d_net: float
    d_pro: Mapping[int, float]
    total: float
    deadline: float


def channel_capacity(link: Link, sigma: float, noise: float) -> float:
    """Effective wireless capacity (1-drop)*bandwidth*log2(1 + sigma/noise), in Mbps."""
    if not link.wireless:
        raise NotWirelessError(f"link {link.endpoints} is not wireless")
    if noise <= 0:
        raise ValueError("noise must be > 0")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    return link.effective_bandwidth * math.log2(1.0 + sigma / noise)


def processing_delay(
    graph: HardwareGraph,
    service: ServiceSpec,
    vf_id: int,
    embedding: Embedding,
) -> float:
    """Mean processor-sharing delay of one function, in ms.

    Each incoming virtual link is an arrival stream served at aggregate rate
    C(v)*mu of the hosting node, so it contributes 1/(C(v)*mu - demand).
    Functions with no incoming link take 0.
    """
    incoming = service.incoming(vf_id)
    if not incoming:
        return 0.0
    host = embedding.placements[vf_id]
    rate = service.vf(vf_id).compute * graph.node(host).processing_rate
    total = 0.0
    for vl in incoming:
        headroom = rate - vl.demand
        if headroom <= 0:
            raise UnstableError(
                f"function {vf_id} on node {host}: service rate {rate} <= arrival {vl.demand}"
            )
        total += 1.0 / headroom
    return total


def network_delay(graph: HardwareGraph, service: ServiceSpec, embedding: Embedding) -> float:
    """Sum of propagation and queuing delay over every routed link, in ms."""
    total = 0.0
    for vl in service.vls:
        path = embedding.routes.get(vl.pair)
        if path is None:
            src_host = embedding.placements.get(vl.src)
            dst_host = embedding.placements.get(vl.dst)
            if src_host is not None and src_host == dst_host:
                continue  # co-located functions exchange traffic in place
            raise UnroutedVlError(f"service {service.id}: VL {vl.pair} has no route")
        for key in route_links(path):
            link = graph.links[key]
            total += link.delay + link.queuing
    return total


def delay_report(graph: HardwareGraph, service: ServiceSpec, embedding: Embedding) -> DelayReport:
    """Full delay decomposition for one service (requires a complete embedding)."""
    d_net = network_delay(graph, service, embedding)
    d_pro = {vf.id: processing_delay(graph, service, vf.id, embedding) for vf in service.vfs}
    total = d_net + sum(d_pro.values())
    return DelayReport(service.id, d_net, d_pro, total, service.deadline)


def objective(graph: HardwareGraph, embedding: Embedding) -> float:
    """Hosting cost sum(cost_n * |functions at n|); robot-resident pins cost 0."""
    total = 0.0
    for host in embedding.placements.values():
        total += graph.node(host).cost
    return total


def _vf_compute(services: Sequence[ServiceSpec]) -> dict[int, float]:
    table = {}
    for service in services:
        for vf in service.vfs:
            table[vf.id] = vf.compute
    return table


def check_embedding(
    graph: HardwareGraph,
    services: Sequence[ServiceSpec],
    embedding: Embedding,
    radio: RadioState,
) -> list[Violation]:
    """Evaluate every constraint; an empty result means the embedding is feasible.

    Violations come back in a deterministic order (kind, then location).
    """
    out: list[Violation] = []
    compute_of = _vf_compute(services)
    placements = embedding.placements

    # Hosting capacity per node.
    used: dict[int, float] = {}
    for vf, host in placements.items():
        used[host] = used.get(host, 0.0) + compute_of.get(vf, 0.0)
    for host in sorted(used):
        cap = graph.node(host).compute_capacity
        if used[host] > cap:
            out.append(Violation(ViolationKind.COMPUTE, f"node:{host}", used[host], cap))

    # Placement completeness, including pins.
    unplaced: set[int] = set()
    for service in services:
        for vf in service.vfs:
            host = placements.get(vf.id)
            if host is None or (vf.pin is not None and host != vf.pin):
                unplaced.add(vf.id)
                out.append(Violation(ViolationKind.VF_UNPLACED, f"vf:{vf.id}", 0.0, 1.0))

    # Routing presence and endpoint consistency.
    broken_services: set[int] = set()
    routed: list[tuple[ServiceSpec, tuple[int, int], tuple[int, ...], float]] = []
    for service in services:
        for vl in service.vls:
            if vl.src in unplaced or vl.dst in unplaced:
                broken_services.add(service.id)
                continue
            src_host, dst_host = placements[vl.src], placements[vl.dst]
            path = embedding.routes.get(vl.pair)
            if path is not None and len(path) < 2:
                path = None
            if path is None:
                if src_host != dst_host:
                    out.append(Violation(ViolationKind.VL_UNROUTED, f"vl:{vl.src}->{vl.dst}", 0.0, 1.0))
                    broken_services.add(service.id)
                continue
            routed.append((service, vl.pair, path, vl.demand))
            if path[0] != src_host or path[-1] != dst_host:
                out.append(
                    Violation(ViolationKind.STEER_TO_VF, f"vl:{vl.src}->{vl.dst}", 0.0, 1.0)
                )
                broken_services.add(service.id)

    # Link bandwidth, raw (both wired and wireless).
    load: dict[tuple[int, int], float] = {}
    for _, _, path, demand in routed:
        for key in route_links(path):
            load[key] = load.get(key, 0.0) + demand
    for key in sorted(load):
        link = graph.links[key]
        if load[key] > link.effective_bandwidth:
            out.append(
                Violation(
                    ViolationKind.BANDWIDTH,
                    f"link:{key[0]}-{key[1]}",
                    load[key],
                    link.effective_bandwidth,
                )
            )

    # Flow conservation at switches and PoAs, audited per node.
    flow_in: dict[int, float] = {}
    flow_out: dict[int, float] = {}
    for _, _, path, demand in routed:
        for a, b in zip(path, path[1:]):
            flow_out[a] = flow_out.get(a, 0.0) + demand
            flow_in[b] = flow_in.get(b, 0.0) + demand
    for nid in sorted(set(flow_in) | set(flow_out)):
        if graph.node(nid).kind not in (NodeKind.SWITCH, NodeKind.POA):
            continue
        into, outof = flow_in.get(nid, 0.0), flow_out.get(nid, 0.0)
        if into != outof:
            out.append(Violation(ViolationKind.FLOW, f"node:{nid}", into, outof))

    # Attachment cardinality and validity.
    robots_attached: set[int] = set()
    for robot in graph.robots():
        poa = embedding.attachment.get(robot)
        if poa is None:
            out.append(Violation(ViolationKind.ATTACHMENT, f"robot:{robot}", 0.0, 1.0))
            continue
        link = graph.link(robot, poa)
        if link is None or not link.wireless:
            out.append(Violation(ViolationKind.ATTACHMENT, f"robot:{robot}", 0.0, 1.0))
            continue
        robots_attached.add(robot)

    # Routes over a radio hop must use the attached PoA.
    for service, pair, path, _ in routed:
        for a, b in zip(path, path[1:]):
            link = graph.link(a, b)
            if link is None or not link.wireless:
                continue
            robot, poa = (a, b) if graph.node(a).kind is NodeKind.ROBOT else (b, a)
            if robot in robots_attached and embedding.attachment[robot] != poa:
                out.append(
                    Violation(ViolationKind.STEER_IF_ATTACHED, f"vl:{pair[0]}->{pair[1]}", 0.0, 1.0)
                )
                break

    # Wireless capacity under the current radio state.
    for key in sorted(load):
        link = graph.links[key]
        if not link.wireless:
            continue
        a, b = link.endpoints
        robot, poa = (a, b) if graph.node(a).kind is NodeKind.ROBOT else (b, a)
        cap = channel_capacity(link, radio.sigma_for(robot, poa), radio.noise)
        if load[key] > cap:
            out.append(
                Violation(ViolationKind.WIRELESS_CAPACITY, f"link:{key[0]}-{key[1]}", load[key], cap)
            )

    # Queue stability, then the end-to-end deadline where it is measurable.
    for service in services:
        stable = True
        for vf in service.vfs:
            if vf.id in unplaced:
                stable = False
                continue
            host = placements[vf.id]
            rate = vf.compute * graph.node(host).processing_rate
            for vl in service.incoming(vf.id):
                if rate <= vl.demand:
                    out.append(
                        Violation(ViolationKind.STABILITY, f"vf:{vf.id}", vl.demand, rate)
                    )
                    stable = False
        if not stable or service.id in broken_services:
            continue
        report = delay_report(graph, service, embedding)
        if report.total > service.deadline:
            out.append(
                Violation(
                    ViolationKind.DEADLINE, f"service:{service.id}", report.total, service.deadline
                )
            )

    out.sort(key=lambda v: (_KIND_ORDER[v.kind], v.location, v.measured))
    return out


def edge_usage(graph: HardwareGraph, embedding: Embedding, services: Sequence[ServiceSpec]) -> float:
    """Fraction of Edge-tier (near plus far) compute consumed by the embedding."""
    from .model import Tier  # local import to keep module load light

    compute_of = _vf_compute(services)
    total = 0.0
    used = 0.0
    for node in graph.nodes.values():
        if node.kind is NodeKind.SERVER and node.tier in (Tier.NEAR_EDGE, Tier.FAR_EDGE):
            total += node.compute_capacity
            used += sum(compute_of.get(vf, 0.0) for vf in hosted_vfs(embedding, node.id))
    return used / total if total > 0 else 0.0
