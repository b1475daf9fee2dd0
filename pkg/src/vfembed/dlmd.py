"""Greedy embedding heuristic driven by the cost/latency trade-off metric tau.

For every function of a service chain, candidate hosts are ranked by
``tau = host cost + shortest-path weight`` from the previous function's host,
with path weight ``alpha/bandwidth + delay + queuing`` per link. Scanning in
ascending tau, the first candidate that passes the incremental capacity,
bandwidth, stability, wireless, and deadline checks wins, and the traffic is
steered over that shortest path. Cheap (Cloud) servers therefore win whenever
latency allows, and the Edge is only paid for when it is needed.

The PoA attachment is fixed before placement from the capacity-pruned PoA set
so that every returned route is consistent with the attachment decision.
All tie-breaks order by node id, which makes the solver deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import NoCoverageError, NoFeasiblePlacementError
from .feasibility import channel_capacity, check_embedding
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    RadioState,
    ServiceSpec,
    link_key,
)
from .routing import dijkstra, link_weight, path_from_parents


@dataclass
class ResourceUsage:
    """Compute and bandwidth already committed on the substrate."""

    cpu: dict[int, float] = field(default_factory=dict)
    bandwidth: dict[tuple[int, int], float] = field(default_factory=dict)

    def copy(self) -> "ResourceUsage":
        return ResourceUsage(dict(self.cpu), dict(self.bandwidth))

    def add_vf(self, node: int, compute: float) -> None:
        self.cpu[node] = self.cpu.get(node, 0.0) + compute

    def add_route(self, path: Sequence[int], demand: float) -> None:
        for a, b in zip(path, path[1:]):
            key = link_key(a, b)
            self.bandwidth[key] = self.bandwidth.get(key, 0.0) + demand

    def absorb(self, other: "ResourceUsage") -> None:
        self.cpu = other.cpu
        self.bandwidth = other.bandwidth


@dataclass(frozen=True)
class TauCandidate:
    """A candidate host, its trade-off score, and the path that realizes it."""

    node: int
    tau: float
    path: tuple[int, ...]


def _wireless_capacity(
    link: Link, robot: int, poa: int, radio: RadioState, use_effective_capacity: bool
) -> float:
    if use_effective_capacity:
        return channel_capacity(link, radio.sigma_for(robot, poa), radio.noise)
    return link.effective_bandwidth


def prune_poas(
    graph: HardwareGraph,
    robot: int,
    first_vl_demand: float,
    radio: RadioState,
    *,
    use_effective_capacity: bool = True,
) -> list[int]:
    """PoAs whose wireless capacity covers the first chain link's demand.

    Raises NoCoverageError when no PoA qualifies (the out-of-coverage case).
    """
    kept = []
    for link in graph.wireless_links(robot):
        a, b = link.endpoints
        poa = b if a == robot else a
        cap = _wireless_capacity(link, robot, poa, radio, use_effective_capacity)
        if cap >= first_vl_demand:
            kept.append(poa)
    if not kept:
        raise NoCoverageError(f"robot {robot}: no PoA offers {first_vl_demand} Mbps")
    return sorted(kept)


def select_poa(
    graph: HardwareGraph,
    robot: int,
    pruned_poas: Sequence[int],
    radio: RadioState,
    *,
    use_effective_capacity: bool = True,
) -> int:
    """The pruned PoA minimizing 1/capacity + radio-hop delay, ties by node id."""
    if not pruned_poas:
        raise NoCoverageError(f"robot {robot}: empty PoA candidate set")
    best: Optional[tuple[float, int]] = None
    for poa in sorted(pruned_poas):
        link = graph.link(robot, poa)
        if link is None or not link.wireless:
            continue
        cap = _wireless_capacity(link, robot, poa, radio, use_effective_capacity)
        score = (1.0 / cap if cap > 0 else math.inf) + link.delay + link.queuing
        if best is None or (score, poa) < best:
            best = (score, poa)
    if best is None:
        raise NoCoverageError(f"robot {robot}: no wireless link to any pruned PoA")
    return best[1]


def tau_candidates(
    graph: HardwareGraph,
    anchor: int,
    candidates: Sequence[int],
    *,
    alpha: float = 1.0,
    link_filter=None,
) -> list[TauCandidate]:
    """Rank candidate hosts by tau from ``anchor``; unreachable nodes are omitted."""
    dist, parent = dijkstra(graph, anchor, lambda l: link_weight(l, alpha), link_filter)
    ranked = []
    for node in sorted(set(candidates)):
        if node not in dist:
            continue
        path = path_from_parents(parent, anchor, node)
        ranked.append(TauCandidate(node, graph.node(node).cost + dist[node], path))
    ranked.sort(key=lambda c: (c.tau, c.node))
    return ranked


def _path_delay(graph: HardwareGraph, path: Sequence[int]) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        link = graph.link(a, b)
        total += link.delay + link.queuing
    return total


def _processing_terms(
    graph: HardwareGraph, service: ServiceSpec, vf_id: int, host: int
) -> Optional[float]:
    """Processing delay of ``vf_id`` hosted at ``host``; None when unstable."""
    rate = service.vf(vf_id).compute * graph.node(host).processing_rate
    total = 0.0
    for vl in service.incoming(vf_id):
        headroom = rate - vl.demand
        if headroom <= 0:
            return None
        total += 1.0 / headroom
    return total


def place_service(
    graph: HardwareGraph,
    service: ServiceSpec,
    robot: int,
    radio: RadioState,
    *,
    usage: Optional[ResourceUsage] = None,
    alpha: float = 1.0,
    use_effective_capacity: bool = True,
    verify: bool = True,
) -> Embedding:
    """Embed one service chain; the result always satisfies every constraint.

    ``usage`` carries resources already consumed by previously embedded
    services and is updated in place on success. Raises NoCoverageError when
    no PoA can carry the first link and NoFeasiblePlacementError when some
    function has no candidate passing the incremental checks.
    """
    shared = usage if usage is not None else ResourceUsage()
    work = shared.copy()

    pruned = prune_poas(
        graph, robot, service.first_wireless_demand(), radio,
        use_effective_capacity=use_effective_capacity,
    )
    attach = select_poa(
        graph, robot, pruned, radio, use_effective_capacity=use_effective_capacity
    )
    attach_key = link_key(robot, attach)

    def allowed(link: Link) -> bool:
        return not link.wireless or link.key == attach_key

    placements: dict[int, int] = {}
    routes: dict[tuple[int, int], tuple[int, ...]] = {}
    d_net = 0.0
    d_pro = 0.0
    prev_host: Optional[int] = None

    def pending_vls(vf_id: int) -> list:
        """Declared links between ``vf_id`` and already-placed functions."""
        out = []
        for vl in service.vls:
            if vl.dst == vf_id and vl.src in placements:
                out.append(vl)
            elif vl.src == vf_id and vl.dst in placements:
                out.append(vl)
        return out

    def try_host(vf, host: int, anchor: Optional[int], tau_path: tuple[int, ...]):
        """Evaluate one candidate host; returns the commit payload or None."""
        if work.cpu.get(host, 0.0) + vf.compute > graph.node(host).compute_capacity:
            return None
        pro = _processing_terms(graph, service, vf.id, host)
        if pro is None:
            return None
        added_net = 0.0
        planned: list[tuple[tuple[int, int], tuple[int, ...], float]] = []
        bw_extra: dict[tuple[int, int], float] = {}
        for vl in pending_vls(vf.id):
            other = vl.src if vl.dst == vf.id else vl.dst
            other_host = placements[other]
            src_host = other_host if vl.dst == vf.id else host
            dst_host = host if vl.dst == vf.id else other_host
            if src_host == dst_host:
                path: tuple[int, ...] = ()
            elif anchor is not None and other_host == anchor and len(tau_path) >= 2:
                # steer the chain link over the path that produced the tau score
                path = tau_path if src_host == anchor else tuple(reversed(tau_path))
            else:
                dist, parent = dijkstra(
                    graph, src_host, lambda l: link_weight(l, alpha), allowed
                )
                if dst_host not in dist:
                    return None
                path = path_from_parents(parent, src_host, dst_host)
            if path:
                for a, b in zip(path, path[1:]):
                    key = link_key(a, b)
                    bw_extra[key] = bw_extra.get(key, 0.0) + vl.demand
                added_net += _path_delay(graph, path)
            planned.append((vl.pair, path, vl.demand))
        for key, extra in bw_extra.items():
            link = graph.links[key]
            load = work.bandwidth.get(key, 0.0) + extra
            if load > link.effective_bandwidth:
                return None
            if link.wireless and use_effective_capacity:
                a, b = key
                poa = b if a == robot else a
                if load > channel_capacity(link, radio.sigma_for(robot, poa), radio.noise):
                    return None
        if d_net + added_net + d_pro + pro > service.deadline:
            return None
        return pro, added_net, planned

    for vf in service.vfs:
        anchor = prev_host if prev_host is not None else robot
        if vf.pin is not None:
            attempt = try_host(vf, vf.pin, None, ())
            if attempt is None:
                raise NoFeasiblePlacementError(
                    f"service {service.id}: pinned function {vf.id} does not fit at {vf.pin}"
                )
            host = vf.pin
        else:
            candidates = tau_candidates(
                graph, anchor, graph.compute_nodes(), alpha=alpha, link_filter=allowed
            )
            attempt = None
            host = -1
            for cand in candidates:
                attempt = try_host(vf, cand.node, anchor, cand.path)
                if attempt is not None:
                    host = cand.node
                    break
            if attempt is None:
                raise NoFeasiblePlacementError(
                    f"service {service.id}: no feasible host for function {vf.id}"
                )
        pro, added_net, planned = attempt
        placements[vf.id] = host
        work.add_vf(host, vf.compute)
        for pair, path, demand in planned:
            normalized = path if len(path) >= 2 else ()
            routes[pair] = normalized
            if normalized:
                work.add_route(normalized, demand)
        d_net += added_net
        d_pro += pro
        prev_host = host

    embedding = Embedding(placements, routes, {robot: attach})
    if verify and use_effective_capacity:
        violations = check_embedding(graph, [service], embedding, radio)
        if violations:
            raise NoFeasiblePlacementError(
                f"service {service.id}: verification failed: {violations[0]}"
            )
    shared.absorb(work)
    return embedding
