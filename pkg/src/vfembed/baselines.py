"""Reconstructed comparison placers.

Neither of these is a faithful reimplementation of prior systems; they are
minimal reconstructions of two documented failure modes, for side-by-side
experiments:

* ``latency_agnostic_solve`` fills the cheapest servers first and never looks
  at the delay budget, so it keeps traffic on the Cloud even when the current
  PoA has a slow path to it.
* ``radio_agnostic_solve`` is the greedy tau placer with the radio model
  stripped out: PoA pruning and wireless capacity checks use the raw link
  bandwidth instead of the signal-dependent capacity, so it happily steers
  traffic over radio links that cannot carry it. Its output may therefore
  fail the wireless-capacity check; the simulator records such steps as
  connectivity loss.
"""

from __future__ import annotations

from typing import Optional

from .dlmd import ResourceUsage, place_service
from .errors import NoFeasibleCapacityError
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    RadioState,
    ServiceSpec,
    link_key,
)
from .routing import dijkstra, path_from_parents


def radio_agnostic_solve(
    graph: HardwareGraph,
    service: ServiceSpec,
    robot: int,
    radio: RadioState,
    *,
    usage: Optional[ResourceUsage] = None,
    alpha: float = 1.0,
) -> Embedding:
    """Greedy tau placement that trusts raw link bandwidth over the radio state."""
    return place_service(
        graph,
        service,
        robot,
        radio,
        usage=usage,
        alpha=alpha,
        use_effective_capacity=False,
        verify=False,
    )


def latency_agnostic_solve(
    graph: HardwareGraph,
    service: ServiceSpec,
    robot: int,
    radio: RadioState,
    *,
    usage: Optional[ResourceUsage] = None,
) -> Embedding:
    """Cheapest-server-first placement that ignores the delay budget entirely.

    Attaches to the strongest-signal PoA, places every unpinned function on
    the cheapest server with free capacity (Cloud first), and routes over the
    plain inverse-bandwidth shortest path. Raises NoFeasibleCapacityError when
    some function fits nowhere.
    """
    shared = usage if usage is not None else ResourceUsage()
    work = shared.copy()

    best = None
    for link in graph.wireless_links(robot):
        a, b = link.endpoints
        poa = b if a == robot else a
        strength = radio.sigma_for(robot, poa)
        if best is None or (-strength, poa) < best:
            best = (-strength, poa)
    attach = best[1]
    attach_key = link_key(robot, attach)

    def allowed(link: Link) -> bool:
        return not link.wireless or link.key == attach_key

    servers = sorted(
        graph.servers(), key=lambda nid: (graph.node(nid).cost, nid)
    )

    placements: dict[int, int] = {}
    routes: dict[tuple[int, int], tuple[int, ...]] = {}

    def route(src_host: int, dst_host: int) -> tuple[int, ...]:
        if src_host == dst_host:
            return ()
        dist, parent = dijkstra(graph, src_host, lambda l: 1.0 / l.bandwidth, allowed)
        if dst_host not in dist:
            raise NoFeasibleCapacityError(
                f"service {service.id}: no route {src_host} -> {dst_host}"
            )
        return path_from_parents(parent, src_host, dst_host)

    for vf in service.vfs:
        if vf.pin is not None:
            host = vf.pin
            if work.cpu.get(host, 0.0) + vf.compute > graph.node(host).compute_capacity:
                raise NoFeasibleCapacityError(
                    f"service {service.id}: pinned function {vf.id} does not fit"
                )
        else:
            host = -1
            for nid in servers:
                if work.cpu.get(nid, 0.0) + vf.compute <= graph.node(nid).compute_capacity:
                    host = nid
                    break
            if host < 0:
                raise NoFeasibleCapacityError(
                    f"service {service.id}: no server has room for function {vf.id}"
                )
        placements[vf.id] = host
        work.add_vf(host, vf.compute)
        for vl in service.vls:
            if vl.dst == vf.id and vl.src in placements:
                path = route(placements[vl.src], host)
            elif vl.src == vf.id and vl.dst in placements:
                path = route(host, placements[vl.dst])
            else:
                continue
            routes[vl.pair] = path
            if path:
                work.add_route(path, vl.demand)

    shared.absorb(work)
    return Embedding(placements, routes, {robot: attach})
