"""Shared fixtures: small graphs, random feasible scenarios, fault injectors."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

import pytest

from vfembed.dlmd import place_service
from vfembed.errors import NoCoverageError, NoFeasiblePlacementError
from vfembed.feasibility import ViolationKind, delay_report
from vfembed.model import (
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
    link_key,
    route_links,
)
from vfembed.routing import dijkstra, delay_weight, path_from_parents
from vfembed.scenario import warehouse_scenario

TIER_COSTS = {Tier.CLOUD: 1.0, Tier.FAR_EDGE: 2.0, Tier.NEAR_EDGE: 4.0}

#: Pass/fail lines collected by the acceptance module, echoed at session end.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def warehouse():
    return warehouse_scenario()


def tiny_graph() -> HardwareGraph:
    """1 robot, 1 PoA, 1 server; the smallest valid substrate."""
    nodes = [
        Node(0, NodeKind.ROBOT, compute_capacity=1.0, processing_rate=26.0),
        Node(1, NodeKind.POA),
        Node(2, NodeKind.SERVER, compute_capacity=4.0, cost=1.0,
             processing_rate=26.0, tier=Tier.CLOUD),
    ]
    links = [
        Link((0, 1), bandwidth=100.0, wireless=True),
        Link((1, 2), bandwidth=1000.0, delay=2.0),
    ]
    return build_graph(nodes, links)


@dataclass
class RandomCase:
    """One random feasible scenario plus the greedy solution on it."""

    graph: HardwareGraph
    service: ServiceSpec
    radio: RadioState
    robot: int
    embedding: Embedding


def random_case(seed: int) -> RandomCase:
    """A random scenario on which the greedy placer found a feasible embedding.

    Scenarios are drawn until one is solvable; shapes vary (1-3 PoAs, 2-4
    servers, 0-2 switches, 2-4 function chains). Deadlines leave generous
    slack so detour-style fault injections cannot trip the deadline check.
    """
    rng = random.Random(seed)
    for attempt in range(50):
        graph, service, radio, robot = _draw_scenario(rng)
        try:
            # self-verification off: the tests audit feasibility themselves
            embedding = place_service(graph, service, robot, radio, verify=False)
        except (NoCoverageError, NoFeasiblePlacementError):
            continue
        return RandomCase(graph, service, radio, robot, embedding)
    raise AssertionError(f"seed {seed}: no solvable scenario in 50 draws")


def _draw_scenario(rng: random.Random):
    n_poas = rng.randint(1, 3)
    n_servers = rng.randint(2, 4)
    n_switches = rng.randint(0, 2)
    n_vfs = rng.randint(2, 4)

    robot = 0
    poa_ids = list(range(1, 1 + n_poas))
    server_ids = list(range(1 + n_poas, 1 + n_poas + n_servers))
    switch_ids = list(range(1 + n_poas + n_servers, 1 + n_poas + n_servers + n_switches))

    pinned_compute = float(rng.randint(1, 2))
    nodes = [Node(robot, NodeKind.ROBOT, compute_capacity=pinned_compute, processing_rate=26.0)]
    nodes += [Node(pid, NodeKind.POA) for pid in poa_ids]
    tiers = [rng.choice(list(TIER_COSTS)) for _ in server_ids]
    nodes += [
        Node(sid, NodeKind.SERVER, compute_capacity=float(rng.randint(4, 10)),
             cost=TIER_COSTS[tier], processing_rate=26.0, tier=tier)
        for sid, tier in zip(server_ids, tiers)
    ]
    nodes += [Node(wid, NodeKind.SWITCH) for wid in switch_ids]

    core = poa_ids + server_ids + switch_ids
    rng.shuffle(core)
    pairs = {tuple(sorted(p)) for p in zip(core, core[1:])}
    for a in core:
        for b in core:
            if a < b and rng.random() < 0.25:
                pairs.add((a, b))
    links = [
        Link(pair, bandwidth=rng.uniform(100.0, 1000.0), delay=rng.uniform(0.5, 4.0))
        for pair in sorted(pairs)
    ]
    links += [
        Link((robot, pid), bandwidth=rng.uniform(100.0, 200.0), wireless=True)
        for pid in poa_ids
    ]
    graph = build_graph(nodes, links)

    vfs = [VfSpec(0, compute=pinned_compute, pin=robot)]
    vfs += [VfSpec(i, compute=float(rng.randint(1, 3))) for i in range(1, n_vfs)]
    vls = tuple(
        VlSpec(i, i + 1, demand=float(rng.randint(5, 30))) for i in range(n_vfs - 1)
    )
    service = ServiceSpec(id=0, vfs=tuple(vfs), vls=vls, deadline=60.0)

    sigma = {(robot, pid): rng.uniform(1.0, 5.0) for pid in poa_ids}
    radio = RadioState(sigma, noise=1.0)
    return graph, service, radio, robot


# -- fault injection -----------------------------------------------------------

#: Kinds a single surgical mutation can produce. Flow violations cannot occur
#: for path-represented routes (conservation holds by construction), so Flow
#: has no injector.
INJECTABLE_KINDS = (
    ViolationKind.COMPUTE,
    ViolationKind.VF_UNPLACED,
    ViolationKind.BANDWIDTH,
    ViolationKind.VL_UNROUTED,
    ViolationKind.STEER_TO_VF,
    ViolationKind.DEADLINE,
    ViolationKind.STEER_IF_ATTACHED,
    ViolationKind.ATTACHMENT,
    ViolationKind.WIRELESS_CAPACITY,
    ViolationKind.STABILITY,
)


def _rebuild_graph(graph: HardwareGraph, new_nodes=None, new_links=None) -> HardwareGraph:
    nodes = dict(graph.nodes)
    if new_nodes:
        nodes.update({n.id: n for n in new_nodes})
    links = {l.key: l for l in graph.links.values()}
    if new_links:
        links.update({l.key: l for l in new_links})
    return build_graph(nodes.values(), links.values())


def _offloaded_vf(case: RandomCase) -> tuple[int, int]:
    """An unpinned function and its (non-robot) host."""
    for vf in case.service.vfs:
        if vf.pin is None:
            return vf.id, case.embedding.placements[vf.id]
    raise AssertionError("case has no unpinned function")


def _routed_vl(case: RandomCase):
    """A virtual link with a non-empty route."""
    for vl in case.service.vls:
        path = case.embedding.routes.get(vl.pair)
        if path:
            return vl, path
    raise AssertionError("case has no routed link")


def inject_fault(case: RandomCase, kind: ViolationKind):
    """Mutate one input so that exactly ``kind`` is violated.

    Returns (graph, services, embedding, radio); None when this case offers
    no surgical target for the kind (rare; e.g. no detour endpoint exists).
    """
    graph, service, radio = case.graph, case.service, case.radio
    embedding = case.embedding

    if kind is ViolationKind.COMPUTE:
        vf_id, host = _offloaded_vf(case)
        used = sum(
            case.service.vf(v).compute
            for v, h in embedding.placements.items()
            if h == host
        )
        node = graph.node(host)
        shrunk = replace(node, compute_capacity=max(used - 0.5, 0.0))
        return _rebuild_graph(graph, new_nodes=[shrunk]), [service], embedding, radio

    if kind is ViolationKind.VF_UNPLACED:
        vf_id, _ = _offloaded_vf(case)
        placements = {v: h for v, h in embedding.placements.items() if v != vf_id}
        return graph, [service], replace(embedding, placements=placements), radio

    if kind is ViolationKind.BANDWIDTH:
        vl, path = _routed_vl(case)
        for key in route_links(path):
            link = graph.links[key]
            if link.wireless:
                continue
            load = sum(
                v.demand
                for v in service.vls
                if key in route_links(embedding.routes.get(v.pair, ()))
            )
            if load <= 0:
                continue
            squeezed = replace(link, bandwidth=load * 0.9)
            return _rebuild_graph(graph, new_links=[squeezed]), [service], embedding, radio
        return None

    if kind is ViolationKind.VL_UNROUTED:
        vl, _ = _routed_vl(case)
        routes = {p: r for p, r in embedding.routes.items() if p != vl.pair}
        return graph, [service], replace(embedding, routes=routes), radio

    if kind is ViolationKind.STEER_TO_VF:
        vl, path = _routed_vl(case)
        src_host = path[0]
        dst_host = path[-1]
        robot = case.robot
        attach = embedding.attachment[robot]

        def allowed(link):
            return not link.wireless or link.key == link_key(robot, attach)

        report = delay_report(graph, service, embedding)
        slack = service.deadline - report.total
        dist, parent = dijkstra(graph, src_host, delay_weight, allowed)
        old_delay = sum(
            graph.links[k].delay + graph.links[k].queuing for k in route_links(path)
        )
        for target in graph.servers():
            if target in (dst_host, src_host) or target not in dist:
                continue
            if dist[target] > old_delay + slack:
                continue
            detour = path_from_parents(parent, src_host, target)
            routes = dict(embedding.routes)
            routes[vl.pair] = detour
            return graph, [service], replace(embedding, routes=routes), radio
        return None

    if kind is ViolationKind.DEADLINE:
        report = delay_report(graph, service, embedding)
        if report.total <= 0:
            return None
        tightened = ServiceSpec(
            id=service.id, vfs=service.vfs, vls=service.vls, deadline=report.total * 0.9
        )
        return graph, [tightened], embedding, radio

    if kind is ViolationKind.STEER_IF_ATTACHED:
        robot = case.robot
        attach = embedding.attachment[robot]
        crosses = any(
            link_key(robot, attach) in route_links(p) for p in embedding.routes.values()
        )
        others = [p for p in graph.poas() if p != attach and graph.link(robot, p)]
        if not crosses or not others:
            return None
        attachment = dict(embedding.attachment)
        attachment[robot] = others[0]
        return graph, [service], replace(embedding, attachment=attachment), radio

    if kind is ViolationKind.ATTACHMENT:
        return graph, [service], replace(embedding, attachment={}), radio

    if kind is ViolationKind.WIRELESS_CAPACITY:
        robot = case.robot
        attach = embedding.attachment[robot]
        key = link_key(robot, attach)
        load = sum(
            vl.demand
            for vl in service.vls
            if key in route_links(embedding.routes.get(vl.pair, ()))
        )
        if load <= 0:
            return None
        # sigma low enough that capacity drops just below the carried load
        link = graph.links[key]
        target_cap = load * 0.9
        sigma = dict(case.radio.sigma)
        sigma[(robot, attach)] = 2 ** (target_cap / link.effective_bandwidth) - 1
        return graph, [service], embedding, RadioState(sigma, case.radio.noise)

    if kind is ViolationKind.STABILITY:
        for vf in service.vfs:
            incoming = service.incoming(vf.id)
            if not incoming or min(vl.demand for vl in incoming) <= 0:
                continue
            host = embedding.placements[vf.id]
            node = graph.node(host)
            starved = replace(node, processing_rate=1e-6)
            return _rebuild_graph(graph, new_nodes=[starved]), [service], embedding, radio
        return None

    raise AssertionError(f"no injector for {kind}")
