"""Exhaustive optimal embedding search plus an independent bin-packing check.

``optimal_solve`` enumerates every placement, attachment, and (capped) route
combination, so it is only meant for desk-scale instances; a search budget
guards against accidental blow-ups. Among feasible embeddings it returns the
one minimizing total hosting cost, with ties broken by (number of used hosting
nodes, total delay, lexicographic placement). The used-node tie-break makes
equal-cost optima consolidate onto as few servers as possible, which is what
the bin-packing equivalence below measures.

``binpack_bruteforce`` solves minimum bin count by direct partition search and
shares no code with the embedding enumerator, so the two can cross-check each
other on the restricted "two functions, zero demand, no deadline" services.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .errors import BudgetExceededError, InfeasibleError, NotIdealError
from .feasibility import channel_capacity, check_embedding, delay_report
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    NodeKind,
    RadioState,
    ServiceSpec,
    link_key,
)
from .routing import cheapest_paths, delay_weight


@dataclass(frozen=True)
class BinPackingInstance:
    """Uniform-capacity bin packing: item sizes and the common bin size."""

    bin_capacity: float
    item_sizes: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.bin_capacity <= 0:
            raise ValueError("bin capacity must be > 0")
        for size in self.item_sizes:
            if size <= 0 or size > self.bin_capacity:
                raise ValueError(f"item size {size} outside (0, {self.bin_capacity}]")


def reduce_to_binpacking(
    ideal_services: Sequence[ServiceSpec], server_capacity: float
) -> BinPackingInstance:
    """Map restricted services onto a bin-packing instance.

    Each service must consist of exactly two functions, the first pinned,
    joined by a single zero-demand link, with no deadline; the second
    functions become the items and the uniform server capacity the bin size.
    """
    sizes = []
    for service in ideal_services:
        if len(service.vfs) != 2:
            raise NotIdealError(f"service {service.id}: needs exactly two functions")
        first, second = service.vfs
        if first.pin is None or second.pin is not None:
            raise NotIdealError(f"service {service.id}: first function must be the pinned one")
        if len(service.vls) != 1 or service.vls[0].pair != (first.id, second.id):
            raise NotIdealError(f"service {service.id}: needs the single chain link")
        if service.vls[0].demand != 0:
            raise NotIdealError(f"service {service.id}: link demand must be zero")
        if not math.isinf(service.deadline):
            raise NotIdealError(f"service {service.id}: deadline must be unbounded")
        sizes.append(second.compute)
    return BinPackingInstance(server_capacity, tuple(sizes))


def binpack_bruteforce(instance: BinPackingInstance, *, max_items: int = 10) -> int:
    """Exact minimum bin count by exhaustive partition search."""
    items = instance.item_sizes
    if len(items) > max_items:
        raise BudgetExceededError(f"{len(items)} items exceed the {max_items}-item guard")
    if not items:
        return 0
    best = len(items)  # one bin per item always works

    def descend(index: int, bins: list[float]) -> None:
        nonlocal best
        if len(bins) >= best:
            return
        if index == len(items):
            best = len(bins)
            return
        size = items[index]
        for i, free in enumerate(bins):
            if size <= free:
                bins[i] = free - size
                descend(index + 1, bins)
                bins[i] = free
        bins.append(instance.bin_capacity - size)
        descend(index + 1, bins)
        bins.pop()

    descend(0, [])
    return best


@dataclass(frozen=True)
class OptimalResult:
    embedding: Embedding
    cost: float
    total_delay: float


def _used_nodes(placements: dict[int, int]) -> int:
    return len(set(placements.values()))


def optimal_solve(
    graph: HardwareGraph,
    services: Sequence[ServiceSpec],
    radio: RadioState,
    *,
    budget: int = 10_000_000,
    k_paths: int = 3,
    max_hops: int = 6,
) -> OptimalResult:
    """Minimum-cost feasible embedding of all services jointly.

    Raises BudgetExceededError when the enumeration space is too large and
    InfeasibleError when no embedding satisfies every constraint.
    """
    pins: dict[int, int] = {}
    unpinned: list[tuple[ServiceSpec, int, float]] = []
    pinned_load: dict[int, float] = {}
    for service in services:
        for vf in service.vfs:
            if vf.pin is not None:
                pins[vf.id] = vf.pin
                pinned_load[vf.pin] = pinned_load.get(vf.pin, 0.0) + vf.compute
            else:
                unpinned.append((service, vf.id, vf.compute))

    candidates: list[list[int]] = []
    for _, _, compute in unpinned:
        fits = [
            nid
            for nid in graph.compute_nodes()
            if graph.node(nid).compute_capacity - pinned_load.get(nid, 0.0) >= compute
        ]
        candidates.append(fits)

    # Robots anchoring pinned functions get their attachment enumerated; idle
    # robots are attached to their lowest-id PoA (they carry no traffic).
    traffic_robots = sorted(
        {pin for pin in pins.values() if graph.node(pin).kind is NodeKind.ROBOT}
    )
    attach_choices: list[list[int]] = []
    fixed_attach: dict[int, int] = {}
    for robot in graph.robots():
        poas = sorted(
            link.endpoints[1] if link.endpoints[0] == robot else link.endpoints[0]
            for link in graph.wireless_links(robot)
        )
        if robot in traffic_robots:
            attach_choices.append(poas)
        else:
            fixed_attach[robot] = poas[0]

    space = 1
    for fits in candidates:
        space *= max(len(fits), 1)
    for poas in attach_choices:
        space *= len(poas)
    if space > budget:
        raise BudgetExceededError(f"search space {space} exceeds budget {budget}")
    if any(not fits for fits in candidates):
        raise InfeasibleError("some function fits on no node")

    all_vls = [
        (service, vl) for service in services for vl in service.vls
    ]
    best: Optional[tuple] = None  # (cost, used, delay, lex placements, lex attach)
    best_result: Optional[OptimalResult] = None

    def route_all(
        placements: dict[int, int], attachment: dict[int, int]
    ) -> Optional[tuple[float, dict[tuple[int, int], tuple[int, ...]]]]:
        """Min-delay feasible routing for a fixed placement, or None."""

        def allowed(link: Link) -> bool:
            if not link.wireless:
                return True
            a, b = link.endpoints
            robot = a if graph.node(a).kind is NodeKind.ROBOT else b
            poa = b if robot == a else a
            return attachment.get(robot) == poa

        options: list[tuple[tuple[int, int], float, list[tuple[int, ...]]]] = []
        for service, vl in all_vls:
            src_host, dst_host = placements[vl.src], placements[vl.dst]
            if src_host == dst_host:
                continue
            paths = cheapest_paths(
                graph, src_host, dst_host, k_paths, delay_weight, max_hops, allowed
            )
            if not paths:
                return None
            options.append((vl.pair, vl.demand, paths))

        best_combo: Optional[tuple[float, tuple]] = None

        def descend(
            index: int, load: dict[tuple[int, int], float], delay_sum: float, chosen: list
        ) -> None:
            nonlocal best_combo
            if best_combo is not None and delay_sum >= best_combo[0]:
                return
            if index == len(options):
                best_combo = (delay_sum, tuple(chosen))
                return
            pair, demand, paths = options[index]
            for path in paths:
                extra = 0.0
                touched: list[tuple[tuple[int, int], Optional[float]]] = []
                ok = True
                for a, b in zip(path, path[1:]):
                    key = link_key(a, b)
                    link = graph.links[key]
                    new_load = load.get(key, 0.0) + demand
                    if new_load > link.effective_bandwidth:
                        ok = False
                        break
                    if link.wireless:
                        robot = a if graph.node(a).kind is NodeKind.ROBOT else b
                        poa = b if robot == a else a
                        if new_load > channel_capacity(
                            link, radio.sigma_for(robot, poa), radio.noise
                        ):
                            ok = False
                            break
                    touched.append((key, load.get(key)))
                    load[key] = new_load
                    extra += link.delay + link.queuing
                if ok:
                    chosen.append((pair, path))
                    descend(index + 1, load, delay_sum + extra, chosen)
                    chosen.pop()
                for key, previous in reversed(touched):
                    if previous is None:
                        del load[key]
                    else:
                        load[key] = previous

        descend(0, {}, 0.0, [])
        if best_combo is None:
            return None
        return best_combo[0], {pair: path for pair, path in best_combo[1]}

    order = sorted(range(len(unpinned)), key=lambda i: (unpinned[i][0].id, unpinned[i][1]))
    min_remaining_cost = [0.0] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        fits = candidates[order[pos]]
        cheapest = min(graph.node(nid).cost for nid in fits)
        min_remaining_cost[pos] = min_remaining_cost[pos + 1] + cheapest

    def evaluate(placements: dict[int, int], attachment: dict[int, int]) -> None:
        nonlocal best, best_result
        routed = route_all(placements, attachment)
        if routed is None:
            return
        _, routes = routed
        embedding = Embedding(dict(placements), routes, dict(attachment))
        if check_embedding(graph, services, embedding, radio):
            return
        cost = sum(graph.node(host).cost for host in placements.values())
        total_delay = 0.0
        for service in services:
            total_delay += delay_report(graph, service, embedding).total
        lex_place = tuple(placements[vf] for _, vf, _ in
                          sorted(((s.id, vf, c) for s, vf, c in unpinned)))
        lex_attach = tuple(attachment[r] for r in sorted(attachment))
        key = (cost, _used_nodes(placements), total_delay, lex_place, lex_attach)
        if best is None or key < best:
            best = key
            best_result = OptimalResult(embedding, cost, total_delay)

    base_cost = sum(graph.node(pin).cost for pin in pins.values())

    for combo in product(*attach_choices) if attach_choices else [()]:
        attachment = dict(fixed_attach)
        attachment.update(zip(traffic_robots, combo))

        used_load: dict[int, float] = dict(pinned_load)
        placements: dict[int, int] = dict(pins)

        def place(pos: int, cost_so_far: float) -> None:
            if best is not None:
                bound = cost_so_far + min_remaining_cost[pos]
                partial_used = _used_nodes(placements)
                if (bound, partial_used) > (best[0], best[1]):
                    return
            if pos == len(order):
                evaluate(placements, attachment)
                return
            service, vf_id, compute = unpinned[order[pos]]
            for nid in candidates[order[pos]]:
                if used_load.get(nid, 0.0) + compute > graph.node(nid).compute_capacity:
                    continue
                placements[vf_id] = nid
                used_load[nid] = used_load.get(nid, 0.0) + compute
                place(pos + 1, cost_so_far + graph.node(nid).cost)
                used_load[nid] -= compute
                del placements[vf_id]

        place(0, base_cost)

    if best_result is None:
        raise InfeasibleError("no feasible embedding exists")
    return best_result
