"""Deterministic shortest-path machinery over the substrate graph.

Heap entries carry the node id after the distance so equal-cost ties always
resolve toward the smaller id; regression tests rely on that order. Robots
never relay third-party traffic, so paths may start or end at a robot but
never pass through one.
"""

from __future__ import annotations

from heapq import heappop, heappush
from typing import Callable, Optional

from .model import HardwareGraph, Link, NodeKind

LinkFilter = Callable[[Link], bool]
WeightFn = Callable[[Link], float]


def link_weight(link: Link, alpha: float = 1.0) -> float:
    """Routing weight alpha/bandwidth + delay + queuing.

    The inverse-bandwidth term keeps traffic off thin links, the delay terms
    keep it off slow or congested ones. ``alpha`` rescales the bandwidth term
    (default 1, i.e. the plain 1/bandwidth + delay trade-off).
    """
    return alpha / link.bandwidth + link.delay + link.queuing


def delay_weight(link: Link) -> float:
    """Pure latency weight: propagation plus queuing delay."""
    return link.delay + link.queuing


def _transits(graph: HardwareGraph, nid: int, source: int) -> bool:
    return nid == source or graph.nodes[nid].kind is not NodeKind.ROBOT


def dijkstra(
    graph: HardwareGraph,
    source: int,
    weight: WeightFn,
    link_filter: Optional[LinkFilter] = None,
) -> tuple[dict[int, float], dict[int, int]]:
    """Single-source shortest paths.

    Returns (distance, parent) maps covering every reachable node. Links for
    which ``link_filter`` returns False are ignored.
    """
    dist: dict[int, float] = {source: 0.0}
    parent: dict[int, int] = {}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, nid = heappop(heap)
        if nid in done:
            continue
        done.add(nid)
        if not _transits(graph, nid, source):
            continue  # a robot can terminate a path but not forward traffic
        for nbr, link in graph.neighbors(nid):
            if link_filter is not None and not link_filter(link):
                continue
            nd = d + weight(link)
            if nbr not in dist or nd < dist[nbr] or (nd == dist[nbr] and nid < parent.get(nbr, nid)):
                if nbr in done:
                    continue
                dist[nbr] = nd
                parent[nbr] = nid
                heappush(heap, (nd, nbr))
    return dist, parent


def path_from_parents(parent: dict[int, int], source: int, target: int) -> tuple[int, ...]:
    """Reconstruct the node path source..target from a parent map."""
    if target == source:
        return (source,)
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return tuple(path)


def simple_paths(
    graph: HardwareGraph,
    source: int,
    target: int,
    max_hops: int,
    link_filter: Optional[LinkFilter] = None,
) -> list[tuple[int, ...]]:
    """All simple paths from source to target with at most ``max_hops`` links."""
    results: list[tuple[int, ...]] = []
    stack: list[int] = [source]
    on_path = {source}

    def extend(nid: int) -> None:
        if len(stack) - 1 >= max_hops:
            return
        for nbr, link in graph.neighbors(nid):
            if nbr in on_path:
                continue
            if link_filter is not None and not link_filter(link):
                continue
            if nbr == target:
                results.append(tuple(stack) + (nbr,))
                continue
            if graph.nodes[nbr].kind is NodeKind.ROBOT:
                continue  # robots are endpoints, never relays
            stack.append(nbr)
            on_path.add(nbr)
            extend(nbr)
            on_path.discard(nbr)
            stack.pop()

    if source == target:
        return [(source,)]
    extend(source)
    return results


def cheapest_paths(
    graph: HardwareGraph,
    source: int,
    target: int,
    k: int,
    weight: WeightFn,
    max_hops: int = 6,
    link_filter: Optional[LinkFilter] = None,
) -> list[tuple[int, ...]]:
    """The ``k`` cheapest simple paths under ``weight``, deterministically ordered."""
    candidates = simple_paths(graph, source, target, max_hops, link_filter)

    def cost(path: tuple[int, ...]) -> float:
        total = 0.0
        for a, b in zip(path, path[1:]):
            total += weight(graph.link(a, b))
        return total

    candidates.sort(key=lambda p: (cost(p), p))
    return candidates[:k]
