"""Domain model: substrate graph, robotic services, radio state, and embeddings.

Every type in this module is immutable after construction and safe to share
across threads. Units are fixed package-wide: Mbps for bandwidth and traffic
demands, ms for delays, CPU units for compute, and linear (not dB) power
ratios for signal strength and noise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import (
    DanglingEndpointError,
    DisconnectedCoreError,
    DuplicateIdError,
    ScenarioError,
)


class NodeKind(str, Enum):
    ROBOT = "robot"
    POA = "poa"
    SWITCH = "switch"
    SERVER = "server"


class Tier(str, Enum):
    NEAR_EDGE = "near_edge"
    FAR_EDGE = "far_edge"
    CLOUD = "cloud"


#: Default per-tier server cost; higher toward the Edge, zero for non-servers.
#: Scenarios may override per node.
DEFAULT_TIER_COST = {Tier.CLOUD: 1.0, Tier.FAR_EDGE: 2.0, Tier.NEAR_EDGE: 4.0}

#: Tiers ordered from the robot outward; cost must not increase along this order.
_TIER_EDGE_FIRST = (Tier.NEAR_EDGE, Tier.FAR_EDGE, Tier.CLOUD)


def link_key(a: int, b: int) -> tuple[int, int]:
    """Canonical unordered key for the link between nodes ``a`` and ``b``."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Node:
    """A substrate node: robot, point of access, switch, or tiered server."""

    id: int
    kind: NodeKind
    compute_capacity: float = 0.0  # CPU units, >= 0
    cost: float = 0.0  # dimensionless usage cost, >= 0
    processing_rate: float = 0.0  # requests/ms per CPU unit; > 0 for robot/server
    tier: Optional[Tier] = None  # servers only
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.compute_capacity < 0:
            raise ScenarioError(f"node {self.id}: compute_capacity must be >= 0")
        if self.cost < 0:
            raise ScenarioError(f"node {self.id}: cost must be >= 0")
        if self.kind in (NodeKind.SWITCH, NodeKind.POA):
            if self.compute_capacity != 0:
                raise ScenarioError(f"node {self.id}: {self.kind.value} nodes host no functions")
            if self.processing_rate != 0:
                raise ScenarioError(f"node {self.id}: {self.kind.value} nodes have no processing rate")
        else:
            if self.processing_rate <= 0:
                raise ScenarioError(f"node {self.id}: {self.kind.value} nodes need processing_rate > 0")
        if self.kind is NodeKind.SERVER and self.tier is None:
            raise ScenarioError(f"node {self.id}: servers must declare a tier")
        if self.kind is not NodeKind.SERVER and self.tier is not None:
            raise ScenarioError(f"node {self.id}: only servers carry a tier")


@dataclass(frozen=True)
class Link:
    """An undirected substrate link with symmetric attributes."""

    endpoints: tuple[int, int]
    bandwidth: float  # Mbps, > 0
    delay: float = 0.0  # ms
    queuing: float = 0.0  # ms
    drop: float = 0.0  # packet drop fraction in [0, 1]
    wireless: bool = False

    def __post_init__(self) -> None:
        a, b = self.endpoints
        if a == b:
            raise ScenarioError(f"link ({a},{b}): self-loops are not allowed")
        if self.bandwidth <= 0:
            raise ScenarioError(f"link ({a},{b}): bandwidth must be > 0")
        if self.delay < 0 or self.queuing < 0:
            raise ScenarioError(f"link ({a},{b}): delay and queuing must be >= 0")
        if not 0.0 <= self.drop <= 1.0:
            raise ScenarioError(f"link ({a},{b}): drop must lie in [0, 1]")

    @property
    def key(self) -> tuple[int, int]:
        return link_key(*self.endpoints)

    @property
    def effective_bandwidth(self) -> float:
        """Bandwidth left after packet drops: (1 - drop) * bandwidth."""
        return (1.0 - self.drop) * self.bandwidth


class HardwareGraph:
    """Validated substrate graph with adjacency indexes.

    Immutable after construction; equality compares node and link sets.
    """

    def __init__(self, nodes: Iterable[Node], links: Iterable[Link]) -> None:
        self.nodes: dict[int, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise DuplicateIdError(f"duplicate node id {node.id}")
            self.nodes[node.id] = node

        self.links: dict[tuple[int, int], Link] = {}
        for link in links:
            a, b = link.endpoints
            for end in link.endpoints:
                if end not in self.nodes:
                    raise DanglingEndpointError(f"link ({a},{b}) references unknown node {end}")
            if link.key in self.links:
                raise DuplicateIdError(f"duplicate link over pair {link.key}")
            kinds = {self.nodes[a].kind, self.nodes[b].kind}
            is_robot_poa = kinds == {NodeKind.ROBOT, NodeKind.POA}
            if link.wireless != is_robot_poa:
                raise ScenarioError(
                    f"link ({a},{b}): wireless flag must match robot-PoA endpoints"
                )
            self.links[link.key] = link

        self.adjacency: dict[int, list[tuple[int, Link]]] = {nid: [] for nid in self.nodes}
        for link in self.links.values():
            a, b = link.endpoints
            self.adjacency[a].append((b, link))
            self.adjacency[b].append((a, link))
        for nid in self.adjacency:
            self.adjacency[nid].sort(key=lambda item: item[0])

        self._validate_topology()

    def _validate_topology(self) -> None:
        core = sorted(nid for nid, n in self.nodes.items() if n.kind is not NodeKind.ROBOT)
        if core:
            seen = {core[0]}
            queue = deque(seen)
            while queue:
                nid = queue.popleft()
                for nbr, _ in self.adjacency[nid]:
                    if self.nodes[nbr].kind is NodeKind.ROBOT or nbr in seen:
                        continue
                    seen.add(nbr)
                    queue.append(nbr)
            if len(seen) != len(core):
                raise DisconnectedCoreError(
                    f"non-robot core is disconnected ({len(seen)}/{len(core)} reachable)"
                )
        for nid in self.robots():
            if not self.wireless_links(nid):
                raise ScenarioError(f"robot {nid} has no wireless link to any PoA")
        costs = {}
        for node in self.nodes.values():
            if node.kind is NodeKind.SERVER:
                costs.setdefault(node.tier, set()).add(node.cost)
        present = [t for t in _TIER_EDGE_FIRST if t in costs]
        for closer, farther in zip(present, present[1:]):
            if min(costs[closer]) < max(costs[farther]):
                raise ScenarioError(
                    f"tier costs must not increase toward the Cloud "
                    f"({closer.value} < {farther.value})"
                )

    # -- lookups -------------------------------------------------------------

    def node(self, nid: int) -> Node:
        return self.nodes[nid]

    def link(self, a: int, b: int) -> Optional[Link]:
        return self.links.get(link_key(a, b))

    def neighbors(self, nid: int) -> list[tuple[int, Link]]:
        return self.adjacency[nid]

    def robots(self) -> list[int]:
        return sorted(nid for nid, n in self.nodes.items() if n.kind is NodeKind.ROBOT)

    def poas(self) -> list[int]:
        return sorted(nid for nid, n in self.nodes.items() if n.kind is NodeKind.POA)

    def servers(self, tier: Optional[Tier] = None) -> list[int]:
        return sorted(
            nid
            for nid, n in self.nodes.items()
            if n.kind is NodeKind.SERVER and (tier is None or n.tier is tier)
        )

    def compute_nodes(self) -> list[int]:
        """Nodes that may host functions (positive compute capacity)."""
        return sorted(nid for nid, n in self.nodes.items() if n.compute_capacity > 0)

    def wireless_links(self, robot: int) -> list[Link]:
        return [link for _, link in self.adjacency[robot] if link.wireless]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HardwareGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links

    def __repr__(self) -> str:
        return f"HardwareGraph(nodes={len(self.nodes)}, links={len(self.links)})"


def build_graph(nodes: Iterable[Node], links: Iterable[Link]) -> HardwareGraph:
    """Validate and index a substrate graph."""
    return HardwareGraph(nodes, links)


@dataclass(frozen=True)
class VfSpec:
    """One virtual function of a service chain."""

    id: int
    compute: float  # CPU units demanded
    pin: Optional[int] = None  # node that must host this function, if any


@dataclass(frozen=True)
class VlSpec:
    """A directed virtual link between two functions of the same service."""

    src: int
    dst: int
    demand: float  # Mbps, >= 0

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class ServiceSpec:
    """A robotic service: an ordered function chain, its links, and a deadline."""

    id: int
    vfs: tuple[VfSpec, ...]
    vls: tuple[VlSpec, ...]
    deadline: float  # ms; end-to-end budget for network plus processing delay

    def __post_init__(self) -> None:
        if self.deadline < 0:
            raise ScenarioError(f"service {self.id}: deadline must be >= 0")
        ids = [vf.id for vf in self.vfs]
        if len(ids) != len(set(ids)):
            raise ScenarioError(f"service {self.id}: duplicate function ids")
        declared = set(ids)
        seen_pairs = set()
        for vl in self.vls:
            if vl.src not in declared or vl.dst not in declared:
                raise ScenarioError(f"service {self.id}: VL {vl.pair} references unknown function")
            if vl.src == vl.dst:
                raise ScenarioError(f"service {self.id}: VL {vl.pair} is a self-loop")
            if vl.demand < 0:
                raise ScenarioError(f"service {self.id}: VL {vl.pair} demand must be >= 0")
            if vl.pair in seen_pairs:
                raise ScenarioError(f"service {self.id}: duplicate VL {vl.pair}")
            seen_pairs.add(vl.pair)

    def vf(self, vf_id: int) -> VfSpec:
        for vf in self.vfs:
            if vf.id == vf_id:
                return vf
        raise KeyError(vf_id)

    def vl(self, src: int, dst: int) -> Optional[VlSpec]:
        for vl in self.vls:
            if vl.pair == (src, dst):
                return vl
        return None

    def incoming(self, vf_id: int) -> list[VlSpec]:
        return [vl for vl in self.vls if vl.dst == vf_id]

    def first_wireless_demand(self) -> float:
        """Demand of the first chain link, the one that crosses the radio hop."""
        if len(self.vfs) >= 2:
            vl = self.vl(self.vfs[0].id, self.vfs[1].id)
            if vl is not None:
                return vl.demand
        return 0.0


@dataclass(frozen=True)
class RadioState:
    """Signal strength per (robot, PoA) pair and the global noise floor."""

    sigma: Mapping[tuple[int, int], float]
    noise: float  # linear power units, > 0

    def __post_init__(self) -> None:
        if self.noise <= 0:
            raise ScenarioError("noise must be > 0")
        for pair, value in self.sigma.items():
            if value < 0:
                raise ScenarioError(f"sigma for {pair} must be >= 0")

    def sigma_for(self, robot: int, poa: int) -> float:
        """Signal strength for a pair; pairs without a reading count as 0."""
        return self.sigma.get((robot, poa), 0.0)


@dataclass(frozen=True)
class Embedding:
    """A full decision: function placements, routed paths, and PoA attachments.

    Routes map each virtual link to the full node path of its traffic,
    endpoints included. Functions placed on the same node use an empty path.
    """

    placements: Mapping[int, int] = field(default_factory=dict)
    routes: Mapping[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    attachment: Mapping[int, int] = field(default_factory=dict)


def route_links(path: tuple[int, ...]) -> list[tuple[int, int]]:
    """Unordered link keys traversed by a node path."""
    return [link_key(a, b) for a, b in zip(path, path[1:])]


def hosted_vfs(embedding: Embedding, node: int) -> set[int]:
    """Functions the embedding assigns to ``node``."""
    return {vf for vf, host in embedding.placements.items() if host == node}


def hosted_vls(embedding: Embedding, endpoints: tuple[int, int]) -> set[tuple[int, int]]:
    """Virtual links whose route traverses the link, in either direction."""
    key = link_key(*endpoints)
    return {vl for vl, path in embedding.routes.items() if key in route_links(path)}
