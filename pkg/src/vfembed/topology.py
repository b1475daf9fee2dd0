"""Random substrate generation with per-tier link redundancy guarantees.

Core topologies are Erdos-Renyi samples over the wired nodes; designated
server nodes must come out with at least their tier's redundant link count,
otherwise the sample is rejected and redrawn. Twelve PoAs at fixed dataset
coordinates are then attached to the core and a single robot is linked
wirelessly to every PoA.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .errors import EmptyRegionError, RejectionLimitError
from .model import HardwareGraph, Link, Node, NodeKind, Tier, build_graph

_M_PER_DEG_LAT = 111_320.0


@dataclass(frozen=True)
class TierRequirement:
    count: int
    redundant_links: int

    def __post_init__(self) -> None:
        if self.count <= 0 or self.redundant_links <= 0:
            raise ValueError("tier counts and link requirements must be positive")


@dataclass(frozen=True)
class TierRedundancySpec:
    """How many servers each tier contributes and how well-connected each must be."""

    cloud: TierRequirement = TierRequirement(6, 6)
    far_edge: TierRequirement = TierRequirement(4, 4)
    near_edge: TierRequirement = TierRequirement(2, 2)

    @property
    def server_count(self) -> int:
        return self.cloud.count + self.far_edge.count + self.near_edge.count


def degree_pmf(n: int, p: float, k: int) -> float:
    """Probability that a node of an n-node G(n,p) sample has degree k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0 <= k <= n - 1:
        raise ValueError("k must lie in [0, n-1]")
    return math.comb(n - 1, k) * p**k * (1.0 - p) ** (n - 1 - k)


def _degree_tail(n: int, p: float, required: int) -> float:
    if required > n - 1:
        return 0.0
    return sum(degree_pmf(n, p, k) for k in range(required, n))


def feasible_region(
    n: int,
    spec: TierRedundancySpec,
    confidence: float,
    *,
    step: float = 0.001,
) -> list[tuple[float, float]]:
    """Edge probabilities where every tier's degree requirement holds w.h.p.

    Scans p over a uniform grid and keeps the values where the binomial tail
    P(deg >= redundant_links) reaches ``confidence`` for every tier. Returns
    the contiguous intervals of kept grid points, or raises EmptyRegionError.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    requirements = [spec.cloud, spec.far_edge, spec.near_edge]
    intervals: list[tuple[float, float]] = []
    run_start: Optional[float] = None
    steps = int(round(1.0 / step))
    for i in range(steps + 1):
        p = i * step
        ok = all(_degree_tail(n, p, req.redundant_links) >= confidence for req in requirements)
        if ok and run_start is None:
            run_start = p
        elif not ok and run_start is not None:
            intervals.append((run_start, (i - 1) * step))
            run_start = None
    if run_start is not None:
        intervals.append((run_start, 1.0))
    if not intervals:
        raise EmptyRegionError(f"no p meets the requirements for n={n}")
    return intervals


def load_poa_locations() -> list[tuple[int, float, float]]:
    """The 12 packaged PoA coordinates as (poa_id, x_m, y_m) around their centroid."""
    raw: list[tuple[int, float, float]] = []
    with resources.files("vfembed.data").joinpath("poa_locations.csv").open() as handle:
        for row in csv.DictReader(handle):
            raw.append((int(row["poa_id"]), float(row["lat"]), float(row["lon"])))
    clat = sum(lat for _, lat, _ in raw) / len(raw)
    clon = sum(lon for _, _, lon in raw) / len(raw)
    m_per_deg_lon = _M_PER_DEG_LAT * math.cos(math.radians(clat))
    return [
        (pid, (lon - clon) * m_per_deg_lon, (lat - clat) * _M_PER_DEG_LAT)
        for pid, lat, lon in raw
    ]


#: Wired link delay ranges (ms) keyed by the "deepest" endpoint class.
DEFAULT_DELAY_RANGES = {
    "cloud": (5.0, 10.0),
    "far_edge": (2.0, 5.0),
    "near_edge": (1.0, 3.0),
    "other": (0.5, 2.0),
}
DEFAULT_BANDWIDTH_RANGE = (100.0, 1000.0)
DEFAULT_TIER_COMPUTE = {Tier.CLOUD: 5.0, Tier.FAR_EDGE: 10.0, Tier.NEAR_EDGE: 10.0}
#: Experiment costs keep the tier gaps larger than any per-path delay term of
#: the routing metric, so cheap tiers win whenever the deadline allows.
DEFAULT_TIER_COST = {Tier.CLOUD: 1.0, Tier.FAR_EDGE: 20.0, Tier.NEAR_EDGE: 40.0}
DEFAULT_PROCESSING_RATE = 26.0
WIRELESS_BANDWIDTH = 100.0


def _sample_er(n: int, p: float, rng: random.Random) -> dict[int, set[int]]:
    """One raw G(n,p) adjacency sample."""
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def _core_connected(adj: dict[int, set[int]]) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        nid = stack.pop()
        for nbr in adj[nid]:
            if nbr not in seen:
                seen.add(nbr)
                stack.append(nbr)
    return len(seen) == len(adj)


def _delay_class(tier_of: dict[int, Tier], a: int, b: int) -> str:
    order = {Tier.CLOUD: 3, Tier.FAR_EDGE: 2, Tier.NEAR_EDGE: 1}
    best = 0
    cls = "other"
    for nid in (a, b):
        tier = tier_of.get(nid)
        if tier is not None and order[tier] > best:
            best = order[tier]
            cls = tier.value
    return cls


def generate(
    n: int,
    p: float,
    spec: TierRedundancySpec,
    seed: int,
    *,
    max_resamples: int = 500,
) -> HardwareGraph:
    """A substrate sample: ER core, tier servers with guaranteed redundancy,
    the 12 dataset PoAs, and one robot.

    Node ids: 0..n-1 core (servers first, switches after), n..n+11 PoAs,
    n+12 the robot. Raises RejectionLimitError when no sample within
    ``max_resamples`` meets every tier requirement on a connected core.
    """
    if n < spec.server_count + 1:
        raise ValueError(f"n must leave at least one switch beyond {spec.server_count} servers")
    rng = random.Random(seed)

    tier_of: dict[int, Tier] = {}
    nid = 0
    for tier, req in (
        (Tier.CLOUD, spec.cloud),
        (Tier.FAR_EDGE, spec.far_edge),
        (Tier.NEAR_EDGE, spec.near_edge),
    ):
        for _ in range(req.count):
            tier_of[nid] = tier
            nid += 1
    requirement = {
        nid: {
            Tier.CLOUD: spec.cloud,
            Tier.FAR_EDGE: spec.far_edge,
            Tier.NEAR_EDGE: spec.near_edge,
        }[tier].redundant_links
        for nid, tier in tier_of.items()
    }

    adj = None
    for _ in range(max_resamples):
        candidate = _sample_er(n, p, rng)
        if not _core_connected(candidate):
            continue
        if all(len(candidate[srv]) >= need for srv, need in requirement.items()):
            adj = candidate
            break
    if adj is None:
        raise RejectionLimitError(
            f"no G({n},{p}) sample met the redundancy spec in {max_resamples} tries"
        )

    nodes: list[Node] = []
    for i in range(n):
        tier = tier_of.get(i)
        if tier is not None:
            nodes.append(
                Node(
                    id=i,
                    kind=NodeKind.SERVER,
                    compute_capacity=DEFAULT_TIER_COMPUTE[tier],
                    cost=DEFAULT_TIER_COST[tier],
                    processing_rate=DEFAULT_PROCESSING_RATE,
                    tier=tier,
                )
            )
        else:
            nodes.append(Node(id=i, kind=NodeKind.SWITCH))

    poa_ids = list(range(n, n + 12))
    for pid in poa_ids:
        nodes.append(Node(id=pid, kind=NodeKind.POA, label=f"poa{pid - n}"))
    robot = n + 12
    nodes.append(
        Node(
            id=robot,
            kind=NodeKind.ROBOT,
            compute_capacity=1.0,
            processing_rate=DEFAULT_PROCESSING_RATE,
            label="robot",
        )
    )

    switches = sorted(i for i in range(n) if i not in tier_of)
    wired_pairs = sorted((a, b) for a in adj for b in adj[a] if a < b)
    for pid in poa_ids:
        for sw in sorted(rng.sample(switches, 2)):
            wired_pairs.append((pid, sw))

    links: list[Link] = []
    for a, b in wired_pairs:
        lo, hi = DEFAULT_DELAY_RANGES[_delay_class(tier_of, a, b)]
        links.append(
            Link(
                endpoints=(a, b),
                bandwidth=rng.uniform(*DEFAULT_BANDWIDTH_RANGE),
                delay=rng.uniform(lo, hi),
            )
        )
    for pid in poa_ids:
        links.append(
            Link(endpoints=(robot, pid), bandwidth=WIRELESS_BANDWIDTH, wireless=True)
        )

    return build_graph(nodes, links)
