"""Time-stepped episodes: mobility, signal evolution, re-solving, accounting.

Each step refreshes the radio state from the signal model, re-solves the
embedding from scratch with the chosen algorithm, audits the result against
every constraint, and records a :class:`StepRecord`. Placement changes between
consecutive steps count as migrations, attachment changes as handovers.
Solver failures are recorded (connectivity loss, unmet deadline), never
raised out of the episode.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .baselines import latency_agnostic_solve, radio_agnostic_solve
from .dlmd import ResourceUsage, place_service, prune_poas, select_poa
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    NoCoverageError,
    NoFeasibleCapacityError,
    NoFeasiblePlacementError,
    ScenarioError,
)
from .feasibility import (
    ViolationKind,
    Violation,
    check_embedding,
    delay_report,
    edge_usage,
    objective,
)
from .model import (
    Embedding,
    HardwareGraph,
    Link,
    Node,
    NodeKind,
    RadioState,
    ServiceSpec,
    link_key,
)
from .oracle import optimal_solve

ALGORITHMS = ("dlmd", "latency-agnostic", "radio-agnostic", "oracle")
#: Algorithms that are reconstructions of behaviours described elsewhere,
#: not original implementations; flagged in CSV output.
RECONSTRUCTED = ("latency-agnostic", "radio-agnostic")

_Z90 = 1.6448536269514722  # two-sided 90% normal quantile


@dataclass(frozen=True)
class TracePoint:
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class MobilityTrace:
    """Uniformly sampled robot positions over time."""

    robot: int
    step: float
    timesteps: tuple[TracePoint, ...]

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ScenarioError("trace step must be > 0")
        if not self.timesteps:
            raise ScenarioError("trace needs at least one timestep")
        times = [tp.t for tp in self.timesteps]
        for a, b in zip(times, times[1:]):
            if not math.isclose(b - a, self.step):
                raise ScenarioError("trace timesteps must advance by exactly one step")

    @property
    def duration(self) -> float:
        return self.timesteps[-1].t + self.step - self.timesteps[0].t


@dataclass(frozen=True)
class SigmaWindow:
    """Piecewise-constant signal override on [t_from, t_to] for one pair."""

    robot: int
    poa: int
    sigma: float
    t_from: float
    t_to: float


@dataclass(frozen=True)
class TableSignal:
    """Scripted signal: windowed overrides on top of a base radio state."""

    base: RadioState
    windows: tuple[SigmaWindow, ...] = ()

    def radio_at(self, t: float, position: tuple[float, float]) -> RadioState:
        sigma = dict(self.base.sigma)
        for window in self.windows:
            if window.t_from <= t <= window.t_to:
                sigma[(window.robot, window.poa)] = window.sigma
        return RadioState(sigma, self.base.noise)


@dataclass(frozen=True)
class PathLossSignal:
    """Log-distance path loss: sigma = power * (d0 / max(dist, d0))^exponent."""

    noise: float
    reference_power: float
    exponent: float
    reference_distance: float
    poa_positions: dict[int, tuple[float, float]]
    pairs: tuple[tuple[int, int], ...]  # (robot, poa) wireless pairs

    def radio_at(self, t: float, position: tuple[float, float]) -> RadioState:
        sigma = {}
        for robot, poa in self.pairs:
            px, py = self.poa_positions[poa]
            dist = math.hypot(position[0] - px, position[1] - py)
            eff = max(dist, self.reference_distance)
            sigma[(robot, poa)] = self.reference_power * (
                self.reference_distance / eff
            ) ** self.exponent
        return RadioState(sigma, self.noise)


def service_robot(graph: HardwareGraph, service: ServiceSpec) -> int:
    """The robot a service belongs to: its robot pin, else the only robot."""
    for vf in service.vfs:
        if vf.pin is not None and graph.node(vf.pin).kind is NodeKind.ROBOT:
            return vf.pin
    robots = graph.robots()
    if len(robots) == 1:
        return robots[0]
    raise ScenarioError(f"service {service.id}: cannot determine its robot")


def solve_scenario(
    graph: HardwareGraph,
    services: Sequence[ServiceSpec],
    radio: RadioState,
    algorithm: str,
    *,
    alpha: float = 1.0,
) -> Embedding:
    """One full embedding of all services with the chosen algorithm.

    Services are embedded in declaration order with resources decremented
    between them; the oracle optimizes them jointly instead. Robots that
    carry no service still get an attachment.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if algorithm == "oracle":
        return optimal_solve(graph, services, radio).embedding

    usage = ResourceUsage()
    placements: dict[int, int] = {}
    routes: dict[tuple[int, int], tuple[int, ...]] = {}
    attachment: dict[int, int] = {}
    for service in services:
        robot = service_robot(graph, service)
        if algorithm == "dlmd":
            emb = place_service(graph, service, robot, radio, usage=usage, alpha=alpha, verify=False)
        elif algorithm == "radio-agnostic":
            emb = radio_agnostic_solve(graph, service, robot, radio, usage=usage, alpha=alpha)
        else:
            emb = latency_agnostic_solve(graph, service, robot, radio, usage=usage)
        placements.update(emb.placements)
        routes.update(emb.routes)
        attachment.update(emb.attachment)

    for robot in graph.robots():
        if robot in attachment:
            continue
        if algorithm == "latency-agnostic":
            best = max(
                ((radio.sigma_for(robot, _other(link, robot)), -_other(link, robot))
                 for link in graph.wireless_links(robot)),
            )
            attachment[robot] = -best[1]
        else:
            poas = prune_poas(graph, robot, 0.0, radio,
                              use_effective_capacity=algorithm == "dlmd")
            attachment[robot] = select_poa(graph, robot, poas, radio,
                                           use_effective_capacity=algorithm == "dlmd")

    embedding = Embedding(placements, routes, attachment)
    if algorithm == "dlmd":
        violations = check_embedding(graph, services, embedding, radio)
        if violations:
            raise NoFeasiblePlacementError(f"joint embedding infeasible: {violations[0]}")
    return embedding


def _other(link: Link, nid: int) -> int:
    a, b = link.endpoints
    return b if a == nid else a


@dataclass
class StepRecord:
    t: float
    algorithm: str
    connectivity: bool
    feasible: bool
    deadline_met: bool
    attachment: Optional[int]
    placements: dict[int, int]
    objective_cost: Optional[float]
    d_net: Optional[float]
    d_pro: Optional[float]
    total: Optional[float]
    deadline: float
    snr: Optional[float]
    wireless_bw: Optional[float]
    edge_usage: Optional[float]
    violations: tuple[Violation, ...]
    migration: bool
    handover: bool
    runtime_ms: float


@dataclass
class EpisodeMetrics:
    algorithm: str
    seed: int
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def migrations(self) -> int:
        return sum(1 for s in self.steps if s.migration)

    @property
    def handovers(self) -> int:
        return sum(1 for s in self.steps if s.handover)

    @property
    def deadline_rate(self) -> float:
        return sum(1 for s in self.steps if s.deadline_met) / len(self.steps)

    @property
    def connectivity_rate(self) -> float:
        return sum(1 for s in self.steps if s.connectivity) / len(self.steps)

    @property
    def feasible_rate(self) -> float:
        return sum(1 for s in self.steps if s.feasible) / len(self.steps)

    @property
    def edge_usage_mean(self) -> float:
        values = [s.edge_usage for s in self.steps if s.edge_usage is not None]
        return statistics.fmean(values) if values else 0.0

    @property
    def migration_success(self) -> float:
        """Fraction of steps needing a migration that found a feasible target."""
        needed = 0
        succeeded = 0
        previous: Optional[dict[int, int]] = None
        for record in self.steps:
            if previous is not None:
                changed = record.placements and record.placements != previous
                failed = not record.placements
                if changed or failed:
                    needed += 1
                    if changed:
                        succeeded += 1
            if record.placements:
                previous = dict(record.placements)
        return succeeded / needed if needed else 1.0

    @property
    def runtimes_ms(self) -> list[float]:
        return [s.runtime_ms for s in self.steps]

    def summary(self) -> dict:
        runtimes = sorted(self.runtimes_ms)
        return {
            "algorithm": self.algorithm,
            "reconstruction": self.algorithm in RECONSTRUCTED,
            "seed": self.seed,
            "steps": len(self.steps),
            "migrations": self.migrations,
            "handovers": self.handovers,
            "deadline_rate": self.deadline_rate,
            "connectivity_rate": self.connectivity_rate,
            "feasible_rate": self.feasible_rate,
            "edge_usage_mean": self.edge_usage_mean,
            "migration_success": self.migration_success,
            # wall-clock figures; machine-dependent, excluded from the CSV
            "runtime_ms_median": statistics.median(runtimes) if runtimes else 0.0,
            "runtime_ms_mean": statistics.fmean(runtimes) if runtimes else 0.0,
            "runtime_ms_p95": runtimes[int(0.95 * (len(runtimes) - 1))] if runtimes else 0.0,
        }


def run_episode(scenario, algorithm: str, seed: int = 0) -> EpisodeMetrics:
    """Drive one episode over the scenario trace.

    ``seed`` is recorded for provenance; every solver here is deterministic,
    so (scenario, algorithm, seed) fully determines the result.
    """
    if algorithm not in ALGORITHMS:
        raise ScenarioError(f"unknown algorithm {algorithm!r}")
    trace: Optional[MobilityTrace] = scenario.trace
    if trace is None:
        raise ScenarioError("scenario has no mobility trace")
    graph: HardwareGraph = scenario.graph
    services = scenario.services
    metrics = EpisodeMetrics(algorithm, seed)
    prev_placements: Optional[dict[int, int]] = None
    prev_attachment: Optional[dict[int, int]] = None

    for point in trace.timesteps:
        if scenario.signal is not None:
            radio = scenario.signal.radio_at(point.t, (point.x, point.y))
        else:
            radio = scenario.radio

        start = time.perf_counter()
        embedding: Optional[Embedding] = None
        no_coverage = False
        try:
            embedding = solve_scenario(graph, services, radio, algorithm, alpha=scenario.alpha)
        except NoCoverageError:
            no_coverage = True
        except (NoFeasiblePlacementError, NoFeasibleCapacityError,
                InfeasibleError, BudgetExceededError):
            pass
        runtime_ms = (time.perf_counter() - start) * 1000.0

        if embedding is None:
            # placement failed; the radio itself may still be fine
            covered = not no_coverage and _has_coverage(graph, services, radio)
            metrics.steps.append(StepRecord(
                t=point.t, algorithm=algorithm, connectivity=covered,
                feasible=False, deadline_met=False, attachment=None, placements={},
                objective_cost=None, d_net=None, d_pro=None, total=None,
                deadline=min((s.deadline for s in services), default=math.inf),
                snr=None, wireless_bw=None, edge_usage=None, violations=(),
                migration=False, handover=False, runtime_ms=runtime_ms,
            ))
            continue

        violations = tuple(check_embedding(graph, services, embedding, radio))
        bad_kinds = {v.kind for v in violations}
        connectivity = (
            ViolationKind.WIRELESS_CAPACITY not in bad_kinds
            and ViolationKind.ATTACHMENT not in bad_kinds
        )
        d_net = d_pro = total = None
        try:
            reports = [delay_report(graph, s, embedding) for s in services]
            d_net = sum(r.d_net for r in reports)
            d_pro = sum(sum(r.d_pro.values()) for r in reports)
            total = d_net + d_pro
        except Exception:
            pass
        deadline = min((s.deadline for s in services), default=math.inf)
        deadline_met = (
            connectivity and total is not None
            and all(r.total <= r.deadline for r in reports)
        )

        robot = trace.robot
        attach = embedding.attachment.get(robot)
        snr = radio.sigma_for(robot, attach) / radio.noise if attach is not None else None
        wireless_bw = None
        if attach is not None:
            key = link_key(robot, attach)
            wireless_bw = 0.0
            for (pair, path) in embedding.routes.items():
                if key in [link_key(a, b) for a, b in zip(path, path[1:])]:
                    demand = _vl_demand(services, pair)
                    wireless_bw += demand

        migration = bool(
            prev_placements is not None and dict(embedding.placements) != prev_placements
        )
        handover = bool(
            prev_attachment is not None and dict(embedding.attachment) != prev_attachment
        )
        record = StepRecord(
            t=point.t, algorithm=algorithm, connectivity=connectivity,
            feasible=not violations, deadline_met=deadline_met,
            attachment=attach, placements=dict(embedding.placements),
            objective_cost=objective(graph, embedding),
            d_net=d_net, d_pro=d_pro, total=total, deadline=deadline,
            snr=snr, wireless_bw=wireless_bw,
            edge_usage=edge_usage(graph, embedding, services),
            violations=violations, migration=migration, handover=handover,
            runtime_ms=runtime_ms,
        )
        metrics.steps.append(record)
        prev_placements = dict(embedding.placements)
        prev_attachment = dict(embedding.attachment)

    return metrics


def _has_coverage(graph: HardwareGraph, services, radio: RadioState) -> bool:
    try:
        for service in services:
            robot = service_robot(graph, service)
            prune_poas(graph, robot, service.first_wireless_demand(), radio)
        return True
    except NoCoverageError:
        return False


def _vl_demand(services: Sequence[ServiceSpec], pair: tuple[int, int]) -> float:
    for service in services:
        vl = service.vl(*pair)
        if vl is not None:
            return vl.demand
    return 0.0


# -- stress sweeps -----------------------------------------------------------


def apply_stress(scenario, level: float):
    """Scenario copy with ``level`` of server compute and link bandwidth reserved."""
    if not 0.0 <= level <= 1.0:
        raise ValueError("stress level must lie in [0, 1]")
    from .scenario import Scenario  # local import; scenario.py imports sim types

    graph: HardwareGraph = scenario.graph
    nodes = []
    for node in graph.nodes.values():
        if node.kind is NodeKind.SERVER:
            nodes.append(
                Node(
                    id=node.id, kind=node.kind,
                    compute_capacity=node.compute_capacity - node.compute_capacity * level,
                    cost=node.cost, processing_rate=node.processing_rate,
                    tier=node.tier, label=node.label,
                )
            )
        else:
            nodes.append(node)
    links = []
    for link in graph.links.values():
        remaining = link.bandwidth - link.bandwidth * level
        links.append(
            Link(
                endpoints=link.endpoints,
                bandwidth=max(remaining, 1e-9),
                delay=link.delay, queuing=link.queuing,
                drop=link.drop, wireless=link.wireless,
            )
        )
    return Scenario(
        graph=HardwareGraph(nodes, links),
        services=scenario.services,
        radio=scenario.radio,
        trace=scenario.trace,
        signal=scenario.signal,
        alpha=scenario.alpha,
    )


@dataclass
class StressRow:
    """Aggregates for one (graph size, stress level) cell of a sweep."""

    n: int
    p: float
    stress: float
    trials: int
    delay_ms_mean: Optional[float]
    delay_ms_ci90: Optional[float]
    edge_usage_mean: float
    edge_usage_ci90: float
    migration_success_mean: float
    migration_success_ci90: float
    deadline_rate_mean: float
    deadline_rate_ci90: float
    runtime_ms_median: float
    runtime_ms_mean: float
    runtime_ms_ci90: float


def _mean_ci(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = statistics.fmean(values)
    if len(values) < 2:
        return mean, 0.0
    return mean, _Z90 * statistics.stdev(values) / math.sqrt(len(values))


def stress_sweep(
    n: int,
    p: float,
    stress_levels: Sequence[float],
    trials: int,
    seed: int,
    *,
    algorithm: str = "dlmd",
) -> list[StressRow]:
    """Episode aggregates per stress level over independently seeded topologies."""
    from .scenario import build_stress_scenario  # local import to avoid a cycle

    if trials < 1:
        raise ValueError("trials must be >= 1")
    for level in stress_levels:
        if not 0.0 <= level <= 1.0:
            raise ValueError("stress levels must lie in [0, 1]")

    scenarios = [build_stress_scenario(n, p, seed + trial) for trial in range(trials)]
    rows: list[StressRow] = []
    for level in stress_levels:
        delay_means: list[float] = []
        edge_means: list[float] = []
        migration_rates: list[float] = []
        deadline_rates: list[float] = []
        runtimes: list[float] = []
        for trial, scenario in enumerate(scenarios):
            stressed = apply_stress(scenario, level)
            metrics = run_episode(stressed, algorithm, seed + trial)
            totals = [s.total for s in metrics.steps if s.total is not None]
            if totals:
                delay_means.append(statistics.fmean(totals))
            edge_means.append(metrics.edge_usage_mean)
            migration_rates.append(metrics.migration_success)
            deadline_rates.append(metrics.deadline_rate)
            runtimes.extend(metrics.runtimes_ms)
        delay_mean, delay_ci = _mean_ci(delay_means) if delay_means else (None, None)
        edge_mean, edge_ci = _mean_ci(edge_means)
        mig_mean, mig_ci = _mean_ci(migration_rates)
        dead_mean, dead_ci = _mean_ci(deadline_rates)
        run_mean, run_ci = _mean_ci(runtimes)
        rows.append(
            StressRow(
                n=n, p=p, stress=level, trials=trials,
                delay_ms_mean=delay_mean, delay_ms_ci90=delay_ci,
                edge_usage_mean=edge_mean, edge_usage_ci90=edge_ci,
                migration_success_mean=mig_mean, migration_success_ci90=mig_ci,
                deadline_rate_mean=dead_mean, deadline_rate_ci90=dead_ci,
                runtime_ms_median=statistics.median(runtimes) if runtimes else 0.0,
                runtime_ms_mean=run_mean, runtime_ms_ci90=run_ci,
            )
        )
    return rows


# -- CSV output ---------------------------------------------------------------

STEP_CSV_COLUMNS = (
    "t_s", "algorithm", "reconstruction", "connectivity", "feasible",
    "deadline_met", "attachment", "placements", "objective_cost",
    "delay_net_ms", "delay_proc_ms", "delay_total_ms", "deadline_ms",
    "snr", "wireless_bw_mbps", "edge_usage", "n_violations",
    "violation_kinds", "migration", "handover",
)

STRESS_CSV_COLUMNS = (
    "n", "p", "stress", "trials",
    "delay_ms_mean", "delay_ms_ci90",
    "edge_usage_mean", "edge_usage_ci90",
    "migration_success_mean", "migration_success_ci90",
    "deadline_rate_mean", "deadline_rate_ci90",
    "runtime_ms_median", "runtime_ms_mean", "runtime_ms_ci90",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def write_steps_csv(metrics: EpisodeMetrics, path: str) -> None:
    """One row per step; schema is STEP_CSV_COLUMNS, stable across runs.

    Solver wall-clock times are deliberately not written here (they vary
    between runs); they live in the JSON summary instead.
    """
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STEP_CSV_COLUMNS)
        for s in metrics.steps:
            placements = ";".join(f"{vf}:{host}" for vf, host in sorted(s.placements.items()))
            kinds = ";".join(f"{v.kind.value}@{v.location}" for v in s.violations)
            writer.writerow([
                _cell(s.t), s.algorithm, _cell(s.algorithm in RECONSTRUCTED),
                _cell(s.connectivity), _cell(s.feasible), _cell(s.deadline_met),
                _cell(s.attachment), placements, _cell(s.objective_cost),
                _cell(s.d_net), _cell(s.d_pro), _cell(s.total), _cell(s.deadline),
                _cell(s.snr), _cell(s.wireless_bw), _cell(s.edge_usage),
                _cell(len(s.violations)), kinds, _cell(s.migration), _cell(s.handover),
            ])


def write_stress_csv(rows: Sequence[StressRow], path: str) -> None:
    """Aggregate sweep output; runtime columns are machine-dependent."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STRESS_CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                _cell(r.n), _cell(r.p), _cell(r.stress), _cell(r.trials),
                _cell(r.delay_ms_mean), _cell(r.delay_ms_ci90),
                _cell(r.edge_usage_mean), _cell(r.edge_usage_ci90),
                _cell(r.migration_success_mean), _cell(r.migration_success_ci90),
                _cell(r.deadline_rate_mean), _cell(r.deadline_rate_ci90),
                _cell(r.runtime_ms_median), _cell(r.runtime_ms_mean), _cell(r.runtime_ms_ci90),
            ])
