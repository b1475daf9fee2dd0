"""Command-line entry point.

Subcommands: solve, simulate, stress, oracle, gen-topology. Exit codes are
the contract: 0 success/feasible, 2 proven infeasible, 1 anything else
(bad input, IO, parse errors). Set VFEMBED_LOG=debug|info|warning to control
log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import (
    BudgetExceededError,
    InfeasibleError,
    NoCoverageError,
    NoFeasibleCapacityError,
    NoFeasiblePlacementError,
    ScenarioError,
)
from .feasibility import check_embedding, delay_report, objective
from .model import Embedding
from .scenario import Scenario, dump_scenario, load_scenario
from .sim import (
    ALGORITHMS,
    RECONSTRUCTED,
    run_episode,
    solve_scenario,
    stress_sweep,
    write_steps_csv,
    write_stress_csv,
)

log = logging.getLogger("vfembed")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

_INFEASIBLE_ERRORS = (
    NoCoverageError,
    NoFeasiblePlacementError,
    NoFeasibleCapacityError,
    InfeasibleError,
)


def _setup_logging() -> None:
    level = os.environ.get("VFEMBED_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _embedding_doc(scenario: Scenario, embedding: Embedding) -> dict:
    graph = scenario.graph
    radio = scenario.radio
    violations = check_embedding(graph, scenario.services, embedding, radio)
    reports = []
    for service in scenario.services:
        try:
            report = delay_report(graph, service, embedding)
        except Exception:
            continue
        reports.append(
            {
                "service": service.id,
                "d_net_ms": report.d_net,
                "d_pro_ms": {str(k): v for k, v in sorted(report.d_pro.items())},
                "total_ms": report.total,
                "deadline_ms": None if report.deadline == float("inf") else report.deadline,
            }
        )
    return {
        "placements": {str(vf): host for vf, host in sorted(embedding.placements.items())},
        "routes": [
            {"src": pair[0], "dst": pair[1], "path": list(path)}
            for pair, path in sorted(embedding.routes.items())
        ],
        "attachment": {str(r): p for r, p in sorted(embedding.attachment.items())},
        "objective_cost": objective(graph, embedding),
        "delays": reports,
        "feasible": not violations,
        "violations": [
            {"kind": v.kind.value, "location": v.location, "measured": v.measured, "bound": v.bound}
            for v in violations
        ],
    }


def _cmd_solve(args: argparse.Namespace, algo: str | None = None) -> int:
    scenario = load_scenario(args.scenario)
    algorithm = algo or args.algo
    try:
        embedding = solve_scenario(
            scenario.graph, scenario.services, scenario.radio, algorithm, alpha=scenario.alpha
        )
    except _INFEASIBLE_ERRORS as exc:
        log.info("infeasible: %s", exc)
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    doc = _embedding_doc(scenario, embedding)
    doc["algorithm"] = algorithm
    doc["reconstruction"] = algorithm in RECONSTRUCTED
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK if doc["feasible"] else EXIT_INFEASIBLE


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if scenario.trace is None:
        raise ScenarioError("scenario has no trace section")
    metrics = run_episode(scenario, args.algo, args.seed)
    write_steps_csv(metrics, args.csv)
    if args.summary:
        with open(args.summary, "w") as handle:
            json.dump(metrics.summary(), handle, indent=2, sort_keys=True)
            handle.write("\n")
    log.info("episode done: %d steps -> %s", len(metrics.steps), args.csv)
    return EXIT_OK


def _cmd_stress(args: argparse.Namespace) -> int:
    levels = [float(x) for x in args.levels.split(",") if x != ""]
    if not levels or any(not 0.0 <= lvl <= 1.0 for lvl in levels):
        raise ScenarioError("stress levels must lie in [0, 1]")
    sizes = [int(x) for x in args.n.split(",") if x != ""]
    ps = [float(x) for x in args.p.split(",") if x != ""]
    if len(ps) != len(sizes):
        raise ScenarioError("--p must list one probability per --n entry")
    rows = []
    for n, p in zip(sizes, ps):
        rows.extend(stress_sweep(n, p, levels, args.trials, args.seed))
    write_stress_csv(rows, args.csv)
    return EXIT_OK


def _cmd_gen_topology(args: argparse.Namespace) -> int:
    from .scenario import build_stress_scenario

    scenario = build_stress_scenario(args.n, args.p, args.seed)
    dump_scenario(scenario, args.out)
    log.info("wrote %s (%d nodes)", args.out, len(scenario.graph.nodes))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vfembed",
        description=(
            "Place robotic service functions across robot/Edge/Cloud tiers, "
            "route their traffic, and pick radio attachments under latency, "
            "bandwidth, compute, and radio constraints."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="embed the scenario services once")
    p_solve.add_argument("--scenario", required=True)
    p_solve.add_argument(
        "--algo", default="dlmd", choices=ALGORITHMS,
        help="dlmd (greedy tau placer), reconstructed baselines, or the exhaustive oracle",
    )
    p_solve.add_argument("--out", help="write the embedding JSON here instead of stdout")
    p_solve.set_defaults(func=_cmd_solve)

    p_oracle = sub.add_parser("oracle", help="exhaustive optimal embedding")
    p_oracle.add_argument("--scenario", required=True)
    p_oracle.add_argument("--out")
    p_oracle.set_defaults(func=lambda a: _cmd_solve(a, algo="oracle"))

    p_sim = sub.add_parser("simulate", help="run the mobility episode step by step")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--algo", default="dlmd", choices=ALGORITHMS)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--csv", required=True, help="per-step metrics CSV")
    p_sim.add_argument("--summary", help="optional JSON aggregate summary")
    p_sim.set_defaults(func=_cmd_simulate)

    p_stress = sub.add_parser("stress", help="background-load sweep over random topologies")
    p_stress.add_argument("--n", default="48,128", help="comma-separated graph sizes")
    p_stress.add_argument("--p", default="0.25,0.10", help="edge probability per size")
    p_stress.add_argument("--levels", default="0,0.2,0.4,0.6,0.8")
    p_stress.add_argument("--trials", type=int, default=20)
    p_stress.add_argument("--seed", type=int, default=0)
    p_stress.add_argument("--csv", required=True)
    p_stress.set_defaults(func=_cmd_stress)

    p_gen = sub.add_parser("gen-topology", help="emit a random-substrate scenario file")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p", type=float, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_topology)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
