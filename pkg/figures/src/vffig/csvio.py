"""Readers for the two vfembed CSV schemas, with strict header checks."""

from __future__ import annotations

import csv

STEP_COLUMNS = (
    "t_s", "algorithm", "reconstruction", "connectivity", "feasible",
    "deadline_met", "attachment", "placements", "objective_cost",
    "delay_net_ms", "delay_proc_ms", "delay_total_ms", "deadline_ms",
    "snr", "wireless_bw_mbps", "edge_usage", "n_violations",
    "violation_kinds", "migration", "handover",
)

STRESS_COLUMNS = (
    "n", "p", "stress", "trials",
    "delay_ms_mean", "delay_ms_ci90",
    "edge_usage_mean", "edge_usage_ci90",
    "migration_success_mean", "migration_success_ci90",
    "deadline_rate_mean", "deadline_rate_ci90",
    "runtime_ms_median", "runtime_ms_mean", "runtime_ms_ci90",
)


class SchemaError(ValueError):
    """The CSV header does not match the documented schema."""


def _read(path: str, expected: tuple[str, ...]) -> list[dict[str, str]]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != expected:
            raise SchemaError(f"{path}: header {header} does not match the schema")
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_steps(path: str) -> list[dict[str, str]]:
    """Rows of a per-step episode CSV."""
    return _read(path, STEP_COLUMNS)


def read_stress(path: str) -> list[dict[str, str]]:
    """Rows of a stress-sweep aggregate CSV."""
    return _read(path, STRESS_COLUMNS)


def floats(rows: list[dict[str, str]], column: str) -> list[float]:
    """Non-empty values of one column as floats."""
    return [float(r[column]) for r in rows if r[column] != ""]
