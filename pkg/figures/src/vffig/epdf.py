"""Empirical PDFs of experienced metrics, one curve per algorithm."""

from __future__ import annotations

import argparse
import math

import numpy as np

from . import csvio

#: metric name -> (CSV column, connected steps only)
METRICS = {
    "snr": ("snr", True),
    "delay": ("delay_total_ms", True),
    "cost": ("objective_cost", False),
    "bandwidth": ("wireless_bw_mbps", True),
}

_MARKERS = {"dlmd": "o", "oracle": "x"}


def compute_epdf(values: list[float]) -> tuple[np.ndarray, np.ndarray]:
    """Histogram-density estimate with Freedman-Diaconis bin width.

    Degenerate inputs (single value, or zero interquartile range) collapse to
    a single spike bin instead of failing.
    """
    if not values:
        raise ValueError("no samples to estimate a density from")
    data = np.asarray(values, dtype=float)
    lo, hi = data.min(), data.max()
    iqr = float(np.percentile(data, 75) - np.percentile(data, 25))
    width = 2.0 * iqr * len(data) ** (-1.0 / 3.0)
    if hi == lo or width <= 0:
        half = max(abs(hi) * 1e-3, 0.5)
        edges = np.array([lo - half, hi + half])
    else:
        bins = max(1, math.ceil((hi - lo) / width))
        edges = np.linspace(lo, hi, bins + 1)
    density, edges = np.histogram(data, bins=edges, density=True)
    return edges, density


def extract_metric(csv_in: str, metric: str) -> tuple[str, list[float]]:
    """(curve label, metric samples) for one episode CSV."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; pick one of {sorted(METRICS)}")
    column, connected_only = METRICS[metric]
    rows = csvio.read_steps(csv_in)
    if connected_only:
        rows = [r for r in rows if r["connectivity"] == "1"]
    label = rows[0]["algorithm"] if rows else "?"
    if rows and rows[0]["reconstruction"] == "1":
        label += " (reconstruction)"
    return label, csvio.floats(rows, column)


def plot_epdf(csv_inputs: list[str], metric: str, out_image: str) -> str:
    """One density curve per input CSV; returns the output path."""
    import matplotlib.pyplot as plt

    curves = [extract_metric(path, metric) for path in csv_inputs]

    fig, ax = plt.subplots(figsize=(4.2, 3))
    for label, values in curves:
        edges, density = compute_epdf(values)
        centers = (edges[:-1] + edges[1:]) / 2.0
        marker = _MARKERS.get(label.split(" ")[0], None)
        ax.plot(centers, density, marker=marker, markersize=4,
                markerfacecolor="none", label=label)
    ax.set_xlabel(metric)
    ax.set_ylabel("ePDF")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="empirical PDF figure")
    parser.add_argument("--csv", required=True, nargs="+", help="episode CSV(s)")
    parser.add_argument("--metric", required=True, choices=sorted(METRICS))
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    plot_epdf(args.csv, args.metric, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
