"""Stress-sweep panels with 90% confidence shading, one series per graph size."""

from __future__ import annotations

import argparse
from collections import defaultdict

from . import csvio

_PANELS = (
    ("delay_ms_mean", "delay_ms_ci90", "delay (ms)"),
    ("edge_usage_mean", "edge_usage_ci90", "Edge usage"),
    ("migration_success_mean", "migration_success_ci90", "migration success"),
    ("runtime_ms_mean", "runtime_ms_ci90", "solver runtime (ms)"),
)


def plot_stress(csv_in: str, out_image: str) -> str:
    """Four panels over stress level; shaded bands are 90% intervals."""
    import matplotlib.pyplot as plt

    rows = csvio.read_stress(csv_in)
    by_size: dict[str, list[dict[str, str]]] = defaultdict(list)
    for row in rows:
        by_size[row["n"]].append(row)
    for series in by_size.values():
        series.sort(key=lambda r: float(r["stress"]))

    fig, axes = plt.subplots(2, 2, figsize=(7, 5), sharex=True)
    for ax, (mean_col, ci_col, label) in zip(axes.flat, _PANELS):
        for size, series in sorted(by_size.items(), key=lambda kv: int(kv[0])):
            xs = [float(r["stress"]) for r in series]
            ys = [float(r[mean_col]) if r[mean_col] else float("nan") for r in series]
            ci = [float(r[ci_col]) if r[ci_col] else 0.0 for r in series]
            ax.plot(xs, ys, marker="o", markersize=4, label=f"n={size}")
            ax.fill_between(
                xs,
                [y - c for y, c in zip(ys, ci)],
                [y + c for y, c in zip(ys, ci)],
                alpha=0.25,
            )
        ax.set_ylabel(label, fontsize=9)
        ax.tick_params(labelsize=8)
    for ax in axes[1]:
        ax.set_xlabel("stress level")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="stress sweep figure")
    parser.add_argument("--csv", required=True, help="stress aggregate CSV")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    plot_stress(args.csv, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
