"""Per-step delay decomposition: radio/network fill plus server fill."""

from __future__ import annotations

import argparse

import numpy as np

from . import csvio


def plot_timeseries(csv_in: str, deadline_ms: float, out_image: str) -> str:
    """Stacked delay areas over time with a horizontal deadline line.

    Steps without connectivity (or without a solution) appear as gaps.
    Returns the output path.
    """
    import matplotlib.pyplot as plt

    rows = csvio.read_steps(csv_in)
    t = np.array([float(r["t_s"]) for r in rows])
    net = np.array([float(r["delay_net_ms"]) if r["delay_net_ms"] else np.nan for r in rows])
    pro = np.array([float(r["delay_proc_ms"]) if r["delay_proc_ms"] else np.nan for r in rows])
    connected = np.array([r["connectivity"] == "1" for r in rows])
    net = np.where(connected, net, np.nan)
    pro = np.where(connected, pro, np.nan)
    algorithm = rows[0]["algorithm"]
    if rows[0]["reconstruction"] == "1":
        algorithm += " (reconstruction)"

    fig, ax = plt.subplots(figsize=(6, 3))
    ax.fill_between(t, 0, net, color="tab:blue", alpha=0.7, label="network + radio")
    ax.fill_between(t, net, net + pro, color="tab:red", alpha=0.7, label="servers")
    ax.axhline(deadline_ms, color="black", linestyle="--", linewidth=1,
               label=f"deadline {deadline_ms:g} ms")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("delay (ms)")
    ax.set_title(algorithm)
    ax.legend(loc="upper left", fontsize=8)
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="delay time-series figure")
    parser.add_argument("--csv", required=True, help="per-step episode CSV")
    parser.add_argument("--deadline-ms", type=float, default=15.0)
    parser.add_argument("--out", required=True, help="output image (png)")
    args = parser.parse_args(argv)
    plot_timeseries(args.csv, args.deadline_ms, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
