#!/usr/bin/env python3
"""Render loss curves from experiment CSV output.

The core library deliberately emits plot-ready CSV and leaves rendering to
this companion script. It understands both curve schemas the experiment
runner writes:

  per-seed curves (out/curve.csv):
      seed,round,avg_weighted_rank_loss,explored,expert_index
  mean/std bands  (out/curve_k<k>.csv from the k sweep):
      round,avg_weighted_rank_loss_mean,avg_weighted_rank_loss_std

Any mix of files can be overlaid on one axes:

    python3 scripts/plot_curves.py out/topbbm/curve.csv out/topada/curve.csv
    python3 scripts/plot_curves.py out/sweep/curve_k*.csv --out sweep.png

Per-seed files are drawn as faint per-seed trajectories plus a bold mean;
band files as a mean line with a shaded +/- one-std region.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

SEED_HEADER = ["seed", "round", "avg_weighted_rank_loss", "explored", "expert_index"]
BAND_HEADER = ["round", "avg_weighted_rank_loss_mean", "avg_weighted_rank_loss_std"]


def read_rows(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header not in (SEED_HEADER, BAND_HEADER):
            raise SystemExit(
                f"{path}: unrecognized header {header}; expected one of\n"
                f"  {','.join(SEED_HEADER)}\n  {','.join(BAND_HEADER)}"
            )
        try:
            rows = [[float(cell) for cell in row] for row in reader if row]
        except ValueError as exc:
            raise SystemExit(f"{path}: bad data row ({exc})") from None
    if not rows:
        raise SystemExit(f"{path}: no data rows")
    return header, np.array(rows)


def plot_file(ax, path: Path, label: str) -> None:
    header, data = read_rows(path)
    if header == SEED_HEADER:
        seeds = np.unique(data[:, 0])
        color = None
        for seed in seeds:
            part = data[data[:, 0] == seed]
            (line,) = ax.plot(
                part[:, 1], part[:, 2], alpha=0.25, linewidth=0.8, color=color
            )
            color = line.get_color()
        rounds = np.unique(data[:, 1])
        mean = np.array(
            [data[data[:, 1] == r, 2].mean() for r in rounds]
        )
        ax.plot(rounds, mean, color=color, linewidth=2.0, label=label)
    else:
        rounds, mean, std = data[:, 0], data[:, 1], data[:, 2]
        (line,) = ax.plot(rounds, mean, linewidth=2.0, label=label)
        ax.fill_between(rounds, mean - std, mean + std, alpha=0.2,
                        color=line.get_color())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n", 1)[0])
    parser.add_argument("files", nargs="+", type=Path, help="curve CSV files")
    parser.add_argument("--out", type=Path, default=Path("curves.png"))
    parser.add_argument("--title", default=None)
    parser.add_argument(
        "--label",
        action="append",
        default=None,
        help="legend label per file, in order (default: file stem)",
    )
    parser.add_argument("--ymax", type=float, default=None)
    args = parser.parse_args(argv)

    labels = args.label or []
    if labels and len(labels) != len(args.files):
        parser.error("--label must be given once per file")

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for i, path in enumerate(args.files):
        if not path.is_file():
            raise SystemExit(f"{path}: no such file")
        label = labels[i] if labels else path.stem
        plot_file(ax, path, label)
    ax.set_xlabel("round")
    ax.set_ylabel("average weighted rank loss")
    if args.title:
        ax.set_title(args.title)
    if args.ymax is not None:
        ax.set_ylim(top=args.ymax)
    ax.set_ylim(bottom=0.0)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
