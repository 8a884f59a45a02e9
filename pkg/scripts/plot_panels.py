#!/usr/bin/env python3
"""Render the plot-ready CSVs an experiment writes under <run>/plotdata/.

Usage: python scripts/plot_panels.py runs/plotdata/*.csv [-o out_dir]

Each CSV holds the grid, the true density, and one column per method;
one PNG per file is written next to the input (or into -o).
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_panel(csv_path: Path, out_dir: Path | None):
    header = csv_path.read_text().splitlines()[0].split(",")
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    xi = data[:, 0]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.fill_between(xi, data[:, 1], color="0.85", step="mid", label="true")
    for j, name in enumerate(header[2:], start=2):
        ax.step(xi, data[:, j], where="mid", lw=1.2, label=name)
    ax.set_xlabel("sine-angle")
    ax.set_ylabel("normalized density")
    ax.set_title(csv_path.stem)
    ax.legend(fontsize=8)
    fig.tight_layout()
    target = (out_dir or csv_path.parent) / (csv_path.stem + ".png")
    fig.savefig(target, dpi=150)
    plt.close(fig)
    print(f"wrote {target}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csvs", nargs="+", type=Path)
    parser.add_argument("-o", "--out-dir", type=Path)
    args = parser.parse_args()
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.csvs:
        plot_panel(path, args.out_dir)


if __name__ == "__main__":
    main()
