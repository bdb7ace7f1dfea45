"""Render figures from the simulation harness's CSV outputs.

Five figure kinds, one per CSV schema:

- ``converge``: per-iteration swarm trace (fitness/CMSE plus a penalty series)
- ``power``/``users``/``aoa``: CMSE sweeps, one series per scheme, aggregated
  across seeds (median by default)
- ``gainmap``: channel-gain heat map, optionally overlaid with the optimized
  antenna positions from a companion ``x,y`` CSV

Inputs are read-only; a schema mismatch or an empty CSV exits nonzero with a
message naming the problem.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class RenderError(Exception):
    """Input CSV missing, empty, or not matching the figure kind's schema."""


SWEEP_X = {
    "power": ("p_c_dbm", "maximum transmit power (dBm)"),
    "users": ("k_users", "number of users"),
    "aoa": ("mu", "angle-error bound (rad)"),
}
CONVERGE_COLUMNS = ("iter", "gbest_fitness", "gbest_cmse", "violations")
GAINMAP_COLUMNS = ("x", "y", "avg_gain")


def read_rows(path):
    """Load a CSV as a list of dicts, rejecting empty or headerless files."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise RenderError(f"empty CSV: {path}")
            rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise RenderError(f"empty CSV: {path}")
    return rows


def require_columns(rows, columns, path):
    present = rows[0].keys()
    for column in columns:
        if column not in present:
            raise RenderError(f"missing column '{column}' in {path}")


def render_converge(rows, path, out_path):
    require_columns(rows, CONVERGE_COLUMNS, path)
    iters = [int(r["iter"]) for r in rows]
    fitness = [float(r["gbest_fitness"]) for r in rows]
    cmse = [float(r["gbest_cmse"]) for r in rows]
    penalty = [float(r["gbest_fitness"]) - float(r["gbest_cmse"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(iters, fitness, label="gbest fitness")
    ax.plot(iters, cmse, label="gbest CMSE", linestyle="--")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    twin = ax.twinx()
    twin.plot(iters, penalty, label="penalty", color="tab:red", alpha=0.6)
    twin.set_ylabel("penalty")
    lines = ax.get_lines() + twin.get_lines()
    ax.legend(lines, [line.get_label() for line in lines], loc="upper right")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return {"series": len(lines), "points": len(iters)}


def render_sweep(rows, kind, path, out_path, agg="median"):
    x_col, x_label = SWEEP_X[kind]
    require_columns(rows, ("scheme", x_col, "seed", "cmse"), path)
    reduce = np.median if agg == "median" else np.mean
    series = {}
    for row in rows:
        value = float(row["cmse"])
        if not math.isfinite(value):
            continue  # error rows carry nan and are excluded from aggregation
        series.setdefault(row["scheme"], {}).setdefault(float(row[x_col]), []).append(value)
    if not series:
        raise RenderError(f"no finite cmse values in {path}")
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in sorted(series):
        points = sorted(series[scheme].items())
        xs = [x for x, _ in points]
        ys = [float(reduce(values)) for _, values in points]
        ax.plot(xs, ys, marker="o", label=scheme)
    ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel("CMSE")
    ax.legend()
    ax.set_title(f"{agg} over seeds", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return {
        "series": len(series),
        "points_per_series": {s: len(series[s]) for s in series},
    }


def render_gainmap(rows, path, out_path, positions_path=None):
    require_columns(rows, GAINMAP_COLUMNS, path)
    xs = np.array([float(r["x"]) for r in rows])
    ys = np.array([float(r["y"]) for r in rows])
    gain = np.array([float(r["avg_gain"]) for r in rows])
    ux, uy = np.unique(xs), np.unique(ys)
    if len(ux) * len(uy) != len(rows):
        raise RenderError(f"{path} is not a complete rectangular grid")
    grid = np.full((len(uy), len(ux)), np.nan)
    grid[np.searchsorted(uy, ys), np.searchsorted(ux, xs)] = gain
    fig, ax = plt.subplots(figsize=(5.5, 5))
    mesh = ax.imshow(
        grid, origin="lower", extent=(ux[0], ux[-1], uy[0], uy[-1]), aspect="equal"
    )
    fig.colorbar(mesh, ax=ax, label="average channel gain")
    markers = 0
    if positions_path is not None:
        pos_rows = read_rows(positions_path)
        require_columns(pos_rows, ("x", "y"), positions_path)
        px = [float(r["x"]) for r in pos_rows]
        py = [float(r["y"]) for r in pos_rows]
        ax.scatter(px, py, marker="x", color="white", s=60, label="antennas")
        ax.legend(loc="upper right")
        markers = len(px)
    ax.set_xlabel("x (wavelengths)")
    ax.set_ylabel("y (wavelengths)")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return {"grid_shape": grid.shape, "markers": markers}


def render(kind, input_csv, output_image, positions=None, agg="median"):
    """Render one figure; returns a summary of what was drawn.

    Raises RenderError on schema problems before any image is written.
    """
    rows = read_rows(input_csv)
    if kind == "converge":
        return render_converge(rows, input_csv, output_image)
    if kind in SWEEP_X:
        return render_sweep(rows, kind, input_csv, output_image, agg=agg)
    if kind == "gainmap":
        return render_gainmap(rows, input_csv, output_image, positions_path=positions)
    raise RenderError(f"unknown figure kind: {kind}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="aircomp-render", description="Render figures from sweep CSVs."
    )
    parser.add_argument("--kind", required=True,
                        choices=("converge", "power", "users", "aoa", "gainmap"))
    parser.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    parser.add_argument("--out", dest="output_image", required=True, help="output image path")
    parser.add_argument("--positions", default=None,
                        help="companion x,y CSV of antenna positions (gainmap only)")
    parser.add_argument("--agg", default="median", choices=("median", "mean"),
                        help="aggregation across seeds for sweep figures")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.input_csv, args.output_image,
               positions=args.positions, agg=args.agg)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
