"""Command-line entry points: plot-traj and plot-sweep."""

from __future__ import annotations

import argparse
import sys

from .render import PlotError, plot_sweep, plot_trajectory


def main_traj(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-traj",
        description="Render a trajectory CSV (t_ns, p_* columns) to an image")
    parser.add_argument("csv")
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--columns", default=None,
                        help="comma-separated column names (default: all p_*)")
    args = parser.parse_args(argv)
    columns = args.columns.split(",") if args.columns else None
    try:
        plot_trajectory(args.csv, args.output, columns=columns)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main_sweep(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-sweep",
        description="Render a sweep CSV (param,value,observable,result) "
                    "to a scatter plot")
    parser.add_argument("csv")
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--theory", default=None,
                        help="comma-separated overlays from: cos2, sin2")
    args = parser.parse_args(argv)
    theory = args.theory.split(",") if args.theory else ()
    try:
        plot_sweep(args.csv, args.output, theory=theory)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
