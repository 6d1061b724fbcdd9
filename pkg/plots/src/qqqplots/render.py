"""CSV to image rendering for trajectory and sweep files.

Trajectory CSVs have a `t_ns` column, `p_<label>` population columns,
optionally a `fidelity` column and optionally `env_<name>` drive-envelope
columns (plotted on a secondary axis when present).  Sweep CSVs are long
format: `param,value,observable,result`.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .style import ENVELOPE_COLOR, RC, SERIES_COLORS, THEORY_COLORS


class PlotError(Exception):
    """Input file is unusable: empty, malformed, or missing columns."""


def _read_table(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"{path}: file is empty") from None
        rows = [row for row in reader if row]
    if not rows:
        raise PlotError(f"{path}: no data rows")
    try:
        data = np.array([[float(x) for x in row] for row in rows])
    except ValueError as exc:
        raise PlotError(f"{path}: non-numeric data ({exc})") from exc
    if data.shape[1] != len(header):
        raise PlotError(f"{path}: row width does not match header")
    return [h.strip() for h in header], data


def _require(header: list[str], wanted: list[str], path) -> list[int]:
    missing = [c for c in wanted if c not in header]
    if missing:
        raise PlotError(
            f"{path}: column(s) not found: {', '.join(missing)}; "
            f"available: {', '.join(header)}")
    return [header.index(c) for c in wanted]


def _axes(figsize=None):
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams.update(RC)
    fig, ax = plt.subplots(figsize=figsize)
    return fig, ax


def plot_trajectory(csv_path, out_path, columns=None) -> str:
    """Populations against time, one line per selected column.

    columns defaults to every `p_*` column.  `env_*` columns, if present,
    are drawn on a secondary axis in a muted color.
    """
    header, data = _read_table(csv_path)
    _require(header, ["t_ns"], csv_path)
    if columns is None:
        columns = [h for h in header if h.startswith("p_")]
        if not columns:
            raise PlotError(f"{csv_path}: no population columns; "
                            f"available: {', '.join(header)}")
    idx = _require(header, list(columns), csv_path)
    t = data[:, header.index("t_ns")]

    fig, ax = _axes()
    for k, (name, j) in enumerate(zip(columns, idx)):
        ax.plot(t, data[:, j], label=name,
                color=SERIES_COLORS[k % len(SERIES_COLORS)])
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)

    env_cols = [h for h in header if h.startswith("env_")]
    if env_cols:
        ax2 = ax.twinx()
        for name in env_cols:
            ax2.plot(t, data[:, header.index(name)], color=ENVELOPE_COLOR,
                     linestyle="--", linewidth=1.0, label=name)
        ax2.set_ylabel("drive envelope")
        ax2.spines["right"].set_visible(True)
    ax.legend(loc="best", ncol=2, fontsize=7)
    fig.savefig(out_path)
    import matplotlib.pyplot as plt
    plt.close(fig)
    return os.fspath(out_path)


def _theory_curve(name: str, x: np.ndarray) -> np.ndarray:
    if name == "cos2":
        return np.cos(x)**2
    if name == "sin2":
        return np.sin(x)**2
    raise PlotError(f"unknown theory curve {name!r}; expected cos2 or sin2")


def plot_sweep(csv_path, out_path, theory=()) -> str:
    """Scatter of swept observable values, one series per observable,
    with optional cos^2/sin^2 overlays against the swept parameter."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise PlotError(f"{csv_path}: file is empty") from None
    _require(header, ["param", "value", "observable", "result"], csv_path)
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        try:
            records = [(row["observable"], float(row["value"]),
                        float(row["result"]), row["param"]) for row in reader]
        except (TypeError, ValueError) as exc:
            raise PlotError(f"{csv_path}: malformed row ({exc})") from exc
    if not records:
        raise PlotError(f"{csv_path}: no data rows")
    param_name = records[0][3]
    records = [(n, v, r) for n, v, r, _ in records]
    names = sorted({name for name, _, _ in records})

    fig, ax = _axes()
    for k, name in enumerate(names):
        pts = [(v, r) for n, v, r in records if n == name and math.isfinite(r)]
        if not pts:
            continue
        xs, ys = zip(*sorted(pts))
        ax.scatter(xs, ys, s=14, label=name,
                   color=SERIES_COLORS[k % len(SERIES_COLORS)])
    values = np.array(sorted({v for _, v, _ in records}))
    if len(values) > 1:
        dense = np.linspace(values[0], values[-1], 400)
    else:
        dense = values
    for name in theory:
        ax.plot(dense, _theory_curve(name, dense), linewidth=1.0,
                color=THEORY_COLORS.get(name, "#444444"),
                label=name.replace("2", "²"))
    ax.set_xlabel(param_name)
    ax.set_ylabel("result")
    ax.legend(loc="best", fontsize=7)
    fig.savefig(out_path)
    import matplotlib.pyplot as plt
    plt.close(fig)
    return os.fspath(out_path)
