"""Fixed colors and axis styling so regenerated figures diff cleanly."""

# population traces cycle through these in column order
SERIES_COLORS = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
]

ENVELOPE_COLOR = "#999999"
THEORY_COLORS = {"cos2": "#1f77b4", "sin2": "#d62728"}

RC = {
    "figure.figsize": (6.0, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}
