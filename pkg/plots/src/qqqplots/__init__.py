"""Read-only plotting layer for the simulator's CSV artifacts.

This package never runs simulations; it renders trajectory and sweep CSV
files produced by the qqqsim command line into image files.
"""

__version__ = "0.1.0"

from .render import PlotError, plot_sweep, plot_trajectory  # noqa: F401
