"""Figures from hammax sweep CSVs."""

from hammax_plots.plot import SweepTable, plot_constants

__all__ = ["SweepTable", "plot_constants"]
