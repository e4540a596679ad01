"""Read-only figure rendering for cptsim scenario artifacts."""

from .render import FIGURE_KINDS, PlotSpec, SpecError, check_population_sums, render

__version__ = "0.1.0"
