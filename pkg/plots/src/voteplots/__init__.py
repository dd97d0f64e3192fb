"""Figure rendering for voting-experiment results CSV files.

This package is coupled to the experiment suite only through its fixed
CSV column schema; it never imports the experiment code.
"""

__version__ = "0.1.0"

from .render import (  # noqa: F401
    PlotSpec,
    SchemaError,
    DataError,
    OptionError,
    fit_decay_slope,
    load_results,
    render,
)
