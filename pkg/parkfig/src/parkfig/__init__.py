"""Offline rendering of simulation figures from parkproc's file outputs.

The renderer is presentation only: it validates the CSV/JSON schemas
bit-exactly and never recomputes statistics (regression lines come from
the summary JSON, aggregates from the sweep table).
"""

from parkfig.io import SchemaError, read_series, read_snapshot, read_summary, read_sweep
from parkfig.render import BatchReport, PlotJob, RenderError, batch, render

__all__ = [
    "SchemaError",
    "read_series",
    "read_snapshot",
    "read_summary",
    "read_sweep",
    "BatchReport",
    "PlotJob",
    "RenderError",
    "batch",
    "render",
]

__version__ = "0.1.0"
