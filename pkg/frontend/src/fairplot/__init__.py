"""Chart rendering for aggregated experiment CSVs."""

from .plotting import (
    DEFAULT_SERIES,
    DEFAULT_X,
    EmptyTableError,
    MissingColumnError,
    PlotError,
    PlotSpec,
    RenderResult,
    image_format,
    render,
)

__version__ = "0.1.0"
