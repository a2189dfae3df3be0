"""Line charts from the experiment harness's aggregated CSV files.

This module only draws. It reads the CSVs the harness writes, plots each
requested mean column against the x column, and attaches error bars when
the matching standard-error column (``{name}_mean`` -> ``{name}_se``) is
present. All statistics happen upstream; nothing here aggregates, sorts,
or rescales the data.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

DEFAULT_X = "rho_sym_mean"
DEFAULT_SERIES: Tuple[Tuple[str, str], ...] = (
    ("global_gap_mean", "global gap"),
    ("perceived_gap_mean", "perceived gap"),
)
FORMATS = ("svg", "png")
FIGSIZE = (6.4, 4.4)
DPI = 100


class PlotError(Exception):
    """Input-caused chart failure (bad file, bad column, bad extension)."""


class MissingColumnError(PlotError):
    """A requested column is absent from the CSV header."""

    def __init__(self, column: str, path):
        super().__init__(f"column {column!r} not found in {path}")
        self.column = column


class EmptyTableError(PlotError):
    """The CSV has a header but no data rows to draw."""

    def __init__(self, column: str, path):
        super().__init__(
            f"column {column!r} has no data rows in {path}: "
            "nothing to draw"
        )
        self.column = column


@dataclass
class PlotSpec:
    """One chart: which file, which columns, where the image goes."""

    input_csv: str
    out_image: str
    x_column: str = DEFAULT_X
    series: Sequence[Tuple[str, str]] = field(
        default_factory=lambda: list(DEFAULT_SERIES)
    )
    title: str = ""

    def validate(self):
        if not self.series:
            raise PlotError("at least one series is required")
        for entry in self.series:
            if len(entry) != 2 or not entry[0] or not entry[1]:
                raise PlotError(
                    f"series entries are (column, label) pairs, got {entry!r}"
                )


@dataclass
class RenderResult:
    """What was drawn, for callers that want to check without reopening
    the image."""

    out_image: str
    image_format: str
    width_px: int
    height_px: int
    n_series: int
    n_points: int
    labels: Tuple[str, ...]
    error_bars: Tuple[bool, ...]


def image_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lstrip(".").lower()
    if ext not in FORMATS:
        raise PlotError(
            f"unsupported image extension {ext!r} for {path}: "
            f"use one of {', '.join(FORMATS)}"
        )
    return ext


def _read_table(path):
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if any(c.strip() for c in row)]
    except OSError as exc:
        raise PlotError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise PlotError(f"{path} is empty: no header row")
    return rows[0], rows[1:]


def _column(header, data, name, path) -> List[float]:
    idx = header.index(name)
    try:
        return [float(row[idx]) for row in data]
    except (ValueError, IndexError) as exc:
        raise PlotError(
            f"column {name!r} in {path} is not numeric: {exc}"
        ) from None


def _se_column_name(mean_column: str):
    if mean_column.endswith("_mean"):
        return mean_column[: -len("_mean")] + "_se"
    return None


def render(spec: PlotSpec) -> RenderResult:
    """Draw the chart and write it to spec.out_image.

    Every validation step runs before the figure is created, so a failed
    render leaves no output file behind.
    """
    spec.validate()
    fmt = image_format(spec.out_image)
    header, data = _read_table(spec.input_csv)
    for name in [spec.x_column] + [col for col, _ in spec.series]:
        if name not in header:
            raise MissingColumnError(name, spec.input_csv)
    if not data:
        raise EmptyTableError(spec.x_column, spec.input_csv)

    x = _column(header, data, spec.x_column, spec.input_csv)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        bars = []
        for column, label in spec.series:
            y = _column(header, data, column, spec.input_csv)
            se_name = _se_column_name(column)
            if se_name is not None and se_name in header:
                se = _column(header, data, se_name, spec.input_csv)
                ax.errorbar(x, y, yerr=se, marker="o", capsize=3, label=label)
                bars.append(True)
            else:
                ax.plot(x, y, marker="o", label=label)
                bars.append(False)
        ax.set_xlabel(spec.x_column)
        ax.grid(alpha=0.3)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend()
        labels = tuple(ax.get_legend_handles_labels()[1])
        fig.savefig(spec.out_image, format=fmt)
        width, height = fig.canvas.get_width_height()
    finally:
        plt.close(fig)
    return RenderResult(
        out_image=str(spec.out_image),
        image_format=fmt,
        width_px=int(width),
        height_px=int(height),
        n_series=len(labels),
        n_points=len(x),
        labels=labels,
        error_bars=tuple(bars),
    )
