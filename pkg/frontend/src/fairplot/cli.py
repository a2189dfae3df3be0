"""Command-line entry point: one chart per invocation.

``plot --input agg.csv --x rho_sym_mean --series col:label[,col:label...]
--out chart.svg``. Omitting --series draws the default gap pair. Flag
misuse exits 2; unreadable input, missing columns, or empty tables exit 1.
"""

from __future__ import annotations

import argparse
import sys

from .plotting import DEFAULT_SERIES, DEFAULT_X, PlotError, PlotSpec, render


class UsageError(Exception):
    pass


def parse_series(text: str):
    series = []
    for part in text.split(","):
        column, sep, label = part.partition(":")
        if not sep or not column.strip() or not label.strip():
            raise UsageError(
                f"series entry {part!r} must be column:label"
            )
        series.append((column.strip(), label.strip()))
    return series


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description=(
            "Render marker-and-errorbar line charts from aggregated "
            "experiment CSVs. Standard-error columns are drawn as error "
            "bars whenever the matching _se column exists."
        ),
    )
    parser.add_argument("--input", required=True, help="aggregated CSV path")
    parser.add_argument("--x", default=DEFAULT_X,
                        help=f"x-axis column (default {DEFAULT_X})")
    parser.add_argument("--series", default=None,
                        help="comma-separated column:label pairs (default "
                             "global_gap_mean and perceived_gap_mean)")
    parser.add_argument("--out", required=True,
                        help="output image; .svg or .png chooses the format")
    parser.add_argument("--title", default="", help="chart title")
    return parser


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        series = (
            list(DEFAULT_SERIES) if args.series is None
            else parse_series(args.series)
        )
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    spec = PlotSpec(
        input_csv=args.input,
        out_image=args.out,
        x_column=args.x,
        series=series,
        title=args.title,
    )
    try:
        result = render(spec)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {result.out_image}: {result.n_series} series x "
        f"{result.n_points} points, {result.width_px}x{result.height_px}px "
        f"{result.image_format}"
    )
    return 0


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
