"""Command line: render band and intervention figures from CSV files."""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plotting import FigureSpec, plot_bands, plot_intervention


def parse_layout(text: str) -> tuple[int, int]:
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"layout must look like 1x3, got {text!r}") from exc


def parse_color(text: str) -> tuple[str, str]:
    key, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError(f"color must look like name=value, got {text!r}")
    return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionlab-plot",
        description="Render opinionlab CSV outputs as multi-panel figures",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bands", "faction nLZ-vs-t panels with confidence bands"),
        ("intervention", "baseline vs intervention comparison panels"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--in", dest="inputs", nargs="+", required=True,
                         help="input CSV file(s)")
        cmd.add_argument("--out", required=True, help="output image path (png/svg/pdf)")
        cmd.add_argument("--same-scale", action="store_true",
                         help="share the y-axis scale across panels")
        cmd.add_argument("--layout", type=parse_layout, default=None,
                         help="panel grid as RxC, e.g. 1x3 or 3x2")
        cmd.add_argument("--color", type=parse_color, action="append", default=[],
                         metavar="KEY=COLOR", help="override a series color")
        cmd.add_argument("--dump", default=None,
                         help="also write the plotted values to this CSV")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        inputs=args.inputs,
        output=args.out,
        layout=args.layout,
        same_scale=args.same_scale,
        colors=dict(args.color),
        dump=args.dump,
    )
    render = plot_bands if args.command == "bands" else plot_intervention
    try:
        out = render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
