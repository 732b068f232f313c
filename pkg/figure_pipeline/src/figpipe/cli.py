"""Command line entry point: figpipe render."""

from __future__ import annotations

import argparse
import sys

from .data import SchemaError
from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figpipe", description="render figures from scan CSVs")
    subs = parser.add_subparsers(dest="command", required=True)
    r = subs.add_parser("render", help="render one figure")
    r.add_argument("--kind", required=True, choices=KINDS)
    r.add_argument("--in", dest="inputs", nargs="+", required=True,
                   metavar="CSV")
    r.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(tuple(args.inputs), args.kind, args.out))
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
