"""Command line front end.

Exit codes: 0 ok, 2 bad spec or bad input data (the message names the
offending field or column), 3 filesystem trouble.
"""

from __future__ import annotations

import argparse
import os
import sys

from .data import SchemaError
from .render import render
from .spec import SpecError, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svcplot", description="render simulation result plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one plot spec")
    p_render.add_argument("--spec", required=True,
                          help="path to a JSON plot spec")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "render":  # argparse enforces this already
        return 2
    try:
        spec = load_spec(args.spec)
        out = render(spec, base_dir=os.path.dirname(os.path.abspath(args.spec)))
    except (SpecError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
