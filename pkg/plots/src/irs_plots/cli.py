"""Command-line entry point: plot one figure kind from experiment CSVs.

Usage: irs-mimo-plot <kind> --in <csv...> --out <image>
Exit codes: 0 success, 2 schema/usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from irs_plots.figures import FIGURE_KINDS, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-mimo-plot",
        description="Render a static figure from irs-mimo experiment CSV output",
    )
    parser.add_argument("kind", choices=sorted(FIGURE_KINDS), help="figure kind")
    parser.add_argument(
        "--in",
        dest="inputs",
        type=Path,
        nargs="+",
        required=True,
        help="input CSV file(s); multiple files are concatenated",
    )
    parser.add_argument(
        "--out", type=Path, required=True, help="output image path (.png or .svg)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = render(args.kind, args.inputs, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
