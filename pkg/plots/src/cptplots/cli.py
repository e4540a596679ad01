"""Command line for figure rendering: `cptsim-plots render --spec PATH`.

Exit codes: 0 success, 1 spec or input validation failure (message names
the offending key or column), 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .render import PlotSpec, render

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 3


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cptsim-plots",
        description="render simulator CSV/JSON outputs into PNG and SVG figures",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    render_cmd = sub.add_parser("render", help="render one figure from a plot spec")
    render_cmd.add_argument("--spec", required=True, help="path to a plot spec (JSON)")
    args = parser.parse_args(argv)

    try:
        spec = PlotSpec.from_file(args.spec)
        written = render(spec)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
