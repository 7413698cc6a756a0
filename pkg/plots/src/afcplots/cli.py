"""Figure-rendering command line: afcsim-plot <kind> --in <dir> --out <file>."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="afcsim-plot",
        description="Render figures from afcsim run artifacts",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="indir", required=True,
                        help="run directory with the artifacts")
    parser.add_argument("--out", dest="outpath", required=True,
                        help="output image (.png or .svg)")
    args = parser.parse_args(argv)
    try:
        info = render(FigureSpec(kind=args.kind, indir=args.indir, outpath=args.outpath))
    except SchemaError as exc:
        print(f"afcsim-plot: error: {exc}", file=sys.stderr)
        return 2
    print(f"afcsim-plot: wrote {info['path']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
