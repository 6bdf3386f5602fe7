"""trackviz command line: render single episodes or batch contact sheets."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .records import ParseError
from .render import PlotSpec, render_episode, render_grid


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="trackviz", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render one episode file")
    render.add_argument("episode")
    render.add_argument("--config", required=True, help="scenario YAML")
    render.add_argument("--out", help="output image path (default: alongside input)")
    render.add_argument("--stride", type=int, default=2)
    render.add_argument("--no-blocks", action="store_true")
    render.add_argument("--no-witnesses", action="store_true")

    grid = sub.add_parser("grid", help="contact sheets for a batch directory")
    grid.add_argument("batch_dir")
    grid.add_argument("--config", required=True)
    grid.add_argument("--outdir", required=True)
    grid.add_argument("--stride", type=int, default=3)

    args = p.parse_args(argv)
    try:
        if args.command == "render":
            out = args.out or str(Path(args.episode).with_suffix(".png"))
            spec = PlotSpec(
                episode_path=args.episode,
                config_path=args.config,
                output_path=out,
                stride=args.stride,
                show_blocks=not args.no_blocks,
                show_witnesses=not args.no_witnesses,
            )
            print(render_episode(spec))
        else:
            for name in render_grid(
                args.batch_dir, args.config, args.outdir, stride=args.stride
            ):
                print(name)
        return 0
    except (ParseError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
