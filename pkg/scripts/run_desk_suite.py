#!/usr/bin/env python3
"""Run the full desk-scale experiment suite into runs/desk.

Equivalent to:

    relaxlab sweep --config <generated config> --workers 4

At the default dimension of 4000 this takes tens of minutes and a few GB of
disk for the model blobs.  Pass --dimension to scale down for a quick look.
"""

import argparse
import sys

from relaxlab.cli import main as cli_main
from relaxlab.config import RunConfig, save_config


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dimension", type=int, default=4000)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--out", default="runs/desk")
    parser.add_argument("--seeds", default="1,2,3")
    args = parser.parse_args(argv)

    config = RunConfig(
        dimension=args.dimension,
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        out_dir=args.out,
    )
    config_path = f"{args.out}.config.json"
    import os
    os.makedirs(os.path.dirname(config_path) or ".", exist_ok=True)
    save_config(config, config_path)
    return cli_main(["sweep", "--config", config_path,
                     "--workers", str(args.workers)])


if __name__ == "__main__":
    sys.exit(run())
