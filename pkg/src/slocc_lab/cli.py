"""Command-line entry point ``slocc-lab``."""

import argparse
import logging
import sys

from .experiments import EXPERIMENTS, ExperimentConfig, run


def build_parser():
    p = argparse.ArgumentParser(prog="slocc-lab", description="Simulate sLOCC entanglement experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--counts", type=float, help="mean counts per measurement setting")
    p.add_argument("--out", help="output directory")
    p.add_argument("--exact", action="store_true", default=None, help="use exact probabilities (infinite counts)")
    p.add_argument("--visibility", type=float, help="coherence visibility of the conditional state")
    p.add_argument("--workers", type=int, help="process-pool size for sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config, experiment=args.experiment, seed=args.seed, counts=args.counts,
                                    out=args.out, exact=args.exact, visibility=args.visibility,
                                    workers=args.workers)
        paths = run(cfg)
    except (OSError, ValueError) as exc:
        print(f"slocc-lab: error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
