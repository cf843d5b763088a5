"""``collapse-lab <mode> --config <path> --out <dir> [--workers N] [--seed S]``."""
from __future__ import annotations

import argparse
import sys

from ..wavesolver.config import ConfigError
from .config import MODES, PlanIOError, make_plan
from .pipeline import EXIT_USAGE, run_plan


def build_parser():
    p = argparse.ArgumentParser(prog="collapse-lab",
                                description="Instanton collapse experiments.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--workers", type=int, default=1, help="parallel simulations (sweep)")
    p.add_argument("--seed", type=int, default=0, help="seed of the sweep perturbations")
    p.add_argument("--lambda-dot", type=float, default=None,
                   help="phi1: overrides the lambda_dot key")
    p.add_argument("--zmax", type=float, default=None, help="phi1: overrides the z_max key")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        plan = make_plan(args.mode, args.config, args.out, args.workers, args.seed)
        if args.lambda_dot is not None:
            plan.config.phi1.lambda_dot = args.lambda_dot
        if args.zmax is not None:
            plan.config.phi1.z_max = args.zmax
        plan.config.sim.validate()
    except (ConfigError, PlanIOError) as exc:
        print(f"collapse-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    status, _ = run_plan(plan)
    return status


if __name__ == "__main__":
    sys.exit(main())
