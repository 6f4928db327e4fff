"""Command-line entry point.

    minipost run --experiment semidiscrete --out results/exp1
    minipost run --experiment fullydiscrete --scheme bdf2 \
        --k 1/10:1/160:halve --out results/exp2-bdf2
    minipost run --experiment custom --phi linear --nu 0.05 \
        --h 1/10,1/18 --hfine 1/24,1/40 --scheme bdf2 --k 1/1000 \
        --tstar 0.5 --out results/custom

Mesh sizes and time steps accept fraction strings ("1/18") or decimals;
--k additionally accepts a halving sweep "start:stop:halve".  Exit code is
0 on full success, 2 when some sweep cells failed (the report records
them), and 1 on configuration errors.
"""

import argparse
import sys
from pathlib import Path

from .experiments import (ConfigError, default_config, parse_fraction,
                          parse_k_spec, run)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minipost",
        description="Navier-Stokes mini-element solver with "
                    "postprocessing-based error estimation")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment sweep")
    p.add_argument("--experiment", required=True,
                   choices=["semidiscrete", "fullydiscrete", "convergence",
                            "custom"])
    p.add_argument("--phi", choices=["linear", "sine"],
                   help="temporal profile of the exact solution")
    p.add_argument("--nu", type=float, help="viscosity (default 0.05)")
    p.add_argument("--h", help="comma list of coarse mesh sizes, e.g. 1/10,1/18")
    p.add_argument("--hfine", help="comma list of fine mesh sizes, paired with --h")
    p.add_argument("--scheme", choices=["euler", "bdf2"])
    p.add_argument("--k", help='time steps: comma list or "start:stop:halve"')
    p.add_argument("--tstar", type=float, help="evaluation time (default 0.5)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the random-point forcing audit")
    p.add_argument("--residual-estimator", action="store_true",
                   help="also compute the explicit residual estimator")
    return parser


def _config_from_args(args) -> "RunConfig":
    cfg = default_config(args.experiment)
    if args.phi:
        cfg.phi = args.phi
    if args.nu is not None:
        cfg.nu = args.nu
    if args.tstar is not None:
        cfg.t_star = args.tstar
    if args.scheme:
        cfg.scheme = args.scheme
    if args.h:
        cfg.h_list = [parse_fraction(s) for s in args.h.split(",")]
        if not args.hfine:
            cfg.hfine_list = []
    if args.hfine:
        cfg.hfine_list = [parse_fraction(s) for s in args.hfine.split(",")]
    if args.k:
        cfg.k_list = parse_k_spec(args.k)
    cfg.out_dir = Path(args.out)
    cfg.seed = args.seed
    cfg.with_residual_estimator = args.residual_estimator
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        code = run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code == 2:
        print("warning: some sweep cells failed; see report.json",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
