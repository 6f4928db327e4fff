#!/usr/bin/env python3
"""Run the full experiment battery into results/.

  results/semidiscrete/      efficiency-index table over the (h, h') pairs
  results/fullydiscrete-euler/, results/fullydiscrete-bdf2/
                             k-sweeps at fixed h=1/18, h'=1/40
  results/convergence/       Galerkin error norms over an h-sweep

Roughly 25 minutes on one core; pass --fast for a small smoke battery.
"""

import argparse
import sys
from pathlib import Path

from minipost.experiments import default_config, parse_fraction, parse_k_spec, run


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results", help="output root directory")
    ap.add_argument("--fast", action="store_true",
                    help="small meshes / few steps, for smoke testing")
    args = ap.parse_args()
    root = Path(args.out)

    worst = 0
    cfg = default_config("semidiscrete", out_dir=root / "semidiscrete")
    if args.fast:
        cfg.h_list = [parse_fraction("1/6")]
        cfg.hfine_list = [parse_fraction("1/12")]
        cfg.k_list = [parse_fraction("1/20")]
    print(f"[semidiscrete] {len(cfg.h_list)} mesh pairs, k={cfg.k_list[0]}")
    worst = max(worst, run(cfg))

    for scheme in ("euler", "bdf2"):
        cfg = default_config("fullydiscrete", scheme=scheme,
                             out_dir=root / f"fullydiscrete-{scheme}")
        if args.fast:
            cfg.h_list = [parse_fraction("1/6")]
            cfg.hfine_list = [parse_fraction("1/12")]
            cfg.k_list = parse_k_spec("1/10:1/40:halve")
        print(f"[fullydiscrete/{scheme}] k sweep "
              f"{cfg.k_list[0]} .. {cfg.k_list[-1]}")
        worst = max(worst, run(cfg))

    cfg = default_config("convergence", out_dir=root / "convergence")
    if args.fast:
        cfg.h_list = [parse_fraction(s) for s in ("1/4", "1/8")]
        cfg.k_list = [parse_fraction("1/20")]
    print(f"[convergence] h sweep over {[str(h) for h in cfg.h_list]}")
    worst = max(worst, run(cfg))

    print(f"done; reports under {root}/")
    return worst


if __name__ == "__main__":
    sys.exit(main())
