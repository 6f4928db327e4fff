#!/usr/bin/env python3
"""Plot efficiency indexes and error norms from one or more table.csv files.

  python scripts/plot_results.py results/semidiscrete/table.csv -o eff.png
  python scripts/plot_results.py results/fullydiscrete-*/table.csv -o sweep.png

If all rows share one h (a k-sweep) the x axis is k, otherwise h.
"""

import argparse

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("tables", nargs="+", help="table.csv paths")
    ap.add_argument("-o", "--out", default="results.png")
    args = ap.parse_args()

    frames = [pd.read_csv(p).assign(source=p) for p in args.tables]
    df = pd.concat(frames, ignore_index=True)
    x = "k" if df["h"].nunique() == 1 and df["k"].nunique() > 1 else "h"

    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for src, grp in df.groupby("source"):
        grp = grp.sort_values(x)
        label = grp["scheme"].iloc[0] if len(args.tables) > 1 else None
        for col, style in (("theta_L2", "o-"), ("theta_H1", "s--"),
                           ("theta_pre", "^:")):
            name = col if label is None else f"{label} {col}"
            axes[0].plot(grp[x], grp[col], style, label=name)
        for col, style in (("err_vel_L2", "o-"), ("err_vel_H1", "s--"),
                           ("err_pre", "^:")):
            name = col if label is None else f"{label} {col}"
            axes[1].loglog(grp[x], grp[col], style, label=name)
    axes[0].axhline(1.0, color="k", lw=0.5)
    axes[0].set_xlabel(x)
    axes[0].set_ylabel("efficiency index")
    axes[0].legend(fontsize=8)
    axes[1].set_xlabel(x)
    axes[1].set_ylabel("error norm")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
