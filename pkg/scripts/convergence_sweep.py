#!/usr/bin/env python3
"""Convergence sweep: how fast the finite-n empirical constants approach
the limits.  No assertions; this documents the observed rate (the limit
theory itself gives only o(1) terms).
"""
import argparse
import os
import sys

from fflab.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-list", default="250,500,1000,2000")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20260809)
    ap.add_argument("--workers", type=int, default=min(8, os.cpu_count() or 1))
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()
    return cli_main(["sweep", "--n-list", args.n_list,
                     "--trials", str(args.trials), "--seed", str(args.seed),
                     "--workers", str(args.workers), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
