"""Certified slope gaps between prehistories that split at step m, against 0.7/beta^(m+1).

    python3 scripts/separation_scan.py [--pairs 20] [--max-m 6] [--seed 0]
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from skewfibers.system import default_config
from skewfibers.tangent import separation_pair, slope_separation


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--max-m", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    p = default_config(args.alpha)
    rng = np.random.default_rng(args.seed)
    print("m,pairs,failures,min_ratio,max_ratio,max_rel_error")
    for m in range(1, args.max_m + 1):
        ratios, errs, fails = [], [], 0
        for _ in range(args.pairs):
            w, y, c1, c2 = separation_pair(p, m, rng)
            rep = slope_separation(p, w, y, c1, c2)
            ratios.append(abs(rep.delta_omega) / rep.bound)
            errs.append(rep.tail_bound / abs(rep.delta_omega))
            fails += not rep.passed
        print(f"{m},{args.pairs},{fails},{min(ratios):.6g},{max(ratios):.6g},{max(errs):.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
