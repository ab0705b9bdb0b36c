"""Share of sampled fiber points with two preimages, against depth and alpha.

    python3 scripts/census_scan.py [--samples 10000] [--seed 0]
"""
from __future__ import annotations

import argparse
import sys

from skewfibers.system import default_config
from skewfibers.thermo import overlap_band, preimage_census


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.005, 0.01, 0.02])
    ap.add_argument("--depths", type=int, nargs="+", default=[8, 11, 14, 17, 20])
    ap.add_argument("--itinerary", default="111")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print("alpha,depth,d1,d2,d2_share,d2_min,d2_max,band_lo,band_hi")
    for alpha in args.alphas:
        p = default_config(alpha)
        lo, hi = overlap_band(p)
        for n in args.depths:
            rep = preimage_census(p, args.itinerary, n, args.samples, args.seed)
            s = rep.summary()
            sizes = rep.class_sizes
            d2 = s.get("d2_range", [float("nan")] * 2)
            print(f"{alpha},{n},{sizes[1]},{sizes[2]},{sizes[2] / args.samples:.4g},"
                  f"{d2[0]:.6f},{d2[1]:.6f},{lo:.6f},{hi:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
