"""Thickness of the fiber approximations against depth, with a geometric-tail extrapolation.

Prints a CSV table (itinerary, depth, tau, step, step ratio) and, per
itinerary, the limit tau(20) + step(20), since successive decrements shrink
by about one half per level.

    python3 scripts/thickness_depth_scan.py [--alpha 0.01] [--max-depth 20]
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from itertools import product
from pathlib import Path

from skewfibers.cantor import thickness
from skewfibers.fibers import fiber_set
from skewfibers.system import default_config

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "delta_hat.json"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--min-depth", type=int, default=4)
    ap.add_argument("--max-depth", type=int, default=20)
    args = ap.parse_args(argv)

    p = default_config(args.alpha)
    words = ["".join(map(str, w)) for w in product((1, 2), repeat=3)]
    out = csv.writer(sys.stdout)
    out.writerow(["itinerary", "depth", "tau", "step", "step_ratio"])
    limits = {}
    for w in words:
        prev = prev_step = None
        for n in range(args.min_depth, args.max_depth + 1):
            tau = thickness(fiber_set(p, w, n).set)
            step = None if prev is None else tau - prev
            ratio = None if step is None or not prev_step else step / prev_step
            out.writerow([w, n, repr(tau), "" if step is None else repr(step),
                          "" if ratio is None else f"{ratio:.4f}"])
            prev, prev_step = tau, step
        limits[w] = prev + (prev_step or 0.0)

    print(file=sys.stderr)
    for w, lim in limits.items():
        print(f"{w}: extrapolated limit {lim:.8f}", file=sys.stderr)
    if FIXTURE.exists() and args.alpha == 0.01:
        floor = json.loads(FIXTURE.read_text())["delta_hat"]
        lo = min(limits.values())
        print(f"frozen depth-10 floor {floor:.10f}; smallest limit {lo:.10f} "
              f"(relative gap {(floor - lo) / floor:.2e})", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
