"""Compute the measured thickness floor with the exact rational oracle and freeze it.

Writes tests/fixtures/delta_hat.json: the floor is the minimum, over depths
4..10 and the eight points with period-3 coding, of the bridge/gap ratio of
the depth-n fiber (alpha = 1/100, basic example).

    python3 scripts/freeze_delta_hat.py
"""
from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import delta_hat_table  # noqa: E402


def main() -> int:
    t0 = time.time()
    alpha = Fraction(1, 100)
    table = delta_hat_table(alpha, range(4, 11))
    (word, depth), floor = min(table.items(), key=lambda kv: kv[1])
    doc = {
        "alpha": float(alpha),
        "depths": [4, 10],
        "itineraries": sorted({w for w, _ in table}),
        "delta_hat": float(floor),
        "argmin": {"itinerary": word, "depth": depth},
        "per_case": {f"{w}@{n}": float(v) for (w, n), v in sorted(table.items())},
        "method": "exact rationals, all 2^n preimage chains, quadratic bridge search",
    }
    out = ROOT / "tests" / "fixtures" / "delta_hat.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"delta_hat = {float(floor)!r} at {word}@{depth}  ({time.time() - t0:.1f} s) -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
