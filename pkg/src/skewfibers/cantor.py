"""Newhouse thickness of finite interval unions and the intersection criteria built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import EmptyUnionError, Interval, IntervalUnion, intersect


@dataclass(frozen=True)
class CantorPresentation:
    """Gaps listed by decreasing length (ties left to right).

    ``ratios[k]`` holds (left, right) bridge-to-gap ratios at the two
    boundary points of the k-th gap of the presentation.
    """

    hull: Interval
    gap_lo: np.ndarray
    gap_hi: np.ndarray
    ratios: np.ndarray
    thickness: float

    @property
    def gaps(self) -> list[Interval]:
        return [Interval(float(a), float(b)) for a, b in zip(self.gap_lo, self.gap_hi)]


def _nearest_left(vals: np.ndarray, strict: bool) -> np.ndarray:
    """For each i, the largest j < i with vals[j] >= vals[i] (> if strict), or -1.

    Binary lifting over a sparse table of running maxima, fully vectorized.
    """
    n = vals.size
    if n == 0:
        return np.empty(0, dtype=np.int64)
    levels = [vals]
    step = 1
    while 2 * step <= n:
        prev = levels[-1]
        cur = np.full(n, -np.inf)
        cur[2 * step - 1:] = np.maximum(prev[2 * step - 1:], prev[step - 1:n - step])
        levels.append(cur)
        step *= 2
    target = vals
    pos = np.arange(n, dtype=np.int64) - 1
    for k in range(len(levels) - 1, -1, -1):
        size = 1 << k
        ok = pos - size + 1 >= 0
        block_max = levels[k][np.clip(pos, 0, n - 1)]
        skip = block_max <= target if strict else block_max < target
        pos = np.where(ok & skip, pos - size, pos)
    return pos


def present(u: IntervalUnion) -> CantorPresentation:
    """Decreasing-gap presentation of ``u`` and its thickness.

    Bridges at a gap are taken against all gaps that come earlier in the
    presentation. A single interval has no bounded gaps and thickness +inf.
    """
    if u.is_empty():
        raise EmptyUnionError("thickness of an empty union")
    lo, hi = u.lo, u.hi
    g = u.gap_lengths()
    m = g.size
    if m == 0:
        empty = np.empty(0)
        return CantorPresentation(u.hull, empty, empty, np.empty((0, 2)), math.inf)

    left = _nearest_left(g, strict=False)
    right_rev = _nearest_left(g[::-1], strict=True)[::-1]
    right = np.where(right_rev >= 0, m - 1 - right_rev, -1)

    left_start = np.where(left >= 0, lo[np.clip(left, 0, m - 1) + 1], lo[0])
    left_bridge = hi[:-1] - left_start
    right_end = np.where(right >= 0, hi[np.clip(right, 0, m - 1)], hi[-1])
    right_bridge = right_end - lo[1:]

    ratios = np.stack([left_bridge / g, right_bridge / g], axis=1)
    order = np.lexsort((np.arange(m), -g))
    return CantorPresentation(
        hull=u.hull,
        gap_lo=hi[:-1][order],
        gap_hi=lo[1:][order],
        ratios=ratios[order],
        thickness=float(ratios.min()),
    )


def thickness(u: IntervalUnion) -> float:
    return present(u).thickness


def _inside_complement_component(a: IntervalUnion, b: IntervalUnion) -> bool:
    """True when all of ``a`` sits in one connected component of the complement of ``b``."""
    amin, amax = a.lo[0], a.hi[-1]
    k = int(np.searchsorted(b.lo, amin, side="right")) - 1
    if k < 0:
        return bool(amax < b.lo[0])
    if amin <= b.hi[k]:
        return False
    return k == len(b) - 1 or bool(amax < b.lo[k + 1])


def interleaved(u: IntervalUnion, v: IntervalUnion) -> bool:
    """Neither set lies inside a gap (or an unbounded complementary piece) of the other."""
    if u.is_empty() or v.is_empty():
        raise EmptyUnionError("interleaving needs two nonempty sets")
    return not (_inside_complement_component(u, v) or _inside_complement_component(v, u))


def gap_lemma(tau1: float, tau2: float) -> bool:
    if tau1 <= 0 or tau2 <= 0:
        raise ValueError("thickness must be positive")
    return tau1 * tau2 > 1


def hky_region(tau1: float, tau2: float) -> bool:
    """Membership in the thickness region B that forces a Cantor set in the intersection."""
    if tau1 <= 0 or tau2 <= 0:
        raise ValueError("thickness must be positive")

    def first(a, b):   # a > (b^2 + 3b + 1) / b^2
        return a > 1 + 3 / b + 1 / (b * b)

    def second(a, b):  # a > (1 + 2b)^2 / b^3
        return a > (1 / b + 2) ** 2 / b

    return (first(tau1, tau2) or first(tau2, tau1)) and (second(tau1, tau2) or second(tau2, tau1))


def intersection_thickness_bound(tau1: float, tau2: float) -> float:
    return math.sqrt(min(tau1, tau2))


def hd_lower_bound(tau: float) -> float:
    """Hausdorff-dimension lower bound log 2 / log(2 + 1/tau) for a Cantor set of thickness tau."""
    if tau <= 0:
        raise ValueError("thickness must be positive")
    return math.log(2) / math.log(2 + 1 / tau)


def overlap_certificate(s1: IntervalUnion, s2: IntervalUnion) -> dict:
    """Thickness data for the pair (S1, S2) and the conclusion it licenses."""
    t1, t2 = thickness(s1), thickness(s2)
    f = intersect(s1, s2)
    out = {
        "tau_S1": t1,
        "tau_S2": t2,
        "interleaved": interleaved(s1, s2),
        "gap_lemma": gap_lemma(t1, t2),
        "hky": hky_region(t1, t2),
        "overlap_nonempty": not f.is_empty(),
        "intersection_bound": intersection_thickness_bound(t1, t2),
        "tau_F": thickness(f) if not f.is_empty() else math.nan,
        "F_components": len(f),
    }
    if not f.is_empty():
        out["F_hull"] = [f.hull.lo, f.hull.hi]
    return out
