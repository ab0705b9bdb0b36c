"""Finite-depth fiber approximations.

The depth-n fiber over x is built from the two depth-(n-1) fibers over the
g-preimages of x::

    L_x(n) = h_{x_{-1,1}}(L_{x_{-1,1}}(n-1))  U  h_{x_{-1,2}}(L_{x_{-1,2}}(n-1)),
    L_x(0) = [0, 1].

Base points are addressed by itineraries cut to :func:`coding_length`
symbols (extended periodically when shorter). Since every inverse branch
contracts by ~alpha^2/4, a length-L prefix fixes x far below one ulp, so
the recursion tree collapses to at most 2**L distinct nodes per level and
is memoized on (prefix, depth).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DepthCapExceeded, TheoremViolation
from .geometry import IntervalUnion, affine_image, intersect, union
from .system import Itinerary, SystemParams, base_point, coding_length

DEFAULT_DEPTH_CAP = 26


@dataclass(frozen=True)
class FiberApprox:
    base: Itinerary
    coding: Itinerary
    x: float
    depth: int
    set: IntervalUnion


def _key(p: SystemParams, w) -> tuple[int, ...]:
    return Itinerary.parse(w).prefix(coding_length(p)).symbols


def _check_depth(n: int, cap: int) -> None:
    if n < 0:
        raise ValueError("depth must be >= 0")
    if n > cap:
        raise DepthCapExceeded(f"depth {n} exceeds the cap {cap}")


@lru_cache(maxsize=2048)
def _fiber(p: SystemParams, key: tuple[int, ...], n: int) -> IntervalUnion:
    if n == 0:
        return IntervalUnion([(0.0, 1.0)], p.merge_tolerance)
    s1, s2 = _children(p, key, n)
    return union(s1, s2)


@lru_cache(maxsize=256)
def _children(p: SystemParams, key: tuple[int, ...], n: int) -> tuple[IntervalUnion, IntervalUnion]:
    out = []
    for k in (1, 2):
        child = ((k,) + key)[: len(key)]
        offset, scale = p.branch(k, key[0], base_point(p, child))
        out.append(affine_image(_fiber(p, child, n - 1), offset, scale))
    return out[0], out[1]


def clear_cache() -> None:
    _fiber.cache_clear()
    _children.cache_clear()


def fiber_set(p: SystemParams, w, n: int, cap: int = DEFAULT_DEPTH_CAP) -> FiberApprox:
    """Depth-``n`` approximation of the fiber over the point coded by ``w``."""
    _check_depth(n, cap)
    key = _key(p, w)
    return FiberApprox(Itinerary.parse(w), Itinerary(key), base_point(p, key), n, _fiber(p, key, n))


def preimage_components(p: SystemParams, w, n: int,
                        cap: int = DEFAULT_DEPTH_CAP) -> tuple[IntervalUnion, IntervalUnion]:
    """The images S1, S2 coming from the I1- and I2-preimages; their union is the depth-n fiber."""
    if n < 1:
        raise ValueError("preimage components need depth >= 1")
    _check_depth(n, cap)
    return _children(p, _key(p, w), n)


def overlap_set(p: SystemParams, w, n: int, strict: bool = True,
                cap: int = DEFAULT_DEPTH_CAP) -> IntervalUnion:
    """Points of the depth-n fiber reachable from both preimage branches.

    Over I1 this is S1 ∩ S2 (two f-preimages). Over I2 no point has two
    f-preimages, so the set returned is the image of the overlap over the
    I1-preimage, i.e. points with two distinct f^2-preimages.
    """
    w = Itinerary.parse(w)
    if n < 1:
        raise ValueError("overlap needs depth >= 1")
    if w[0] == 1:
        s1, s2 = preimage_components(p, w, n, cap)
        out = intersect(s1, s2)
    else:
        if n < 2:
            raise ValueError("overlap over I2 needs depth >= 2")
        pre = w.prepend(1)
        inner = overlap_set(p, pre, n - 1, strict=False, cap=cap)
        offset, scale = p.branch(1, w[0], base_point(p, _key(p, pre)))
        out = affine_image(inner, offset, scale) if not inner.is_empty() else inner
    if strict and out.is_empty():
        raise TheoremViolation(
            f"empty overlap over itinerary {w} at depth {n}; check parameters and depth")
    return out


def membership(p: SystemParams, w, y: float, n: int, cap: int = DEFAULT_DEPTH_CAP) -> bool:
    if not (0.0 <= y <= 1.0):
        return False
    return bool(fiber_set(p, w, n, cap).set.contains(y))


def min_component_gap_ratio(u: IntervalUnion) -> float:
    """min over components J and adjacent gaps U of len(J)/len(U) (inf without gaps)."""
    if len(u) < 2:
        return float("inf")
    comp = u.lengths
    gap = u.gap_lengths()
    return float(min(np.min(comp[:-1] / gap), np.min(comp[1:] / gap)))


def fiber_report(p: SystemParams, w, n: int) -> dict:
    from .cantor import present

    fa = fiber_set(p, w, n)
    u = fa.set
    return {
        "itinerary": str(fa.base),
        "coding": str(fa.coding),
        "x": fa.x,
        "depth": n,
        "components": len(u),
        "gaps": max(len(u) - 1, 0),
        "leftmost": float(u.lo[0]),
        "rightmost": float(u.hi[-1]),
        "total_length": u.total_length,
        "min_bridge_gap_ratio": present(u).thickness,
        "min_component_gap_ratio": min_component_gap_ratio(u),
    }
