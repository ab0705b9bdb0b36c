"""Finite unions of closed intervals on the real line.

Every fiber approximation in the package is an :class:`IntervalUnion`.
Components are stored as two sorted float64 arrays (left and right
endpoints); consecutive components are separated by more than
``merge_tolerance``. Instances are immutable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import io as _io

DEFAULT_MERGE_TOLERANCE = 1e-13


class EmptyUnionError(ValueError):
    """Operation needs a hull but the union is empty."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"malformed interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __contains__(self, y: float) -> bool:
        return self.lo <= y <= self.hi


IntervalLike = Union[Interval, Sequence[float]]


class IntervalUnion:
    __slots__ = ("_lo", "_hi", "merge_tolerance")

    def __init__(self, intervals: Iterable[IntervalLike] = (),
                 merge_tolerance: float = DEFAULT_MERGE_TOLERANCE):
        pairs = [(iv.lo, iv.hi) if isinstance(iv, Interval) else tuple(iv) for iv in intervals]
        lo = np.array([p[0] for p in pairs], dtype=float)
        hi = np.array([p[1] for p in pairs], dtype=float)
        self._set(*_normalize_arrays(lo, hi, merge_tolerance), merge_tolerance)

    def _set(self, lo: np.ndarray, hi: np.ndarray, tol: float) -> None:
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)
        object.__setattr__(self, "merge_tolerance", float(tol))

    def __setattr__(self, name, value):
        raise AttributeError("IntervalUnion is immutable")

    @classmethod
    def from_arrays(cls, lo, hi, merge_tolerance: float = DEFAULT_MERGE_TOLERANCE) -> IntervalUnion:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = cls.__new__(cls)
        out._set(*_normalize_arrays(lo, hi, merge_tolerance), merge_tolerance)
        return out

    @classmethod
    def _trusted(cls, lo: np.ndarray, hi: np.ndarray, merge_tolerance: float) -> IntervalUnion:
        # caller guarantees lo/hi are already normalized
        out = cls.__new__(cls)
        out._set(np.array(lo, dtype=float), np.array(hi, dtype=float), merge_tolerance)
        return out

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    @property
    def components(self) -> list[Interval]:
        return [Interval(float(a), float(b)) for a, b in zip(self._lo, self._hi)]

    def __len__(self) -> int:
        return len(self._lo)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def is_empty(self) -> bool:
        return len(self._lo) == 0

    @property
    def hull(self) -> Interval:
        if self.is_empty():
            raise EmptyUnionError("empty union has no hull")
        return Interval(float(self._lo[0]), float(self._hi[-1]))

    @property
    def lengths(self) -> np.ndarray:
        return self._hi - self._lo

    @property
    def total_length(self) -> float:
        return float(np.sum(self._hi - self._lo))

    def gap_lengths(self) -> np.ndarray:
        return self._lo[1:] - self._hi[:-1]

    def contains(self, y):
        """Membership test; accepts a scalar or an array of points."""
        y_arr = np.asarray(y, dtype=float)
        if self.is_empty():
            res = np.zeros(y_arr.shape, dtype=bool)
        else:
            k = np.searchsorted(self._lo, y_arr, side="right") - 1
            kc = np.clip(k, 0, len(self._lo) - 1)
            res = (k >= 0) & (y_arr <= self._hi[kc])
        return bool(res) if res.ndim == 0 else res

    def __contains__(self, y: float) -> bool:
        return self.contains(y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return np.array_equal(self._lo, other._lo) and np.array_equal(self._hi, other._hi)

    __hash__ = None

    def allclose(self, other: IntervalUnion, atol: float = 1e-12) -> bool:
        return (len(self) == len(other)
                and bool(np.all(np.abs(self._lo - other._lo) <= atol))
                and bool(np.all(np.abs(self._hi - other._hi) <= atol)))

    def __repr__(self) -> str:
        if len(self) <= 4:
            body = " ∪ ".join(f"[{a:.6g}, {b:.6g}]" for a, b in zip(self._lo, self._hi))
            return f"IntervalUnion({body or '∅'})"
        return (f"IntervalUnion({len(self)} components, "
                f"hull=[{self._lo[0]:.6g}, {self._hi[-1]:.6g}])")

    def to_pairs(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self._lo, self._hi)]

    def to_json(self) -> str:
        return _io.dumps(self.to_pairs())

    @classmethod
    def from_json(cls, text: str, merge_tolerance: float = DEFAULT_MERGE_TOLERANCE) -> IntervalUnion:
        return cls(_io.loads(text), merge_tolerance)


def _normalize_arrays(lo: np.ndarray, hi: np.ndarray, tol: float):
    if tol < 0:
        raise ValueError("merge_tolerance must be >= 0")
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("endpoint arrays must be 1-d and of equal length")
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
        raise ValueError("NaN endpoint")
    bad = lo > hi
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"malformed interval [{lo[i]}, {hi[i]}]")
    if lo.size == 0:
        return lo.copy(), hi.copy()
    order = np.argsort(lo, kind="stable")
    lo = lo[order]
    hi = hi[order]
    reach = np.maximum.accumulate(hi)
    starts = np.ones(lo.size, dtype=bool)
    starts[1:] = lo[1:] - reach[:-1] > tol
    idx = np.flatnonzero(starts)
    return lo[idx].copy(), np.maximum.reduceat(hi, idx)


def normalize(intervals: Iterable[IntervalLike],
              merge_tolerance: float = DEFAULT_MERGE_TOLERANCE) -> IntervalUnion:
    """Sort and merge a raw list of closed intervals.

    Components whose separation is at most ``merge_tolerance`` are fused.
    Raises ``ValueError`` for an interval with ``lo > hi``.
    """
    return IntervalUnion(intervals, merge_tolerance)


def affine_image(u: IntervalUnion, offset: float, scale: float) -> IntervalUnion:
    """Image of ``u`` under ``y -> offset + scale * y``; negative scale flips orientation."""
    if scale == 0:
        raise ValueError("degenerate affine map (scale = 0)")
    a = offset + scale * u.lo
    b = offset + scale * u.hi
    if scale < 0:
        a, b = b[::-1], a[::-1]
    return IntervalUnion.from_arrays(a, b, u.merge_tolerance)


def union(u: IntervalUnion, v: IntervalUnion) -> IntervalUnion:
    tol = max(u.merge_tolerance, v.merge_tolerance)
    return IntervalUnion.from_arrays(np.concatenate([u.lo, v.lo]), np.concatenate([u.hi, v.hi]), tol)


def intersect(u: IntervalUnion, v: IntervalUnion) -> IntervalUnion:
    tol = max(u.merge_tolerance, v.merge_tolerance)
    if u.is_empty() or v.is_empty():
        return IntervalUnion((), tol)
    # for each component of u, the run of v-components that can meet it
    first = np.searchsorted(v.hi, u.lo, side="left")
    last = np.searchsorted(v.lo, u.hi, side="right")
    counts = np.maximum(last - first, 0)
    total = int(counts.sum())
    if total == 0:
        return IntervalUnion((), tol)
    ui = np.repeat(np.arange(len(u)), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    vi = np.repeat(first, counts) + offsets
    lo = np.maximum(u.lo[ui], v.lo[vi])
    hi = np.minimum(u.hi[ui], v.hi[vi])
    keep = lo <= hi
    return IntervalUnion.from_arrays(lo[keep], hi[keep], tol)


def gaps(u: IntervalUnion) -> list[Interval]:
    """Bounded gaps of ``u``, left to right (as open intervals stored by their closure)."""
    if u.is_empty():
        raise EmptyUnionError("gaps of an empty union are undefined")
    return [Interval(float(a), float(b)) for a, b in zip(u.hi[:-1], u.lo[1:])]


def box_count(u: IntervalUnion, eps: float) -> int:
    """Number of grid boxes ``[k*eps, (k+1)*eps)`` meeting ``u``.

    A nondegenerate component ``[a, b]`` is counted as ``[a, b)``, so its
    right endpoint never opens a box of its own; a point component counts
    the single box holding it.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if u.is_empty():
        return 0
    first = np.floor(u.lo / eps)
    last = np.maximum(first, np.ceil(u.hi / eps) - 1)
    reach = np.maximum.accumulate(last)
    prev = np.concatenate([[-np.inf], reach[:-1]])
    start = np.maximum(first, prev + 1)
    return int(np.sum(np.maximum(last - start + 1, 0)))
