import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewfibers.geometry import (EmptyUnionError, Interval, IntervalUnion, affine_image, box_count,
                                 gaps, intersect, normalize, union)


def raw_intervals(max_size=12):
    pt = st.integers(0, 256).map(lambda k: k / 256)
    iv = st.tuples(pt, pt).map(lambda t: (min(t), max(t)))
    return st.lists(iv, max_size=max_size)


def covered(pairs, y):
    return any(a <= y <= b for a, b in pairs)


# dyadic grid: every probe and every affine image below is exact in floating point
PROBES = np.arange(-4, 517) / 512


def test_normalize_merges_and_sorts():
    u = normalize([(0.5, 0.7), (0.0, 0.2), (0.1, 0.3), (0.7, 0.8)])
    assert u.to_pairs() == [[0.0, 0.3], [0.5, 0.8]]


def test_merge_tolerance_fuses_near_touching():
    u = normalize([(0.0, 0.2), (0.2 + 1e-14, 0.4)])
    assert len(u) == 1
    v = normalize([(0.0, 0.2), (0.2 + 1e-9, 0.4)])
    assert len(v) == 2


def test_malformed_interval_rejected():
    with pytest.raises(ValueError, match="malformed"):
        normalize([(0.3, 0.1)])
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


def test_empty_union_behaviour():
    u = IntervalUnion()
    assert u.is_empty() and len(u) == 0
    with pytest.raises(EmptyUnionError):
        u.hull
    with pytest.raises(EmptyUnionError):
        gaps(u)
    assert box_count(u, 0.1) == 0


def test_immutable():
    u = normalize([(0, 1)])
    with pytest.raises(AttributeError):
        u.merge_tolerance = 0.5
    with pytest.raises(ValueError):
        u.lo[0] = 3.0


def test_affine_image_orientation():
    u = normalize([(0.0, 0.25), (0.5, 1.0)])
    v = affine_image(u, 1.0, -0.5)
    assert v.to_pairs() == [[0.5, 0.75], [0.875, 1.0]]
    with pytest.raises(ValueError):
        affine_image(u, 0.0, 0.0)


def test_gaps_and_hull():
    u = normalize([(0.0, 0.45), (0.55, 1.0)])
    assert gaps(u) == [Interval(0.45, 0.55)]
    assert u.hull == Interval(0.0, 1.0)


@pytest.mark.parametrize("eps,expected", [(0.25, 4), (0.5, 2), (1.0, 1), (0.1, 10)])
def test_box_count_unit_interval(eps, expected):
    assert box_count(normalize([(0.0, 1.0)]), eps) == expected


def test_box_count_point_component():
    assert box_count(normalize([(0.3, 0.3)]), 0.1) == 1


def test_box_count_rejects_bad_eps():
    with pytest.raises(ValueError):
        box_count(normalize([(0, 1)]), 0.0)


def test_json_roundtrip():
    u = normalize([(0.1, 0.2), (1 / 3, 0.5)])
    assert IntervalUnion.from_json(u.to_json()) == u


@given(raw_intervals())
def test_normalize_invariants(pairs):
    u = normalize(pairs)
    assert np.all(u.lo <= u.hi)
    assert np.all(u.lo[1:] - u.hi[:-1] > u.merge_tolerance)
    for y in PROBES:
        assert u.contains(y) == covered(pairs, y)


@given(raw_intervals(), raw_intervals())
def test_union_and_intersection_pointwise(a, b):
    u, v = normalize(a), normalize(b)
    uu, ii = union(u, v), intersect(u, v)
    for y in PROBES:
        assert uu.contains(y) == (covered(a, y) or covered(b, y))
        assert ii.contains(y) == (covered(a, y) and covered(b, y))


@given(raw_intervals(), raw_intervals())
def test_union_intersection_commute(a, b):
    u, v = normalize(a), normalize(b)
    assert union(u, v) == union(v, u)
    assert intersect(u, v) == intersect(v, u)


@given(raw_intervals(), st.sampled_from([-2.0, -0.5, 0.25, 0.5, 4.0]), st.sampled_from([0.0, 0.5, -1.0]))
def test_affine_image_pointwise(a, scale, offset):
    u = normalize(a)
    v = affine_image(u, offset, scale)
    assert len(v) == len(u)
    for y in PROBES:
        assert v.contains(offset + scale * y) == u.contains(y)


@given(raw_intervals(), st.integers(2, 9))
def test_box_count_monotone_under_dyadic_refinement(a, k):
    u = normalize(a)
    assert box_count(u, 2.0 ** -(k + 1)) >= box_count(u, 2.0 ** -k)


@given(raw_intervals(max_size=6), st.integers(1, 8))
def test_box_count_matches_enumeration(a, k):
    u = normalize(a)
    eps = 2.0 ** -k
    boxes = set()
    for lo, hi in u.to_pairs():
        first = math.floor(lo / eps)
        last = max(first, math.ceil(hi / eps) - 1)
        boxes.update(range(first, last + 1))
    assert box_count(u, eps) == len(boxes)
