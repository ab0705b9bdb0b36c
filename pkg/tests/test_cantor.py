import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import middle_thirds_pairs, thickness_bruteforce
from skewfibers.cantor import (gap_lemma, hd_lower_bound, hky_region, interleaved,
                               intersection_thickness_bound, overlap_certificate, present, thickness)
from skewfibers.fibers import fiber_set, preimage_components
from skewfibers.geometry import EmptyUnionError, IntervalUnion, affine_image, intersect


def middle_thirds(k: int) -> IntervalUnion:
    return IntervalUnion(middle_thirds_pairs(k))


# dyadic endpoints: every length is exact, so ties between gaps are real ties
@st.composite
def dyadic_unions(draw, max_parts=12):
    cuts = sorted(set(draw(st.lists(st.integers(0, 256), min_size=2, max_size=2 * max_parts))))
    if len(cuts) % 2:
        cuts = cuts[:-1]
    pairs = [(cuts[i] / 256, cuts[i + 1] / 256) for i in range(0, len(cuts), 2)]
    return IntervalUnion(pairs, merge_tolerance=0.0)


@pytest.mark.parametrize("k", [1, 2, 5, 8])
def test_middle_thirds_thickness_is_one(k):
    assert thickness(middle_thirds(k)) == pytest.approx(1.0, rel=1e-12)


def test_one_gap_example():
    pres = present(IntervalUnion([(0, 0.45), (0.55, 1)]))
    assert pres.thickness == pytest.approx(4.5, rel=1e-14)
    assert pres.ratios.shape == (1, 2)


def test_single_interval_is_infinitely_thick():
    assert thickness(IntervalUnion([(0.2, 0.7)])) == math.inf


def test_empty_union_is_rejected():
    with pytest.raises(EmptyUnionError):
        present(IntervalUnion([]))


def test_presentation_orders_gaps_by_decreasing_length_ties_left_first():
    u = IntervalUnion([(0, 0.25), (0.375, 0.5), (0.625, 0.75), (0.8125, 1)])
    pres = present(u)
    assert [(g.lo, g.hi) for g in pres.gaps] == [(0.25, 0.375), (0.5, 0.625), (0.75, 0.8125)]


def test_equal_gaps_do_not_bridge_across_each_other():
    # two equal gaps: the bridge at each stops at the other one
    u = IntervalUnion([(0, 0.25), (0.375, 0.5), (0.625, 1)])
    pres = present(u)
    assert pres.thickness == pytest.approx(1.0)
    assert thickness_bruteforce(u.to_pairs()) == pytest.approx(1.0)


@given(dyadic_unions())
@settings(max_examples=300, deadline=None)
def test_matches_bruteforce_definition(u):
    if len(u) == 0:
        return
    expected = thickness_bruteforce([tuple(c) for c in u.to_pairs()])
    assert thickness(u) == expected


@given(dyadic_unions())
@settings(max_examples=200, deadline=None)
def test_presentation_invariants(u):
    if len(u) < 2:
        return
    pres = present(u)
    lengths = pres.gap_hi - pres.gap_lo
    assert np.all(np.diff(lengths) <= 0)
    assert np.all(pres.gap_lo >= pres.hull.lo) and np.all(pres.gap_hi <= pres.hull.hi)
    assert pres.thickness == pres.ratios.min()
    assert len(intersect(u, IntervalUnion(list(zip(pres.gap_lo + 1e-9, pres.gap_hi - 1e-9))))) == 0


@given(dyadic_unions(), st.integers(-64, 64), st.sampled_from([0.5, -0.25, 2.0, -1.0, 0.125]))
@settings(max_examples=200, deadline=None)
def test_affine_invariance(u, shift, scale):
    if len(u) == 0:
        return
    assert thickness(affine_image(u, shift / 64, scale)) == thickness(u)


@pytest.mark.xfail(strict=True, reason="thickness keeps decreasing past depth 10; the depth-10 "
                   "floor is undercut by about 2e-5 relative from depth 11 on")
def test_thickness_of_deep_fiber_beats_floor(p, delta_hat):
    assert thickness(fiber_set(p, "112", 14).set) >= delta_hat * (1 - 1e-9)


def test_thickness_decrements_halve_with_depth(p, delta_hat_doc):
    taus = [thickness(fiber_set(p, "211", n).set) for n in range(8, 21)]
    # agrees with the exact oracle where the fixture has values
    for n, tau in zip(range(8, 11), taus):
        assert tau == pytest.approx(delta_hat_doc["per_case"][f"211@{n}"], rel=1e-9)
    steps = np.diff(taus)
    assert np.all(steps < 0)
    assert np.allclose(steps[1:] / steps[:-1], 0.5, atol=0.02)
    # geometric tail: the limit sits one more step-sum below the depth-20 value
    limit = taus[-1] + steps[-1]
    assert 0 < (delta_hat_doc["delta_hat"] - limit) / limit < 3e-5


def test_interleaved_examples():
    assert interleaved(IntervalUnion([(0, 1)]), IntervalUnion([(0.4, 0.6)]))
    v = IntervalUnion([(0, 0.2), (0.8, 1)])
    assert not interleaved(IntervalUnion([(0.3, 0.5)]), v)
    assert not interleaved(IntervalUnion([(1.5, 2)]), v)
    assert interleaved(IntervalUnion([(0.1, 0.3), (0.5, 0.9)]), v)
    with pytest.raises(EmptyUnionError):
        interleaved(IntervalUnion([]), v)


@pytest.mark.parametrize("w", ["1", "112", "121"])
def test_default_components_are_interleaved(p, w):
    s1, s2 = preimage_components(p, w, 12)
    assert interleaved(s1, s2)


@pytest.mark.parametrize("pair,expected", [((3, 3), True), ((1, 1), False), ((0.5, 3), True)])
def test_gap_lemma_examples(pair, expected):
    assert gap_lemma(*pair) is expected


@pytest.mark.parametrize("pair,expected", [((3, 3), True), ((1, 1), False), ((0.5, 3), False)])
def test_hky_examples(pair, expected):
    assert hky_region(*pair) is expected


@pytest.mark.parametrize("f", [gap_lemma, hky_region])
def test_thickness_must_be_positive(f):
    with pytest.raises(ValueError):
        f(0.0, 2.0)


def test_hky_handles_infinite_thickness():
    assert hky_region(math.inf, 3.0)
    assert hky_region(math.inf, math.inf)


@given(st.floats(0.01, 1e6), st.floats(0.01, 1e6))
def test_hky_is_symmetric_and_implies_gap_lemma(a, b):
    assert hky_region(a, b) == hky_region(b, a)
    if hky_region(a, b):
        assert gap_lemma(a, b)


def test_intersection_bound_examples(delta_hat):
    assert intersection_thickness_bound(25, 36) == 5.0
    assert intersection_thickness_bound(1, 1) == 1.0
    assert intersection_thickness_bound(delta_hat, delta_hat) == math.sqrt(delta_hat)


def test_hd_lower_bound_examples():
    assert hd_lower_bound(1) == pytest.approx(math.log(2) / math.log(3), rel=1e-15)
    assert hd_lower_bound(25) == pytest.approx(math.log(2) / math.log(2.04), rel=1e-15)   # 0.97222
    assert hd_lower_bound(25) < hd_lower_bound(100) < 1
    assert hd_lower_bound(math.inf) == 1.0
    with pytest.raises(ValueError):
        hd_lower_bound(0)


@given(st.floats(1e-3, 1e12), st.floats(1e-3, 1e12))
def test_hd_lower_bound_monotone_below_one(a, b):
    lo, hi = sorted((a, b))
    assert hd_lower_bound(lo) <= hd_lower_bound(hi) < 1


@pytest.mark.parametrize("w", ["1", "111", "112", "121", "122"])
@pytest.mark.parametrize("n", [6, 10, 14])
def test_overlap_certificate_consistency(p, w, n):
    s1, s2 = preimage_components(p, w, n)
    cert = overlap_certificate(s1, s2)
    assert cert["gap_lemma"] and cert["hky"] and cert["interleaved"]
    # the Newhouse conclusion at finite depth
    assert cert["overlap_nonempty"]
    assert cert["intersection_bound"] == math.sqrt(min(cert["tau_S1"], cert["tau_S2"]))
