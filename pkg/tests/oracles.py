"""Reference implementations that share no code with the package.

Everything here works in exact rational arithmetic on the basic example
(psi1 = x, psi2 = 1 - x, psi3 = 1, all contractions 1/2), walks every
preimage chain explicitly, and computes thickness straight from the
definition: order gaps by decreasing length, then widen each bridge until
it meets an earlier gap.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product


def exact_intervals(alpha: Fraction):
    a2 = alpha * alpha
    I1 = (Fraction(1, 2) - 3 * a2 / 8, Fraction(1, 2) - a2 / 8)
    I2 = (1 - alpha - 3 * a2 / 8, 1 - alpha - a2 / 8)
    return I1, I2


def inverse_branch(intervals, k: int, x: Fraction) -> Fraction:
    lo, hi = intervals[k - 1]
    return lo + (hi - lo) * x


def periodic_point(intervals, word) -> Fraction:
    """The point of the base Cantor set whose coding is ``word`` repeated forever."""
    # x = G(x) with G the composition of inverse branches along one period: G(x) = c + m x
    c, m = Fraction(0), Fraction(1)
    for k in reversed(word):
        lo, hi = intervals[k - 1]
        c, m = lo + (hi - lo) * c, (hi - lo) * m
    return c / (1 - m)


def branch(k: int, target: int, x: Fraction):
    """(offset, scale) of y -> h(x, y) on the branch (symbol of x, symbol of g(x))."""
    half = Fraction(1, 2)
    if (k, target) == (1, 1):
        return x, half
    if (k, target) == (2, 1):
        return 1 - x, half
    if (k, target) == (1, 2):
        return Fraction(1), -half
    return Fraction(0), half


def merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def fiber(intervals, x: Fraction, sym: int, n: int):
    """Depth-n fiber over x by walking all 2^n preimage chains."""
    if n == 0:
        return [(Fraction(0), Fraction(1))]
    pieces = []
    for k in (1, 2):
        xp = inverse_branch(intervals, k, x)
        off, sc = branch(k, sym, xp)
        for lo, hi in fiber(intervals, xp, k, n - 1):
            a, b = off + sc * lo, off + sc * hi
            pieces.append((min(a, b), max(a, b)))
    return merge(pieces)


def thickness_bruteforce(comps):
    """min bridge/gap over boundary points, decreasing-length presentation, ties left to right."""
    gaps = [comps[i + 1][0] - comps[i][1] for i in range(len(comps) - 1)]
    if not gaps:
        return float("inf")
    order = sorted(range(len(gaps)), key=lambda i: (-gaps[i], i))
    rank = {g: r for r, g in enumerate(order)}
    best = None
    for i, g in enumerate(gaps):
        j = i - 1
        while j >= 0 and rank[j] > rank[i]:
            j -= 1
        left = comps[i][1] - (comps[j + 1][0] if j >= 0 else comps[0][0])
        j = i + 1
        while j < len(gaps) and rank[j] > rank[i]:
            j += 1
        right = (comps[j][1] if j < len(gaps) else comps[-1][1]) - comps[i + 1][0]
        r = min(left / g, right / g)
        best = r if best is None or r < best else best
    return best


def middle_thirds_pairs(k: int):
    """Depth-k middle-thirds intervals, built exactly and rounded once."""
    pieces = [(Fraction(0), Fraction(1))]
    for _ in range(k):
        pieces = [q for a, b in pieces for q in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))]
    return [(float(a), float(b)) for a, b in pieces]


def period3_words():
    return [tuple(w) for w in product((1, 2), repeat=3)]


def delta_hat_table(alpha: Fraction = Fraction(1, 100), depths=range(4, 11)):
    """Exact min bridge/gap ratio of each depth-n fiber over each period-3 point."""
    intervals = exact_intervals(alpha)
    table = {}
    for word in period3_words():
        x = periodic_point(intervals, word)
        for n in depths:
            table[("".join(map(str, word)), n)] = thickness_bruteforce(fiber(intervals, x, word[0], n))
    return table


# -- closed-form low-depth fibers -------------------------------------------------
#
# In the displayed low-depth sets, c1, c2, c3 and the left end "alpha" are shorthand
# for quantities of the point whose fiber is being mapped: for u in I1,
#     a(u)  = 1 - u_{-1,2}            (left end of the fiber over u, close to alpha)
#     c1(u) = 1/2 + u_{-1,1},  c_{k+1}(u) = u_{-1,1} + c_k(u_{-1,1}) / 2.

def left_end(intervals, u):
    return 1 - inverse_branch(intervals, 2, u)


def c_level(intervals, u, k: int):
    u1 = inverse_branch(intervals, 1, u)
    if k == 1:
        return Fraction(1, 2) + u1 if isinstance(u, Fraction) else 0.5 + u1
    return u1 + c_level(intervals, u1, k - 1) / 2


def displayed_fiber(intervals, x, sym: int, n: int):
    """Closed-form fiber at depths 1-3 (list of (lo, hi)), by substitution."""
    half = Fraction(1, 2) if isinstance(x, Fraction) else 0.5
    if sym == 1:
        if n > 2:
            raise ValueError("over I1 a small gap opens at depth 3; no single-interval form")
        return [(left_end(intervals, x), c_level(intervals, x, n))]
    u = inverse_branch(intervals, 1, x)           # I1-preimage of x
    if n == 1:
        return [(0 * half, 2 * half)]
    if n == 2:
        return [(0 * half, half), (1 - c_level(intervals, u, 1) / 2, 1 - left_end(intervals, u) / 2)]
    if n == 3:
        v1 = inverse_branch(intervals, 1, inverse_branch(intervals, 2, x))
        return [(0 * half, half / 2),
                (half - c_level(intervals, v1, 1) / 4, half - left_end(intervals, v1) / 4),
                (1 - c_level(intervals, u, 2) / 2, 1 - left_end(intervals, u) / 2)]
    raise ValueError("closed forms are only displayed up to depth 3")
