"""Derivative cocycle, cone-field checks and the prehistory-dependent unstable slope.

A prehistory is stored as the anchor (itinerary ``w`` of x, fiber coordinate
y) together with the branch symbols chosen going backwards. Step i back
lands on the point whose itinerary is ``choices[i-1] ... choices[0] w``.

The unstable slope of a prehistory is the series

    omega = sum_i  dh/dx(z_{-i}) * prod_{j<i} dh/dy(z_{-j}) / prod_{j<=i} g'(x_{-j})

and obeys omega(next) = (dh/dx(z) + dh/dy(z) * omega) / g'(x) along the
natural extension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EscapeError, MembershipError, PrecisionError
from .fibers import fiber_set, overlap_set
from .system import Itinerary, SystemParams, base_point, coding_length, sup_dx

DEFAULT_CHECK_DEPTH = 16
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Prehistory:
    anchor: Itinerary
    y: float
    choices: tuple[int, ...]
    xs: tuple[float, ...]          # x_{-1}, x_{-2}, ...
    ys: tuple[float, ...]          # y_{-1}, y_{-2}, ...
    cert_depth: int

    @property
    def depth(self) -> int:
        return len(self.choices)

    def itinerary(self, i: int) -> Itinerary:
        """Itinerary of x_{-i} (i = 0 is the anchor)."""
        w = self.anchor
        for c in self.choices[:i]:
            w = w.prepend(c)
        return w

    def branch(self, i: int) -> tuple[int, int]:
        """(symbol of x_{-i}, symbol of x_{-i+1}) for i >= 1."""
        nxt = self.anchor[0] if i == 1 else self.choices[i - 2]
        return self.choices[i - 1], nxt


def _key(p: SystemParams, w: Itinerary) -> Itinerary:
    return w.prefix(coding_length(p))


def backward_lift(p: SystemParams, w, y: float, choices: Sequence[int],
                  n_check: int = DEFAULT_CHECK_DEPTH) -> Prehistory:
    """Lift (x, y) backwards along ``choices`` by the inverse fiber branches.

    Every lifted point must stay in [0, 1] and in the depth-``n_check``
    fiber approximation over its base point.
    """
    w = Itinerary.parse(w)
    choices = tuple(int(c) for c in choices)
    if any(c not in (1, 2) for c in choices):
        raise ValueError(f"branch choices must be 1 or 2, got {choices!r}")
    if not fiber_set(p, w, n_check).set.contains(y):
        raise MembershipError(f"y = {y!r} is not in the depth-{n_check} fiber over {w}")
    xs, ys = [], []
    cur_w, cur_y = w, float(y)
    for i, c in enumerate(choices, start=1):
        nxt_sym = cur_w[0]
        cur_w = cur_w.prepend(c)
        x = base_point(p, _key(p, cur_w))
        offset, scale = p.branch(c, nxt_sym, x)
        cur_y = (cur_y - offset) / scale
        if not (0.0 <= cur_y <= 1.0):
            raise EscapeError(f"lift {i} along {choices[:i]} leaves [0, 1] (y = {cur_y!r})")
        if not fiber_set(p, cur_w, n_check).set.contains(cur_y):
            raise MembershipError(
                f"lift {i} along {choices[:i]} leaves the depth-{n_check} fiber (y = {cur_y!r})")
        xs.append(x)
        ys.append(cur_y)
    return Prehistory(w, float(y), choices, tuple(xs), tuple(ys), n_check)


# -- slope series -------------------------------------------------------------

def slope_constants(p: SystemParams) -> tuple[float, float]:
    """(K, K') with K = sup|dh/dx| and K' = K / (1 - delta/beta)."""
    K = sup_dx(p)
    return K, K / (1.0 - p.delta / p.beta)


def tail_bound(p: SystemParams, n_terms: int) -> float:
    """Bound on the omitted part of the slope series after ``n_terms`` terms."""
    _, Kp = slope_constants(p)
    q = p.delta / p.beta
    return Kp * q ** n_terms / (1.0 - q)


def _series_terms(p: SystemParams, ph: Prehistory, start: int = 1) -> np.ndarray:
    """Terms of the slope series of the prehistory cut at step ``start - 1``."""
    terms = []
    weight = 1.0
    for i in range(start, ph.depth + 1):
        a, b = ph.branch(i)
        x = ph.xs[i - 1]
        glam = p.lam[a - 1]
        dx = p.branch_dx(a, b, x)
        dy = p.branch(a, b, x)[1]
        weight /= glam
        terms.append(dx * weight)
        weight *= dy
    return np.array(terms)


def _sum_with_error(terms: np.ndarray) -> tuple[float, float]:
    n = terms.size
    total = math.fsum(terms.tolist())
    rounding = (2 * n + 4) * EPS * float(np.sum(np.abs(terms)))
    return total, rounding


def min_terms(p: SystemParams, tol: float) -> int:
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    n = 0
    while tail_bound(p, n) > tol:
        n += 1
        if n > 200:
            raise PrecisionError(f"tolerance {tol} is out of reach")
    return n


def unstable_slope(p: SystemParams, ph: Prehistory, tol: float = 1e-14) -> tuple[float, float]:
    """Truncated slope series and a certified bound on its error (tail plus rounding)."""
    need = min_terms(p, tol)
    if ph.depth < need:
        raise PrecisionError(f"prehistory depth {ph.depth} < {need} terms needed for tol {tol}")
    terms = _series_terms(p, ph)
    total, rounding = _sum_with_error(terms)
    return total, float(tail_bound(p, ph.depth) + rounding)


def advance(p: SystemParams, ph: Prehistory, w_next=None) -> Prehistory:
    """Prehistory of f(z): the anchor moves one step forward.

    By default the new anchor is the shifted anchor itinerary, which then
    has to be longer than the coding length. A longer ``w_next`` agreeing
    with the shift may be passed instead.
    """
    a = ph.anchor
    if w_next is None:
        if len(a) <= coding_length(p):
            raise ValueError("anchor itinerary too short to shift; pass w_next")
        w_next = a.shift()
    w_next = Itinerary.parse(w_next)
    if tuple(w_next.symbols[: len(a) - 1]) != tuple(a.symbols[1:]):
        raise ValueError("w_next is not the shift of the anchor itinerary")
    x0 = base_point(p, _key(p, a))
    offset, scale = p.branch(a[0], w_next[0], x0)
    y_next = offset + scale * ph.y
    return Prehistory(w_next, y_next, (a[0],) + ph.choices, (x0,) + ph.xs,
                      (ph.y,) + ph.ys, ph.cert_depth)


def recurrence_residual(p: SystemParams, ph: Prehistory, w_next=None,
                        tol: float = 1e-14) -> tuple[float, float]:
    """|omega(f^ z) - (dh/dx(z) + dh/dy(z) omega(z)) / g'(x)| and twice the certified bound."""
    omega, bound = unstable_slope(p, ph, tol)
    nxt = advance(p, ph, w_next)
    omega_next, bound_next = unstable_slope(p, nxt, tol)
    a, b = nxt.branch(1)
    x0 = nxt.xs[0]
    dx = p.branch_dx(a, b, x0)
    dy = p.branch(a, b, x0)[1]
    predicted = (dx + dy * omega) / p.lam[a - 1]
    return float(abs(omega_next - predicted)), 2 * max(bound, bound_next)


# -- separation ---------------------------------------------------------------

@dataclass(frozen=True)
class SeparationReport:
    m: int
    delta_omega: float
    bound: float
    passed: bool
    tail_bound: float
    cert_depth: int

    def to_dict(self) -> dict:
        return {"m": self.m, "delta_omega": self.delta_omega, "bound": self.bound,
                "pass": self.passed, "tail_bound": self.tail_bound,
                "cert_depth": self.cert_depth}


def first_disagreement(c1: Sequence[int], c2: Sequence[int]) -> int:
    for i, (a, b) in enumerate(zip(c1, c2), start=1):
        if a != b:
            return i
    raise ValueError("choice sequences never disagree")


def separation_bound(p: SystemParams, m: int) -> float:
    return 0.7 / p.beta ** (m + 1)


def slope_separation(p: SystemParams, w, y: float, choices1: Sequence[int],
                     choices2: Sequence[int], tol: float | None = None,
                     n_check: int = DEFAULT_CHECK_DEPTH) -> SeparationReport:
    """Certified slope gap between two prehistories of the same point.

    The two series share their first m-1 terms and, after that, the same
    factor prod_{j<m} dh/dy / g'. The difference is therefore formed as
    that factor times the difference of the two slopes seen from z_{-(m-1)},
    which avoids cancelling nearly equal sums.
    """
    m = first_disagreement(choices1, choices2)
    bound = separation_bound(p, m)
    if tol is None:
        tol = 0.01 * bound
    if tol >= 0.1 * bound:
        raise PrecisionError(f"tolerance {tol:.3g} cannot certify against bound {bound:.3g}")
    ph1 = backward_lift(p, w, y, choices1, n_check)
    ph2 = backward_lift(p, w, y, choices2, n_check)

    factor = 1.0
    for i in range(1, m):
        a, b = ph1.branch(i)
        factor *= p.branch(a, b, ph1.xs[i - 1])[1] / p.lam[a - 1]

    sums, errs = [], []
    for ph in (ph1, ph2):
        terms = _series_terms(p, ph, start=m)
        total, rounding = _sum_with_error(terms)
        sums.append(total)
        errs.append(tail_bound(p, terms.size) + rounding)
    diff = sums[0] - sums[1]
    err = abs(factor) * (errs[0] + errs[1] + EPS * abs(diff)) + 4 * m * EPS * abs(factor * diff)
    if err > tol:
        raise PrecisionError(
            f"prehistories too short: error {err:.3g} exceeds tolerance {tol:.3g} (m = {m})")
    delta = factor * diff
    return SeparationReport(m, float(delta), bound, bool(abs(delta) - err > bound), float(err), n_check)


# -- cones --------------------------------------------------------------------

@dataclass(frozen=True)
class ConeReport:
    N: int
    gamma: float
    m_expand: float
    m_coexpand: float
    coexpand_floor: float
    K: float
    Kprime: float
    chain_ok: bool
    chain_ratio: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.m_expand > 1 and self.m_coexpand > 1

    def to_dict(self) -> dict:
        return {"N": self.N, "gamma": self.gamma, "m_expand": self.m_expand,
                "m_coexpand": self.m_coexpand, "coexpand_floor": self.coexpand_floor,
                "K": self.K, "Kprime": self.Kprime, "chain_ok": self.chain_ok,
                "chain_ratio": self.chain_ratio, "samples": self.samples, "pass": self.passed}


def derivative_cocycle(p: SystemParams, ph: Prehistory, N: int) -> np.ndarray:
    """D(f^N) at z_{-N}, the product of the one-step matrices along the prehistory."""
    if ph.depth < N:
        raise ValueError(f"prehistory depth {ph.depth} < N = {N}")
    A = np.eye(2)
    for i in range(N, 0, -1):
        a, b = ph.branch(i)
        x = ph.xs[i - 1]
        step = np.array([[p.lam[a - 1], 0.0],
                         [p.branch_dx(a, b, x), p.branch(a, b, x)[1]]])
        A = step @ A
    return A


def min_stretch(M: np.ndarray, gamma: float) -> float:
    """min of |M (1, t)| / |(1, t)| over |t| <= gamma.

    The squared ratio is (a + 2bt + ct^2)/(1 + t^2) with (a, b; b, c) = M^T M;
    its extrema on the interval are at the ends or at roots of
    -b t^2 + (c - a) t + b = 0.
    """
    G = M.T @ M
    a, b, c = float(G[0, 0]), float(G[0, 1]), float(G[1, 1])
    cands = [-gamma, gamma, 0.0]
    if b != 0:
        # the two roots multiply to -1; take the small one without cancellation
        q = (c - a) + math.copysign(math.hypot(c - a, 2 * b), c - a)
        small = -2 * b / q
        if abs(small) <= gamma:
            cands.append(small)
        if abs(small) * gamma >= 1:
            cands.append(-1 / small)
    vals = [(a + 2 * b * t + c * t * t) / (1 + t * t) for t in cands]
    return math.sqrt(max(min(vals), 0.0))


def cone_verification(p: SystemParams, gamma: float, N: int,
                      samples: Sequence[Prehistory]) -> ConeReport:
    """Expansion on the cone |slope| <= gamma and co-expansion on its complement under f^N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not (0 < gamma <= math.sqrt(p.beta ** (2 * N) - 1)):
        raise ValueError(f"gamma = {gamma} outside (0, sqrt(beta^(2N) - 1)]")
    if not samples:
        raise ValueError("need at least one sample")
    K, Kp = slope_constants(p)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    m_exp = m_co = floor = math.inf
    chain_ok, chain_ratio = True, 0.0
    for ph in samples:
        A = derivative_cocycle(p, ph, N)
        m_exp = min(m_exp, min_stretch(A, gamma))
        # vectors (s, 1) with |s| <= 1/gamma, pulled back by the inverse
        m_co = min(m_co, min_stretch(np.linalg.inv(A) @ swap, 1.0 / gamma))
        floor = min(floor, 1.0 / (math.sqrt(2) * abs(A[1, 1])))
        gprod = 1.0
        for i in range(N, 1, -1):
            gprod *= p.lam[ph.branch(i)[0] - 1]
        ratio = abs(A[1, 0]) / (Kp * gprod)
        chain_ratio = max(chain_ratio, ratio)
        chain_ok = chain_ok and ratio <= 1.0
    return ConeReport(N, float(gamma), float(m_exp), float(m_co), float(floor), float(K), float(Kp),
                      bool(chain_ok), float(chain_ratio), len(samples))


# -- seeded samplers ----------------------------------------------------------

def _push_forward(p: SystemParams, v: Itinerary, y: float, steps: int) -> float:
    """Apply the fiber maps along ``v`` for ``steps`` steps starting over x(v)."""
    L = coding_length(p)
    for i in range(steps):
        w = Itinerary(v.symbols[i:])
        offset, scale = p.branch(w[0], w[1], base_point(p, w.prefix(L)))
        y = offset + scale * y
    return y


def _random_point(u, rng: np.random.Generator) -> float:
    k = int(rng.integers(len(u)))
    lo, hi = float(u.lo[k]), float(u.hi[k])
    return lo + (hi - lo) * (0.25 + 0.5 * float(rng.random()))


def sample_prehistory(p: SystemParams, depth: int, rng: np.random.Generator,
                      n_check: int = DEFAULT_CHECK_DEPTH, anchor_len: int = 0) -> Prehistory:
    """A random certified prehistory of length ``depth``.

    A point is drawn inside the fiber over a random deep base point and
    pushed forward ``depth`` steps; the forward orbit stays inside the
    finite-depth fibers, so lifting back along the same symbols succeeds.
    """
    L = coding_length(p)
    syms = tuple(int(s) for s in rng.integers(1, 3, size=depth + max(anchor_len, L + 2)))
    v = Itinerary(syms)
    y_start = _random_point(fiber_set(p, v, n_check).set, rng)
    y0 = _push_forward(p, v, y_start, depth)
    anchor = Itinerary(syms[depth:])
    choices = tuple(reversed(syms[:depth]))
    return backward_lift(p, anchor, y0, choices, n_check)


def _dfs_lift(p: SystemParams, w: Itinerary, y: float, steps: int, level: int,
              rng: np.random.Generator, floor: int = 0) -> list[int] | None:
    """Branch choices lifting (w, y) ``steps`` times.

    The k-th lift has to lie in the fiber of depth max(level - k, floor).
    """
    if steps == 0:
        return []
    order = [1, 2] if rng.random() < 0.5 else [2, 1]
    nxt = max(level - 1, floor)
    for c in order:
        pre = w.prepend(c)
        offset, scale = p.branch(c, w[0], base_point(p, _key(p, pre)))
        y_pre = (y - offset) / scale
        if 0.0 <= y_pre <= 1.0 and fiber_set(p, pre, nxt).set.contains(y_pre):
            rest = _dfs_lift(p, pre, y_pre, steps - 1, nxt, rng, floor)
            if rest is not None:
                return [c] + rest
    return None


def extend_choices(p: SystemParams, w, y: float, choices: Sequence[int], extra: int,
                   n_check: int = DEFAULT_CHECK_DEPTH, seed: int = 0) -> tuple[int, ...]:
    """``choices`` followed by ``extra`` more branch symbols whose lifts stay certified.

    The continuation is found by backtracking search, so it exists whenever
    some certified continuation of that length does.
    """
    ph = backward_lift(p, w, y, choices, n_check)
    last_w = ph.itinerary(ph.depth)
    last_y = ph.ys[-1] if ph.depth else ph.y
    rest = _dfs_lift(p, last_w, last_y, extra, n_check, np.random.default_rng(seed), floor=n_check)
    if rest is None:
        raise MembershipError(f"no certified continuation of {tuple(choices)} by {extra} steps")
    return tuple(int(c) for c in choices) + tuple(rest)


def separation_pair(p: SystemParams, m: int, rng: np.random.Generator,
                    n_check: int = DEFAULT_CHECK_DEPTH, tail_steps: int = 3,
                    anchor_len: int = 0, attempts: int = 50):
    """Anchor and two choice sequences whose first disagreement is at step m.

    Returns ``(w, y, choices1, choices2)``. The split happens over a point of
    I1 taken inside the overlap at depth n_check + tail_steps + 1, so both
    branches can be continued for ``tail_steps`` further certified lifts.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    L = coding_length(p)
    level = n_check + tail_steps + 1
    for _ in range(attempts):
        head = (1,) + tuple(int(s) for s in rng.integers(1, 3, size=m - 1))
        tail = tuple(int(s) for s in rng.integers(1, 3, size=max(anchor_len, L + 2)))
        u = Itinerary(head + tail)
        F = overlap_set(p, u, level, strict=False)
        if F.is_empty():
            continue
        y_split = _random_point(F, rng)
        conts = []
        for c in (1, 2):
            pre = u.prepend(c)
            offset, scale = p.branch(c, u[0], base_point(p, _key(p, pre)))
            y_pre = (y_split - offset) / scale
            rest = _dfs_lift(p, pre, y_pre, tail_steps, level - 1, rng)
            if rest is None:
                break
            conts.append([c] + rest)
        if len(conts) < 2:
            continue
        y0 = _push_forward(p, u, y_split, m - 1)
        anchor = Itinerary(u.symbols[m - 1:])
        common = tuple(reversed(head[: m - 1]))
        return anchor, y0, common + tuple(conts[0]), common + tuple(conts[1])
    raise RuntimeError(f"no separable pair found for m = {m} after {attempts} attempts")
