"""The skew-product family, its symbolic coding, and parameter validation.

The map is ``f(x, y) = (g(x), h(x, y))`` on ``J_* x [0, 1]``. The base map
``g`` is affine on each of two tiny intervals ``I1`` (near 1/2) and ``I2``
(near 1 - alpha), each onto [0, 1]. The fiber map has four affine-in-y
branches selected by the pair (symbol of x, symbol of g(x)):

    (1, 1): psi1(x) + s1*y      (2, 1): psi2(x) + s2*y
    (1, 2): psi3(x) - s3*y      (2, 2): s4*y

With psi1(x) = x, psi2(x) = 1 - x, psi3 = 1 and all s = 1/2 this is the
basic example; :func:`default_config` builds exactly that one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml
from numpy.polynomial import Polynomial

from .geometry import DEFAULT_MERGE_TOLERANCE, Interval

# x-resolution the symbolic coding has to reach; well under one ulp at 1/2
CODING_RESOLUTION = 1e-18

# (symbol of x, symbol of g(x)) -> (index into s, index into psi or None, sign of y-term)
BRANCHES = {
    (1, 1): (0, 0, 1.0),
    (2, 1): (1, 1, 1.0),
    (1, 2): (2, 2, -1.0),
    (2, 2): (3, None, 1.0),
}

REFERENCE_PSI = ((0.0, 1.0), (1.0, -1.0), (1.0,))


@lru_cache(maxsize=64)
def _polys(psi) -> tuple[tuple[Polynomial, Polynomial], ...]:
    """(psi_j, psi_j') for each coefficient tuple."""
    return tuple((Polynomial(c), Polynomial(c).deriv()) for c in psi)


@dataclass(frozen=True)
class Itinerary:
    """Finite word over {1, 2}; symbol k means "the point lies in I_k"."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if not syms:
            raise ValueError("empty itinerary")
        if any(s not in (1, 2) for s in syms):
            raise ValueError(f"itinerary symbols must be 1 or 2, got {self.symbols!r}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def parse(cls, text: str | Sequence[int] | Itinerary) -> Itinerary:
        if isinstance(text, Itinerary):
            return text
        if isinstance(text, str):
            return cls(tuple(int(c) for c in text.strip()))
        return cls(tuple(text))

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def shift(self) -> Itinerary:
        return Itinerary(self.symbols[1:])

    def prepend(self, k: int) -> Itinerary:
        return Itinerary((k,) + self.symbols)

    def extended(self, n: int) -> Itinerary:
        """Periodic continuation to at least ``n`` symbols."""
        if len(self) >= n:
            return self
        reps = -(-n // len(self))
        return Itinerary((self.symbols * reps)[:n])

    def prefix(self, n: int) -> Itinerary:
        return Itinerary(self.extended(n).symbols[:n])


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    I1: Interval
    I2: Interval
    beta: float
    s: tuple[float, float, float, float] = (0.5, 0.5, 0.5, 0.5)
    psi: tuple[tuple[float, ...], ...] = REFERENCE_PSI
    delta: float = 0.6
    eps_alpha: float = 0.0
    theta_alpha: float = 0.0
    merge_tolerance: float = DEFAULT_MERGE_TOLERANCE
    generalized_placement: bool = False

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        object.__setattr__(self, "psi", tuple(tuple(float(c) for c in coeffs) for coeffs in self.psi))
        if len(self.s) != 4 or len(self.psi) != 3:
            raise ValueError("need four contraction factors and three psi polynomials")

    @property
    def intervals(self) -> tuple[Interval, Interval]:
        return (self.I1, self.I2)

    @property
    def lam(self) -> tuple[float, float]:
        """Base-branch derivatives g' on I1 and I2."""
        return (1.0 / self.I1.length, 1.0 / self.I2.length)

    def psi_poly(self, j: int) -> Polynomial:
        return _polys(self.psi)[j][0]

    def g(self, x: float) -> float:
        for k, iv in enumerate(self.intervals):
            if iv.lo <= x <= iv.hi:
                return (x - iv.lo) / iv.length
        raise ValueError(f"x = {x!r} is outside I1 and I2")

    def g_inv(self, k: int, x: float) -> float:
        iv = self.intervals[k - 1]
        return iv.lo + iv.length * x

    def subinterval(self, i: int, j: int) -> Interval:
        """I_ij: the part of I_i that g maps onto I_j."""
        target = self.intervals[j - 1]
        return Interval(self.g_inv(i, target.lo), self.g_inv(i, target.hi))

    def branch(self, a: int, b: int, x: float) -> tuple[float, float]:
        """``(offset, scale)`` with ``h(x, y) = offset + scale*y`` on branch (a, b)."""
        si, pj, sign = BRANCHES[(a, b)]
        offset = 0.0 if pj is None else float(self.psi_poly(pj)(x))
        return offset, sign * self.s[si]

    def branch_dx(self, a: int, b: int, x: float) -> float:
        pj = BRANCHES[(a, b)][1]
        return 0.0 if pj is None else float(_polys(self.psi)[pj][1](x))


def default_config(alpha: float) -> SystemParams:
    """Exact-linear instance: both base intervals of length alpha^2/4."""
    if not (0 < alpha <= 0.05):
        raise ValueError(f"alpha must lie in (0, 0.05], got {alpha}")
    a2 = alpha * alpha
    I1 = Interval(0.5 - 3 * a2 / 8, 0.5 - a2 / 8)
    I2 = Interval(1 - alpha - 3 * a2 / 8, 1 - alpha - a2 / 8)
    lam = 4.0 / a2
    return SystemParams(
        alpha=alpha, I1=I1, I2=I2, beta=0.9 * lam, delta=0.6,
        eps_alpha=3 * a2 / 8, theta_alpha=alpha / 100,
    )


def coding_length(p: SystemParams) -> int:
    """Number of symbols that pins a point of J_* down to ``CODING_RESOLUTION``."""
    width = max(p.I1.length, p.I2.length)
    return max(2, math.ceil(math.log(CODING_RESOLUTION) / math.log(width)))


def base_point(p: SystemParams, w: Itinerary | str | Sequence[int]) -> float:
    """Point of the cylinder [w], by inverse branches from the midpoint of I_{w_last}.

    The result is within |I| * beta**(-len(w)) of every point of J_* whose
    coding starts with ``w``.
    """
    w = Itinerary.parse(w)
    last = p.intervals[w[-1] - 1]
    x = 0.5 * (last.lo + last.hi)
    for k in reversed(w.symbols[:-1]):
        x = p.g_inv(k, x)
    return x


def coded_point(p: SystemParams, w: Itinerary | str | Sequence[int]) -> float:
    """``base_point`` of the periodic continuation truncated at :func:`coding_length`."""
    return base_point(p, Itinerary.parse(w).prefix(coding_length(p)))


def preimage_itineraries(w: Itinerary | str | Sequence[int]) -> tuple[Itinerary, Itinerary]:
    w = Itinerary.parse(w)
    return w.prepend(1), w.prepend(2)


def _branch_of(w: Itinerary) -> tuple[int, int]:
    if len(w) < 2:
        raise ValueError("fiber map needs at least two symbols (current and image)")
    return w[0], w[1]


def fiber_map(p: SystemParams, w, y: float) -> float:
    w = Itinerary.parse(w)
    a, b = _branch_of(w)
    offset, scale = p.branch(a, b, base_point(p, w))
    return offset + scale * y


def fiber_derivatives(p: SystemParams, w, y: float) -> tuple[float, float]:
    w = Itinerary.parse(w)
    a, b = _branch_of(w)
    return p.branch_dx(a, b, base_point(p, w)), p.branch(a, b, 0.0)[1]


def derivative_matrix(p: SystemParams, w, y: float) -> np.ndarray:
    """Df at (base_point(w), y)."""
    w = Itinerary.parse(w)
    dx, dy = fiber_derivatives(p, w, y)
    return np.array([[p.lam[w[0] - 1], 0.0], [dx, dy]])


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool
    gating: bool = True
    note: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)
    theta_hat: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.gating and not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "theta_hat": self.theta_hat,
            "checks": [
                {"name": c.name, "lhs": c.lhs, "relation": c.relation, "rhs": c.rhs,
                 "passed": c.passed, "gating": c.gating, "note": c.note}
                for c in self.checks
            ],
        }


def _less(name, lhs, rhs, **kw) -> Check:
    return Check(name, float(lhs), float(rhs), "<", bool(lhs < rhs), **kw)


def _c1_distance(poly: Polynomial, ref: Polynomial, n: int = 10_000) -> float:
    xs = np.linspace(0.0, 1.0, n + 1)
    diff = poly - ref
    return float(max(np.max(np.abs(diff(xs))), np.max(np.abs(diff.deriv()(xs)))))


def theta_hat(p: SystemParams) -> float:
    """Largest deviation from the basic example, in the sense of the C^1 closeness condition."""
    dists = [_c1_distance(p.psi_poly(j), Polynomial(REFERENCE_PSI[j])) for j in range(3)]
    dists += [abs(si - 0.5) for si in p.s]
    return max(dists)


def validate(p: SystemParams) -> ValidationReport:
    a = p.alpha
    b1, b2 = p.I1.lo, p.I1.hi
    b3, b4 = p.I2.lo, p.I2.hi
    psi1, psi2, psi3 = (p.psi_poly(j) for j in range(3))
    s1, s2, s3, s4 = p.s
    checks: list[Check] = []

    if p.generalized_placement:
        eps = max(abs(b1 - 0.5), abs(b2 - 0.5), abs(b3 - (1 - a)), abs(b4 - (1 - a)))
    else:
        eps = max(abs(b1 - 0.5), abs(b3 - (1 - a)))
        checks.append(_less("I1_left_of_half", b2, 0.5))
        checks.append(_less("I2_left_of_1-alpha", b3, 1 - a))
        checks.append(Check("I2_right_end", b4, 1 - a, "<=", b4 <= 1 - a))
    checks.append(Check("epsilon_positive", 0.0, eps, "<", eps > 0))
    checks.append(_less("epsilon<alpha^2", eps, a * a))
    checks.append(_less("I1_before_I2", b2, b3, note="keeps the four subintervals I_ij disjoint"))
    checks.append(Check("inside_unit_interval", min(b1, b3), max(b2, b4), "in [0,1]",
                        0 <= b1 and b4 <= 1))

    checks.append(_less("beta>2", 2.0, p.beta))
    for k, lam in enumerate(p.lam, start=1):
        checks.append(_less(f"beta<g'_I{k}", p.beta, lam))
        checks.append(_less(f"g'_I{k}<beta^2", lam, p.beta ** 2))

    checks.append(_less("max_s<delta", max(p.s), p.delta))
    checks.append(_less("delta<1", p.delta, 1.0))

    th = theta_hat(p)
    checks.append(_less("theta_hat<theta_alpha", th, p.theta_alpha,
                        note="C^1 closeness to the basic example"))

    psi1_h, psi2_a, psi3_h = float(psi1(0.5)), float(psi2(1 - a)), float(psi3(0.5))
    c1_lhs = psi1_h + s1 * psi2_a
    c1_rhs = psi2_a + s2 * (psi3_h - s3 * psi2_a)
    checks.append(_less("C1", c1_lhs, c1_rhs, note="overlap of the two preimage images"))

    c2_mid = psi3_h - s3 * psi1_h / (1 - s1) - s4 * (psi3_h - s3 * psi2_a)
    checks.append(Check("C2", 0.0, c2_mid, "<", c2_mid > 0,
                        note="limit gap over I2 must be positive"))
    checks.append(_less("C2_upper", c2_mid, a, note="limit gap over I2 below alpha"))
    checks.append(_less("C2_half_width_lower", a / 2, c2_mid, gating=False,
                        note="printed lower bound; the basic example itself gives alpha/4"))

    lo_img, hi_img = _branch_image_range(p)
    checks.append(Check("fiber_maps_into_unit_interval", lo_img, hi_img, "in [0,1]",
                        lo_img >= 0.0 and hi_img <= 1.0))
    return ValidationReport(checks, th)


def _branch_image_range(p: SystemParams, n: int = 257) -> tuple[float, float]:
    lo, hi = math.inf, -math.inf
    for (i, j) in BRANCHES:
        dom = p.subinterval(i, j)
        for x in np.linspace(dom.lo, dom.hi, n):
            off, sc = p.branch(i, j, float(x))
            for y in (0.0, 1.0):
                v = off + sc * y
                lo, hi = min(lo, v), max(hi, v)
    return lo, hi


@lru_cache(maxsize=64)
def sup_dx(p: SystemParams, n: int = 257) -> float:
    """K: sup of |d h / d x| over the four branch domains (sampled on n points each)."""
    K = 0.0
    for (i, j), (_, pj, _) in BRANCHES.items():
        if pj is None:
            continue
        dom = p.subinterval(i, j)
        K = max(K, float(np.max(np.abs(_polys(p.psi)[pj][1](np.linspace(dom.lo, dom.hi, n))))))
    return K


# -- config files -------------------------------------------------------------

_CONFIG_KEYS = {"alpha", "I1", "I2", "s1", "s2", "s3", "s4", "psi1", "psi2", "psi3",
                "delta", "merge_tolerance", "beta", "theta_alpha", "generalized_placement"}


def params_from_mapping(cfg: dict) -> SystemParams:
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "alpha" not in cfg:
        raise ValueError("config must define alpha")
    base = default_config(float(cfg["alpha"]))
    kw: dict = {}
    for key in ("I1", "I2"):
        if key in cfg:
            lo, hi = cfg[key]
            kw[key] = Interval(float(lo), float(hi))
    if any(f"s{i}" in cfg for i in range(1, 5)):
        kw["s"] = tuple(float(cfg.get(f"s{i}", base.s[i - 1])) for i in range(1, 5))
    if any(f"psi{j}" in cfg for j in range(1, 4)):
        kw["psi"] = tuple(tuple(cfg.get(f"psi{j}", base.psi[j - 1])) for j in range(1, 4))
    for key in ("delta", "merge_tolerance", "theta_alpha", "beta"):
        if key in cfg:
            kw[key] = float(cfg[key])
    if "generalized_placement" in cfg:
        kw["generalized_placement"] = bool(cfg["generalized_placement"])
    p = replace(base, **kw)
    if p.I1 != base.I1 or p.I2 != base.I2:
        a = p.alpha
        eps = max(abs(p.I1.lo - 0.5), abs(p.I2.lo - (1 - a)))
        extra = {"eps_alpha": eps}
        if "beta" not in kw:
            extra["beta"] = 0.9 * min(p.lam)
        p = replace(p, **extra)
    return p


def load_config(path: str | Path) -> SystemParams:
    text = Path(path).read_text(encoding="utf-8")
    cfg = yaml.safe_load(text) or {}
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: expected a key-value mapping")
    return params_from_mapping(cfg)


def params_to_mapping(p: SystemParams) -> dict:
    return {
        "alpha": p.alpha,
        "I1": [p.I1.lo, p.I1.hi],
        "I2": [p.I2.lo, p.I2.hi],
        **{f"s{i + 1}": v for i, v in enumerate(p.s)},
        **{f"psi{j + 1}": list(c) for j, c in enumerate(p.psi)},
        "delta": p.delta,
        "beta": p.beta,
        "theta_alpha": p.theta_alpha,
        "merge_tolerance": p.merge_tolerance,
        "generalized_placement": p.generalized_placement,
    }


def iter_words(length: int) -> Iterable[Itinerary]:
    for word in itertools.product((1, 2), repeat=length):
        yield Itinerary(word)
