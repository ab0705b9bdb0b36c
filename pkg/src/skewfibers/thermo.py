"""Pressure on the full two-shift, Bowen roots, box counting and the preimage census."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special, stats

from .cantor import hd_lower_bound, thickness
from .errors import PressureError
from .fibers import fiber_set
from .geometry import IntervalUnion, box_count
from .system import BRANCHES, Itinerary, SystemParams, base_point, coding_length, sup_dx

MAX_CYLINDER_LENGTH = 22

# evaluator(words) -> (inf, sup) of the Birkhoff sum over each cylinder; words is (count, n) in {1, 2}
WordEvaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    weights: np.ndarray | None = None
    evaluator: WordEvaluator | None = None

    def __post_init__(self):
        if self.kind == "two_cylinder_constant":
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (2, 2) or not np.all(np.isfinite(w)):
                raise ValueError("two-cylinder weights must be a finite 2x2 array")
            object.__setattr__(self, "weights", w)
        elif self.kind == "word_evaluated":
            if self.evaluator is None:
                raise ValueError("word-evaluated potential needs an evaluator")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def two_cylinder(cls, weights) -> PotentialSpec:
        return cls("two_cylinder_constant", weights=np.asarray(weights, dtype=float))

    @classmethod
    def constant(cls, c: float) -> PotentialSpec:
        return cls.two_cylinder(np.full((2, 2), float(c)))


def pressure_matrix(weights) -> float:
    """log spectral radius of exp(weights), in closed form for the 2x2 case."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (2, 2) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a finite 2x2 array")
    top = float(w.max())
    a, b, c, d = np.exp(w - top).ravel()
    rho = 0.5 * (a + d + math.sqrt((a - d) ** 2 + 4 * b * c))
    return top + math.log(rho)


def _cylinder_sums_two(w: np.ndarray, n: int) -> tuple[float, float]:
    """log of sum over n-cylinders of exp(inf) and exp(sup) of the Birkhoff sum."""
    # log of the row vector 1^T M^(n-1): paths of n symbols, n-1 transitions
    v = np.zeros(2)
    for _ in range(n - 1):
        v = special.logsumexp(v[:, None] + w, axis=0)
    lo = special.logsumexp(v + w.min(axis=1))
    hi = special.logsumexp(v + w.max(axis=1))
    return float(lo), float(hi)


def all_words(n: int) -> np.ndarray:
    """Every word of length n over {1, 2}, as rows, in lexicographic order."""
    codes = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.int8) + 1


def pressure_cylinder(pot: PotentialSpec, n: int) -> tuple[float, float]:
    """(1/n) log sum_{|w| = n} exp(inf / sup of S_n over [w]): a bracket for the pressure."""
    if n < 1:
        raise ValueError("cylinder length must be >= 1")
    if n > MAX_CYLINDER_LENGTH:
        raise ValueError(f"cylinder length {n} exceeds the cap {MAX_CYLINDER_LENGTH}")
    if pot.kind == "two_cylinder_constant":
        lo, hi = _cylinder_sums_two(pot.weights, n)
    else:
        inf, sup = pot.evaluator(all_words(n))
        lo, hi = float(special.logsumexp(inf)), float(special.logsumexp(sup))
    return lo / n, hi / n


# -- potential families --------------------------------------------------------

def unstable_family(p: SystemParams) -> Callable[[float], PotentialSpec]:
    """t -> -t log g' as a two-cylinder potential (depends on the current symbol only)."""
    logs = np.log(np.array(p.lam))

    def fam(t: float) -> PotentialSpec:
        return PotentialSpec.two_cylinder(-t * np.repeat(logs[:, None], 2, axis=1))

    return fam


def stable_family(p: SystemParams, eta: float = 2.0) -> Callable[[float], PotentialSpec]:
    """t -> t log|dh/dy| - log eta; |dh/dy| on [ij] is the contraction of branch (i, j)."""
    logs = np.empty((2, 2))
    for (i, j), (si, _, _) in BRANCHES.items():
        logs[i - 1, j - 1] = math.log(p.s[si])
    shift = math.log(eta)

    def fam(t: float) -> PotentialSpec:
        return PotentialSpec.two_cylinder(t * logs - shift)

    return fam


def constant_expansion_family(c: float) -> Callable[[float], PotentialSpec]:
    """t -> -t log c, whose Bowen root is log 2 / log c."""
    lc = math.log(c)
    return lambda t: PotentialSpec.constant(-t * lc)


def max_unstable_slope(p: SystemParams) -> float:
    K = sup_dx(p)
    Kp = K / (1.0 - p.delta / p.beta)
    return Kp / (p.beta - p.delta)


def full_unstable_family(p: SystemParams) -> Callable[[float], PotentialSpec]:
    """t -> -t log|Df restricted to the unstable direction|, evaluated on cylinders.

    Along E^u, |Df_u| = g' * sqrt(1 + omega(next)^2) / sqrt(1 + omega^2), so the
    Birkhoff sum over n steps is -t (sum log g' + half the log-ratio of the
    end slopes). The slope factor is only known up to |omega| <= omega_max,
    which gives the inf/sup over a cylinder.
    """
    logs = np.log(np.array(p.lam))
    corr = 0.5 * math.log1p(max_unstable_slope(p) ** 2)

    def fam(t: float) -> PotentialSpec:
        def evaluate(words: np.ndarray):
            base = -t * logs[words - 1].sum(axis=1)
            spread = abs(t) * corr
            return base - spread, base + spread

        return PotentialSpec("word_evaluated", evaluator=evaluate)

    return fam


# -- Bowen roots ---------------------------------------------------------------

ROOT_SLACK = 8 * np.finfo(float).eps


def _check_monotone(P: Callable[[float], float], lo: float, hi: float, points: int = 17) -> None:
    ts = np.linspace(lo, hi, points)
    vals = np.array([P(float(t)) for t in ts])
    if np.any(np.diff(vals) >= 0):
        raise PressureError("pressure is not strictly decreasing on the range")


def _root(P: Callable[[float], float], lo: float, hi: float, xtol: float) -> float:
    plo, phi = P(lo), P(hi)
    if abs(plo) <= ROOT_SLACK:
        return lo
    if abs(phi) <= ROOT_SLACK:
        return hi
    if plo * phi > 0:
        raise PressureError(f"no sign change of the pressure on [{lo}, {hi}]")
    return float(optimize.bisect(P, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=400))


def bowen_zero(family: Callable[[float], PotentialSpec], t_range=(0.0, 1.0),
               xtol: float = 1e-12) -> float:
    """Zero of t -> P(family(t)) for two-cylinder potentials, by bisection."""
    lo, hi = map(float, t_range)

    def P(t: float) -> float:
        pot = family(t)
        if pot.kind != "two_cylinder_constant":
            raise PressureError("bowen_zero needs two-cylinder potentials; use bowen_zero_bracket")
        return pressure_matrix(pot.weights)

    _check_monotone(P, lo, hi)
    return _root(P, lo, hi, xtol)


def bowen_zero_bracket(family: Callable[[float], PotentialSpec], n: int, t_range=(0.0, 1.0),
                       xtol: float = 1e-12) -> tuple[float, float]:
    """Interval holding the Bowen root, from the zeros of the lower and upper cylinder pressures."""
    lo, hi = map(float, t_range)
    roots = []
    for k in (0, 1):
        def P(t: float, k=k) -> float:
            return pressure_cylinder(family(t), n)[k]

        _check_monotone(P, lo, hi, points=9)
        roots.append(_root(P, lo, hi, xtol))
    return min(roots), max(roots)


# -- box counting ---------------------------------------------------------------

def dyadic_scales(eps_lo: float, eps_hi: float) -> np.ndarray:
    k_lo = math.ceil(-math.log2(eps_hi) - 1e-12)
    k_hi = math.floor(-math.log2(eps_lo) + 1e-12)
    return 2.0 ** -np.arange(k_lo, k_hi + 1, dtype=float)


def box_counts(u: IntervalUnion, scales: Sequence[float]) -> np.ndarray:
    return np.array([box_count(u, float(e)) for e in scales], dtype=float)


def box_dimension(u: IntervalUnion, eps_lo: float, eps_hi: float) -> tuple[float, float]:
    """Least-squares slope of log N(eps) against log(1/eps) over dyadic eps, and its r^2."""
    if not (0 < eps_lo < eps_hi):
        raise ValueError("need 0 < eps_lo < eps_hi")
    if u.is_empty():
        raise ValueError("box dimension of an empty set")
    if eps_hi > u.hull.length / 4 * (1 + 1e-12):
        raise ValueError(f"eps_hi = {eps_hi} exceeds a quarter of the hull length")
    scales = dyadic_scales(eps_lo, eps_hi)
    if scales.size < 5:
        raise ValueError(f"only {scales.size} dyadic scales in [{eps_lo}, {eps_hi}]; need 5")
    fit = stats.linregress(-np.log(scales), np.log(box_counts(u, scales)))
    return float(fit.slope), float(fit.rvalue ** 2)


# -- preimage census ---------------------------------------------------------------

def overlap_band(p: SystemParams) -> tuple[float, float]:
    a = p.alpha
    return 0.5 + a / 2 - 10 * a * a, 0.5 + 3 * a / 4 + 10 * a * a


def preimage_count(p: SystemParams, w, ys, n: int) -> np.ndarray:
    """d_n(y): how many of the two inverse branches send y into the depth-(n-1) fiber."""
    if n < 1:
        raise ValueError("census needs depth >= 1")
    w = Itinerary.parse(w)
    ys = np.asarray(ys, dtype=float)
    L = coding_length(p)
    d = np.zeros(ys.shape, dtype=np.int64)
    for k in (1, 2):
        pre = w.prepend(k)
        offset, scale = p.branch(k, w[0], base_point(p, pre.prefix(L)))
        y_pre = (ys - offset) / scale
        inside = (y_pre >= 0.0) & (y_pre <= 1.0)
        inside &= np.asarray(fiber_set(p, pre, n - 1).set.contains(y_pre), dtype=bool)
        d += inside
    return d


def stratified_sample(u: IntervalUnion, count: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point per equal-measure stratum of u, returned in increasing order."""
    if count < 1:
        raise ValueError("need at least one sample")
    lengths = u.lengths
    total = float(lengths.sum())
    if not total > 0:
        raise ValueError("degenerate fiber (zero total length)")
    s = (np.arange(count) + rng.random(count)) / count * total
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(u) - 1)
    return np.minimum(u.lo[k] + (s - cum[k]), u.hi[k])


@dataclass
class CensusReport:
    itinerary: str
    depth: int
    seed: int
    ys: np.ndarray
    counts: np.ndarray
    band: tuple[float, float]

    def by_class(self) -> dict[int, np.ndarray]:
        return {d: self.ys[self.counts == d] for d in (0, 1, 2)}

    @property
    def class_sizes(self) -> dict[int, int]:
        return {d: int(np.sum(self.counts == d)) for d in (0, 1, 2)}

    def in_band(self) -> np.ndarray:
        lo, hi = self.band
        return (self.ys >= lo) & (self.ys <= hi)

    def summary(self) -> dict:
        two = self.ys[self.counts == 2]
        band = self.in_band()
        out = {
            "itinerary": self.itinerary,
            "depth": self.depth,
            "seed": self.seed,
            "samples": int(self.ys.size),
            "class_sizes": {str(k): v for k, v in self.class_sizes.items()},
            "overlap_band": list(self.band),
            "d2_in_band_fraction": float(np.mean(band[self.counts == 2])) if two.size else math.nan,
        }
        if two.size:
            out["d2_range"] = [float(two.min()), float(two.max())]
        return out

    def rows(self) -> list[tuple]:
        band = self.in_band()
        return [(float(y), int(d), bool(b)) for y, d, b in zip(self.ys, self.counts, band)]


def preimage_census(p: SystemParams, w, n: int, sample_count: int, seed: int) -> CensusReport:
    """Seeded stratified sample of the depth-n fiber, each point tagged with d_n."""
    w = Itinerary.parse(w)
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    u = fiber_set(p, w, n).set
    rng = np.random.default_rng(seed)
    ys = stratified_sample(u, sample_count, rng)
    return CensusReport(str(w), n, seed, ys, preimage_count(p, w, ys, n), overlap_band(p))


# -- dimension report ------------------------------------------------------------

@dataclass
class DimensionReport:
    t_u: float
    t_u_log_bound: float
    t_u_cylinder: tuple[float, float]
    t_s_lower: float
    t_s_eta_sampled: float
    eta_sampled: int
    t_s_upper_proxy: float
    t_s_box: float
    box_r2: float
    tau_measured: float
    pt_bound: float
    h_top: float
    depths: tuple[int, ...]
    invariants: dict = field(default_factory=dict)
    note: str = ("the inverse-pressure exponent bounding the stable dimension from above "
                 "is not computed; only the box estimate below 1 is checked")

    @property
    def passed(self) -> bool:
        return all(self.invariants.values())

    def to_dict(self) -> dict:
        return {
            "t_u": self.t_u,
            "t_u_log_bound": self.t_u_log_bound,
            "t_u_cylinder": list(self.t_u_cylinder),
            "t_s_lower": self.t_s_lower,
            "t_s_eta_sampled": self.t_s_eta_sampled,
            "eta_sampled": self.eta_sampled,
            "t_s_upper_proxy": self.t_s_upper_proxy,
            "t_s_box": self.t_s_box,
            "box_r2": self.box_r2,
            "tau_measured": self.tau_measured,
            "pt_bound": self.pt_bound,
            "h_top": self.h_top,
            "depths": list(self.depths),
            "invariants": dict(self.invariants),
            "passed": self.passed,
            "note": self.note,
        }


BOX_TOLERANCE = 0.01


def dimension_report(p: SystemParams, w, depths: Sequence[int] = (14, 20), seed: int = 0,
                     samples: int = 2000, cylinder_n: int = 12) -> DimensionReport:
    depths = tuple(sorted(int(d) for d in depths))
    t_u = bowen_zero(unstable_family(p), (0.0, 1.0))
    t_u_bound = math.log(2) / math.log(p.beta / 2)
    t_u_cyl = bowen_zero_bracket(full_unstable_family(p), cylinder_n, (0.0, 1.0))

    t_s_lower = bowen_zero(stable_family(p, 2.0), (0.0, 1.0))
    census = preimage_census(p, w, depths[0], samples, seed)
    eta = max(int(census.counts.max()), 1)
    t_s_eta = bowen_zero(stable_family(p, float(eta)), (0.0, 1.0))
    t_s_upper = bowen_zero(stable_family(p, 1.0), (0.0, 2.0))

    deep = depths[-1]
    u = fiber_set(p, w, deep).set
    eps_lo = 2.0 ** -min(18, deep - 2)
    slope, r2 = box_dimension(u, eps_lo, 2.0 ** -6)
    tau = min(thickness(fiber_set(p, w, n).set) for n in depths)
    pt = hd_lower_bound(tau)
    h_top = pressure_matrix(np.zeros((2, 2)))

    inv = {
        "t_u<log_bound": t_u < t_u_bound,
        "t_u_in_cylinder_bracket": t_u_cyl[0] - 1e-9 <= t_u <= t_u_cyl[1] + 1e-9,
        "pt_bound<t_s_box": pt < slope,
        "t_s_box<=1": slope <= 1 + BOX_TOLERANCE,
        "t_s_lower<=t_s_box": t_s_lower <= slope + BOX_TOLERANCE,
    }
    return DimensionReport(t_u, t_u_bound, t_u_cyl, t_s_lower, t_s_eta, eta, t_s_upper,
                           slope, r2, tau, pt, h_top, depths, inv)
