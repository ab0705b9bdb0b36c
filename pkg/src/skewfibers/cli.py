"""Command-line front end.

Every command loads a parameter set (``--config`` YAML and/or ``--alpha``),
runs one analysis and writes a JSON or CSV report to stdout or ``--out``.
Exit status: 0 success, 1 a theory-backed check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import io as _io
from .cantor import gap_lemma, hd_lower_bound, hky_region, overlap_certificate, thickness
from .errors import DepthCapExceeded, LiftError, PrecisionError, PressureError, TheoremViolation
from .fibers import fiber_report, overlap_set, preimage_components
from .geometry import intersect
from .system import Itinerary, coding_length, default_config, load_config, params_to_mapping, validate
from .tangent import (cone_verification, extend_choices, sample_prehistory, separation_pair,
                      slope_separation, unstable_slope, backward_lift)
from .thermo import dimension_report, overlap_band, preimage_census

COMMANDS = ("validate", "fiber", "thickness", "overlap", "omega", "cone", "dimension", "census",
            "full-report")

DEFAULT_DEPTH = {"fiber": 12, "thickness": 14, "overlap": 12, "omega": 16, "cone": 2,
                 "dimension": 20, "census": 14, "full-report": 12, "validate": 0}
DEFAULT_SAMPLES = {"census": 10_000, "cone": 20, "full-report": 2000}
CONE_TAIL = 3
SEPARATION_TAIL = 3


class InputError(ValueError):
    pass


@dataclass
class RunManifest:
    config: str | None
    command: str
    itineraries: list[str]
    codings: list[str]
    depth: int
    seed: int
    out: str | None
    tool_version: str
    parameters: dict
    timestamp: str = ""

    def digest(self) -> str:
        body = asdict(self)
        body.pop("timestamp")
        text = _io.dumps(body)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class Outcome:
    payload: object
    header: list[str] | None = None
    rows: list[tuple] | None = None
    violations: list[str] = field(default_factory=list)


# -- commands -------------------------------------------------------------------

def _itins(args) -> list[Itinerary]:
    return [Itinerary.parse(s) for s in (args.itinerary or ["111"])]


def cmd_validate(p, args) -> Outcome:
    rep = validate(p)
    d = rep.to_dict()
    rows = [(c["name"], c["lhs"], c["relation"], c["rhs"], c["passed"], c["gating"])
            for c in d["checks"]]
    viol = [f"validation check {c.name} failed" for c in rep.failures()]
    return Outcome(d, ["name", "lhs", "relation", "rhs", "passed", "gating"], rows, viol)


def cmd_fiber(p, args) -> Outcome:
    reps = [fiber_report(p, w, args.depth) for w in _itins(args)]
    keys = list(reps[0])
    return Outcome(reps, keys, [tuple(r[k] for k in keys) for r in reps])


def _thickness_row(p, w: Itinerary, n: int) -> dict:
    from .fibers import fiber_set

    u = fiber_set(p, w, n).set
    s1, s2 = preimage_components(p, w, n)
    t, t1, t2 = thickness(u), thickness(s1), thickness(s2)
    return {
        "itinerary": str(w), "depth": n, "tau_fiber": t, "tau_S1": t1, "tau_S2": t2,
        "gap_lemma": gap_lemma(t1, t2), "hky": hky_region(t1, t2),
        "overlap_nonempty": not intersect(s1, s2).is_empty(),
        "hd_lower_bound": hd_lower_bound(t),
    }


def cmd_thickness(p, args) -> Outcome:
    lo = args.min_depth if args.min_depth is not None else args.depth
    if lo > args.depth:
        raise InputError("--min-depth exceeds --depth")
    rows = [_thickness_row(p, w, n) for w in _itins(args) for n in range(max(lo, 1), args.depth + 1)]
    keys = list(rows[0])
    return Outcome(rows, keys, [tuple(r[k] for k in keys) for r in rows])


def _overlap_entry(p, w: Itinerary, n: int) -> tuple[dict, list[str]]:
    viol = []
    if w[0] == 1:
        s1, s2 = preimage_components(p, w, n)
        entry = {"itinerary": str(w), "depth": n, "kind": "two f-preimages"}
        entry.update(overlap_certificate(s1, s2))
        band = overlap_band(p)
        if entry["overlap_nonempty"]:
            entry["hull_in_band"] = band[0] <= entry["F_hull"][0] and entry["F_hull"][1] <= band[1]
        else:
            viol.append(f"empty overlap over {w} at depth {n}")
    else:
        F = overlap_set(p, w, n, strict=False)
        entry = {"itinerary": str(w), "depth": n, "kind": "two f^2-preimages",
                 "overlap_nonempty": not F.is_empty(), "F_components": len(F)}
        if F.is_empty():
            viol.append(f"empty overlap over {w} at depth {n}")
        else:
            entry["F_hull"] = [F.hull.lo, F.hull.hi]
            entry["tau_F"] = thickness(F)
    return entry, viol


def cmd_overlap(p, args) -> Outcome:
    entries, viol = [], []
    for w in _itins(args):
        e, v = _overlap_entry(p, w, args.depth)
        entries.append(e)
        viol += v
    keys = ["itinerary", "depth", "overlap_nonempty", "F_components"]
    return Outcome(entries, keys, [tuple(e[k] for k in keys) for e in entries], viol)


def _default_y(p, w: Itinerary, n_check: int) -> float:
    F = overlap_set(p, w, n_check + SEPARATION_TAIL + 1, strict=True)
    k = len(F) // 2
    return 0.5 * (float(F.lo[k]) + float(F.hi[k]))


def _separation_entry(p, w, y, c1, c2, n_check, seed) -> dict:
    c1 = extend_choices(p, w, y, c1, SEPARATION_TAIL, n_check, seed)
    c2 = extend_choices(p, w, y, c2, SEPARATION_TAIL, n_check, seed)
    rep = slope_separation(p, w, y, c1, c2, n_check=n_check)
    om1 = unstable_slope(p, backward_lift(p, w, y, c1, n_check))
    om2 = unstable_slope(p, backward_lift(p, w, y, c2, n_check))
    out = {"itinerary": str(w), "y": y, "choices1": "".join(map(str, c1)),
           "choices2": "".join(map(str, c2))}
    out.update(rep.to_dict())
    out.update({"omega1": om1[0], "omega1_error": om1[1], "omega2": om2[0],
                "omega2_error": om2[1]})
    return out


def cmd_omega(p, args) -> Outcome:
    n_check = args.depth
    entries, viol = [], []
    for w in _itins(args):
        y = args.y if args.y is not None else _default_y(p, w, n_check)
        e = _separation_entry(p, w, y, _choices(args.choices1), _choices(args.choices2),
                              n_check, args.seed)
        if not e["pass"]:
            viol.append(f"slope separation failed over {w}")
        entries.append(e)
    keys = list(entries[0])
    return Outcome(entries, keys, [tuple(e[k] for k in keys) for e in entries], viol)


def _choices(text: str) -> tuple[int, ...]:
    try:
        return Itinerary.parse(text).symbols
    except ValueError as exc:
        raise InputError(f"bad choice sequence {text!r}: {exc}") from exc


def _cone_reports(p, seed: int, samples: int, Ns=(1, 2)) -> list[dict]:
    rng = np.random.default_rng(seed)
    phs = [sample_prehistory(p, max(Ns) + CONE_TAIL, rng) for _ in range(samples)]
    gamma = 0.99 * math.sqrt(p.beta ** 2 - 1)
    return [cone_verification(p, gamma, N, phs).to_dict() for N in Ns]


def cmd_cone(p, args) -> Outcome:
    Ns = tuple(range(1, args.depth + 1))
    reps = _cone_reports(p, args.seed, args.samples, Ns)
    viol = [f"cone check failed for N = {r['N']}" for r in reps if not (r["pass"] and r["chain_ok"])]
    keys = list(reps[0])
    return Outcome(reps, keys, [tuple(r[k] for k in keys) for r in reps], viol)


def cmd_dimension(p, args) -> Outcome:
    w = _itins(args)[0]
    census_depth = min(14, args.depth)
    rep = dimension_report(p, w, (census_depth, args.depth), seed=args.seed,
                           samples=args.samples)
    d = rep.to_dict()
    viol = [f"dimension invariant {k} failed" for k, ok in rep.invariants.items() if not ok]
    rows = [(k, v) for k, v in d.items() if not isinstance(v, (dict, list))]
    return Outcome(d, ["quantity", "value"], rows, viol)


def cmd_census(p, args) -> Outcome:
    w = _itins(args)[0]
    rep = preimage_census(p, w, args.depth, args.samples, args.seed)
    viol = []
    sizes = rep.class_sizes
    if w[0] == 1 and (sizes[1] == 0 or sizes[2] == 0):
        viol.append("census found only one preimage class over I1")
    return Outcome(rep.summary(), ["y", "d_n", "in_overlap_band"], rep.rows(), viol)


def cmd_full_report(p, args) -> Outcome:
    itins = _itins(args)
    n = args.depth
    parts: dict = {}
    viol: list[str] = []

    val = cmd_validate(p, args)
    parts["validate"] = val.payload
    viol += val.violations

    parts["fibers"] = [fiber_report(p, w, n) for w in itins]
    parts["thickness"] = [_thickness_row(p, w, k) for w in itins for k in range(4, n + 1)]

    overlaps = []
    for w in itins:
        e, v = _overlap_entry(p, w, n)
        overlaps.append(e)
        viol += v
    parts["overlap"] = overlaps

    rng = np.random.default_rng(args.seed)
    seps = []
    for m in (1, 2, 3):
        w, y, c1, c2 = separation_pair(p, m, rng)
        rep = slope_separation(p, w, y, c1, c2)
        seps.append({"itinerary": str(w), "y": y, "choices1": "".join(map(str, c1)),
                     "choices2": "".join(map(str, c2)), **rep.to_dict()})
        if not rep.passed:
            viol.append(f"slope separation failed at m = {m}")
    parts["separation"] = seps

    cones = _cone_reports(p, args.seed, DEFAULT_SAMPLES["cone"])
    viol += [f"cone check failed for N = {r['N']}" for r in cones
             if not (r["pass"] and r["chain_ok"])]
    parts["cone"] = cones

    dim = dimension_report(p, itins[0], (14, 20), seed=args.seed, samples=args.samples)
    parts["dimension"] = dim.to_dict()
    viol += [f"dimension invariant {k} failed" for k, ok in dim.invariants.items() if not ok]

    cen = preimage_census(p, itins[0], 14, args.samples, args.seed)
    parts["census"] = cen.summary()
    return Outcome(parts, violations=viol)


HANDLERS = {
    "validate": cmd_validate, "fiber": cmd_fiber, "thickness": cmd_thickness,
    "overlap": cmd_overlap, "omega": cmd_omega, "cone": cmd_cone, "dimension": cmd_dimension,
    "census": cmd_census, "full-report": cmd_full_report,
}


# -- plumbing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML parameter file")
    common.add_argument("--alpha", type=float, help="base parameter (overrides the config)")
    common.add_argument("--itinerary", action="append",
                        help="base itinerary over {1,2}, repeatable; extended periodically")
    common.add_argument("--depth", type=int, help="recursion / certification depth")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int)
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="skewfibers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "thickness":
            sp.add_argument("--min-depth", type=int, help="first depth of the scan")
        if name == "omega":
            sp.add_argument("--y", type=float, help="fiber coordinate (default: inside the overlap)")
            sp.add_argument("--choices1", default="1")
            sp.add_argument("--choices2", default="2")
    return parser


def _load_params(args):
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"cannot read config {path}")
        p = load_config(path)
        if args.alpha is not None:
            mapping = params_to_mapping(p)
            mapping.pop("I1"), mapping.pop("I2"), mapping.pop("beta")
            mapping["alpha"] = args.alpha
            from .system import params_from_mapping
            p = params_from_mapping(mapping)
        return p
    return default_config(args.alpha if args.alpha is not None else 0.01)


def _render(outcome: Outcome, manifest: RunManifest, digest: str, fmt: str) -> str:
    if fmt == "csv":
        if outcome.rows is None:
            raise InputError(f"{manifest.command} has no CSV form; use --format json")
        head = f"# manifest_hash={digest} tool={manifest.tool_version} timestamp={manifest.timestamp}\n"
        return head + _io.csv_text(outcome.header, outcome.rows)
    doc = {"manifest": asdict(manifest), "manifest_hash": digest,
           "violations": outcome.violations, "result": outcome.payload}
    return _io.dumps(doc)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.depth is None:
        args.depth = DEFAULT_DEPTH[args.command]
    if args.samples is None:
        args.samples = DEFAULT_SAMPLES.get(args.command, 2000)
    try:
        if args.samples < 1 or args.depth < 0:
            raise InputError("--samples must be >= 1 and --depth >= 0")
        p = _load_params(args)
        itins = _itins(args)
        manifest = RunManifest(
            config=args.config, command=args.command, itineraries=[str(w) for w in itins],
            codings=[str(w.prefix(coding_length(p))) for w in itins], depth=args.depth,
            seed=args.seed, out=args.out, tool_version=__version__,
            parameters=params_to_mapping(p))
        outcome = HANDLERS[args.command](p, args)
        manifest.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        text = _render(outcome, manifest, manifest.digest(), args.format)
    except TheoremViolation as exc:
        print(f"theorem violation: {exc}", file=sys.stderr)
        return 1
    except (InputError, ValueError, LiftError, PrecisionError, PressureError, DepthCapExceeded,
            OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"{args.command}.{args.format}"
        target.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for v in outcome.violations:
        print(f"violation: {v}", file=sys.stderr)
    return 1 if outcome.violations else 0


if __name__ == "__main__":
    sys.exit(main())
