"""Command-line front end.

Exit codes: 0 ok, 2 bad input, 3 no rule applies, 4 statistically invalid
result (truncation, unresolved search, failed verification).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, exclusion, svg
from .domain import Domain, DomainError, from_json
from .geometry import GeometryError, Line
from .sampler import SamplerError, SimConfig, estimate_moment

EXIT_OK, EXIT_INPUT, EXIT_NOT_APPLICABLE, EXIT_INVALID = 0, 2, 3, 4


class InputError(Exception):
    pass


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_domain(path: str) -> Domain:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read domain file: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return from_json(doc)
    except (DomainError, GeometryError) as exc:
        raise InputError(f"{path}: {exc}") from None


def parse_line(text: str) -> Line:
    """'x=1', 'y=0.5' or 'a,b,c' for a*x + b*y + c = 0."""
    t = text.replace(" ", "").lower()
    try:
        if t.startswith("x="):
            return Line.vertical(float(t[2:]))
        if t.startswith("y="):
            return Line.horizontal(float(t[2:]))
        a, b, c = (float(v) for v in t.split(","))
        return Line(a, b, c)
    except (ValueError, GeometryError) as exc:
        raise InputError(f"bad line {text!r}: {exc}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cfg(args) -> SimConfig:
    return SimConfig(seed=args.seed, max_steps=getattr(args, "max_steps", SimConfig.max_steps))


def localize_document(d: Domain) -> dict:
    return exclusion.localize(d).to_json()


# ------------------------------------------------------------------ commands

def cmd_localize(args) -> int:
    d = load_domain(args.domain)
    region = exclusion.localize(d)
    if args.format == "svg":
        _emit(svg.render(d, region), args.out)
    else:
        _emit(dumps(region.to_json()), args.out)
    return EXIT_OK if region.certificates else EXIT_NOT_APPLICABLE


def cmd_estimate(args) -> int:
    d = load_domain(args.domain)
    try:
        est = estimate_moment(d, (args.x, args.y), args.p, args.n, _cfg(args))
    except (DomainError, SamplerError, GeometryError) as exc:
        raise InputError(str(exc)) from None
    doc = {"domain": d.to_json(), "start": [args.x, args.y], "seed": args.seed,
           "estimate": est.to_json()}
    _emit(dumps(doc), args.out)
    return EXIT_OK if est.valid else EXIT_INVALID


def cmd_search(args) -> int:
    d = load_domain(args.domain)
    region = exclusion.localize(d)
    if not region.is_1d:
        print(f"error: candidate region is {region.kind}, not a segment or band", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    try:
        ce = analysis.search_center(d, region, args.p, args.budget, _cfg(args), args.n)
    except analysis.AnalysisError as exc:
        raise InputError(str(exc)) from None
    doc = {"domain": d.to_json(), "p": args.p, "seed": args.seed, "n_per_eval": args.n,
           "region": {k: v for k, v in region.to_json().items() if k != "certificates"},
           "center": ce.to_json(),
           "bracket_points": [list(q.as_tuple()) for q in ce.bracket_points(region)]}
    if args.format == "csv":
        _emit(ce.evaluations_csv(), args.out)
    else:
        _emit(dumps(doc), args.out)
    if args.csv:
        Path(args.csv).write_text(ce.evaluations_csv())
    invalid = ce.flagged or not all(e.estimate.valid for e in ce.evaluations)
    return EXIT_INVALID if invalid else EXIT_OK


def cmd_couple_check(args) -> int:
    from .verify import couple_report

    d = load_domain(args.domain)
    L = parse_line(args.line)
    try:
        rep = couple_report(d, (args.ax, args.ay), L, args.n, _cfg(args))
    except (DomainError, SamplerError, exclusion.ExclusionError) as exc:
        raise InputError(str(exc)) from None
    rep.update({"domain": d.to_json(), "a": [args.ax, args.ay], "line": L.to_json(),
                "seed": args.seed})
    _emit(dumps(rep), args.out)
    return EXIT_OK if rep["violations"] == 0 and rep["truncated"] == 0 else EXIT_INVALID


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        print(f"== {name}")
        for r in run_suite(name, scale=args.scale):
            print(r.line())
            ok &= r.passed
    return EXIT_OK if ok else EXIT_INVALID


def cmd_bounds(args) -> int:
    if args.theta is not None:
        rep = analysis.triangle_bounds(args.theta)
    elif args.domain:
        try:
            rep = analysis.named_bounds(load_domain(args.domain))
        except analysis.AnalysisError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NOT_APPLICABLE
    else:
        raise InputError("give --domain or --theta")
    _emit(dumps(rep.to_json()), args.out)
    return EXIT_OK


def cmd_normalize(args) -> int:
    _emit(dumps(load_domain(args.domain).to_json()), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptau", description="Locate p-th centers of planar domains.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, domain=True, sim=False):
        if domain:
            p.add_argument("--domain", required=True, metavar="FILE")
        if sim:
            p.add_argument("--p", type=float, default=1.0)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-steps", type=int, default=SimConfig.max_steps,
                           help="per-path step cap; capped paths count as truncated")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("localize", help="certified candidate region")
    common(p)
    p.add_argument("--format", choices=("json", "svg"), default="json")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("estimate", help="Monte Carlo estimate of E[tau^p]")
    common(p, sim=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("search", help="locate the p-th center inside the candidate region")
    common(p, sim=True)
    p.add_argument("--budget", type=int, default=16)
    p.add_argument("--n", type=int, default=20_000, help="paths per evaluation")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--csv", metavar="PATH", help="also write the evaluation trace here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("couple-check", help="audit the reflection coupling")
    common(p)
    p.add_argument("--ax", type=float, required=True)
    p.add_argument("--ay", type=float, required=True)
    p.add_argument("--line", required=True, help="'x=c', 'y=c' or 'a,b,c'")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_couple_check)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("suite", choices=("formulas", "coupling", "examples", "all"))
    p.add_argument("--scale", type=float, default=1.0, help="multiply sample sizes")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="closed-form candidate interval")
    p.add_argument("--domain", metavar="FILE")
    p.add_argument("--theta", type=float, help="isosceles triangle base angle")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("normalize", help="validate a domain file and write it back")
    common(p)
    p.set_defaults(func=cmd_normalize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < 2 ** 64:
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except analysis.AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
