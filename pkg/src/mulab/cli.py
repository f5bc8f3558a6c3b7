"""Command-line front end.

Three entry points matching the three verification families:

    mu-lab analyze --curves FILE --p 5 [--precision 6] [--layers 3]
                   [--ell-bound 200] [--format json|table]
                   [--cache DIR] [--verify-cache] [--config FILE]
    mu-lab lambda-invariants --presentation FILE
    mu-lab lift-lab run SCENARIO

Exit codes: 0 success, 2 invariant violation, 3 input error.
Configuration comes from flags plus an optional TOML-shaped config file;
environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import analyze_many, ingest, render_report
from .errors import (
    InconsistentAp,
    InvalidModel,
    InvariantViolation,
    MuLabError,
    ParseError,
)

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_INPUT = 3


def load_config(path: str | None) -> dict:
    """Parse a TOML-shaped config file: 'key = value' lines with int,
    bool, or quoted-string values (sections are ignored; keys are
    global)."""
    if not path:
        return {}
    out = {}
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line or line.startswith("["):
                    continue
                if "=" not in line:
                    raise ParseError(f"bad config line: {raw!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                if val.startswith('"') and val.endswith('"'):
                    out[key] = val[1:-1]
                elif val in ("true", "false"):
                    out[key] = val == "true"
                else:
                    try:
                        out[key] = int(val)
                    except ValueError:
                        raise ParseError(
                            f"unsupported config value: {raw!r}")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return out


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    p = args.p if args.p is not None else cfg.get("p")
    if p is None:
        print("error: --p is required (flag or config)", file=sys.stderr)
        return EXIT_INPUT
    precision = args.precision or cfg.get("precision", 6)
    layers = args.layers or cfg.get("layers", 3)
    ell_bound = args.ell_bound or cfg.get("ell_bound", 200)
    fmt = args.format or cfg.get("format", "json")
    cache = args.cache or cfg.get("cache")
    try:
        records = ingest(args.curves)
        reports = analyze_many(
            records, lambda rec: p, N_prec=precision, layers=layers,
            ell_bound=ell_bound, cache_dir=cache,
            verify_cache=args.verify_cache)
    except (ParseError, InvalidModel, InconsistentAp) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except MuLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(render_report(reports, fmt))
    return EXIT_OK


def cmd_lambda_invariants(args) -> int:
    from .iwasawa_modules import graded_ranks, load_presentation, \
        mu_profile
    try:
        pres = load_presentation(args.presentation)
        qs = graded_ranks(pres)
        prof = mu_profile(pres)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MuLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(json.dumps({
        "p": pres.p, "N": pres.N, "MT": pres.M,
        "graded_ranks": qs,
        "mu_vector": list(prof.mu_vector),
        "mu": prof.mu, "t": prof.t, "r": prof.r,
    }, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_lift_lab(args) -> int:
    from .liftlab import run_scenario
    try:
        with open(args.scenario) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        out = run_scenario(spec)
    except MuLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(json.dumps(out, sort_keys=True, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mu-lab",
        description="Residually reducible ordinary Galois "
                    "representations: classification, analytic Iwasawa "
                    "invariants, refined mu-invariants, lift laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classify curves and compute "
                                       "analytic mu/lambda")
    a.add_argument("--curves", required=True)
    a.add_argument("--p", type=int)
    a.add_argument("--precision", type=int)
    a.add_argument("--layers", type=int)
    a.add_argument("--ell-bound", dest="ell_bound", type=int)
    a.add_argument("--format", choices=["json", "table"])
    a.add_argument("--cache")
    a.add_argument("--verify-cache", action="store_true")
    a.add_argument("--config")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("lambda-invariants",
                       help="refined mu-invariants of a presented "
                            "Iwasawa module")
    b.add_argument("--presentation", required=True)
    b.set_defaults(func=cmd_lambda_invariants)

    c = sub.add_parser("lift-lab", help="run a lifting scenario")
    csub = c.add_subparsers(dest="liftcmd", required=True)
    crun = csub.add_parser("run")
    crun.add_argument("scenario")
    crun.set_defaults(func=cmd_lift_lab)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
