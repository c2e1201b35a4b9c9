"""``bphi-lab <verb> [flags]``: norms, growth integrals and verification runs.

stdout carries exactly one JSON object per invocation; progress and errors go
to stderr. Exit codes: 0 ok, 1 computation error, 2 usage, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

import numpy as np

from .functions import dilate, parse_function
from .harness import RunConfig, emit_report, run_verification, summarize, _jsonable
from .norms import (
    bmo_arc_norm,
    bmoa_garsia_norm,
    bphi_norm,
    distribution_function,
    exp_integral,
    growth_ratio,
    layer_cake_moment,
)
from .quadrature import QuadratureSpec
from .weights import parse_weight

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3
THEOREM_CHOICES = ("t1", "t1c", "t2", "t3", "bloch", "all")
CORPUS_NOTES = {
    "mono:1": "z",
    "mono:2": "z^2",
    "log1mz": "log(1 - z), Bloch but unbounded",
    "log2_1mz": "log^2(1 - z), outside the Bloch space",
    "lacunary:16": "sum_{k<16} z^(2^k), Hadamard gap series",
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, *names):
    add = {
        "fn": lambda: p.add_argument("--fn", help="function label, e.g. mono:1, log1mz, lacunary:16"),
        "weight": lambda: p.add_argument("--weight", default=None, help="weight label, e.g. power:0.5"),
        "r": lambda: p.add_argument("--r", type=float, help="dilation radius in (0, 1)"),
        "gamma": lambda: p.add_argument("--gamma", type=float, help="exponent scale"),
        "x": lambda: p.add_argument("--x", type=float, help="argument of g in (0, 1]"),
        "lambda_max": lambda: p.add_argument("--lambda-max", type=float, help="top of the lambda grid"),
        "rays": lambda: p.add_argument("--rays", type=int, help="number of rays"),
        "seed": lambda: p.add_argument("--seed", type=int, help="seed for randomized ray offsets"),
        "out": lambda: p.add_argument("--out", help="output path (file or report directory)"),
    }
    for n in names:
        add[n]()


def _spec_flags(p: argparse.ArgumentParser):
    p.add_argument("--ntheta", type=int, help="angular nodes")
    p.add_argument("--nrho", type=int, help="radial nodes")
    p.add_argument("--delta", type=float, help="sup-search cutoff 1 - |z| >= delta")
    p.add_argument("--refine", type=int, help="sup-search refinement levels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bphi-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("norm", help="B_phi, BMOA (area integral) or arc-BMO norm")
    p.add_argument("--kind", choices=("bphi", "bmoa", "bmo_arc"), default="bphi")
    _common(p, "fn", "weight", "r")
    _spec_flags(p)

    p = sub.add_parser("g", help="growth integral g(x) = int_x^1 phi(t)^2 / t dt")
    _common(p, "weight", "x")

    p = sub.add_parser("dist", help="boundary distribution function of |f(r zeta)|")
    _common(p, "fn", "r", "lambda_max", "out")
    p.add_argument("--ntheta", type=int, help="boundary nodes")

    p = sub.add_parser("expint", help="exponential integral along the circle of radius r")
    _common(p, "fn", "weight", "r", "gamma")
    _spec_flags(p)

    p = sub.add_parser("growth", help="radial growth ratio over equispaced rays")
    _common(p, "fn", "weight", "r", "rays", "seed")
    _spec_flags(p)

    p = sub.add_parser("verify", help="theorem checks over a corpus; writes a report")
    p.add_argument("--theorem", choices=THEOREM_CHOICES, default="all")
    p.add_argument("--config", help="RunConfig JSON")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int, default=1)
    _common(p, "rays", "seed", "out")
    _spec_flags(p)

    sub.add_parser("corpus", help="list built-in function and weight labels")
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _labels(args):
    """Resolve --fn/--weight before any computation; bad labels are usage errors."""
    try:
        f = parse_function(args.fn) if getattr(args, "fn", None) is not None else None
        w = parse_weight(args.weight) if getattr(args, "weight", None) is not None else None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return f, w


def _spec(args, base: QuadratureSpec | None = None) -> QuadratureSpec:
    base = base or QuadratureSpec()
    over = {k: v for k, v in (("n_theta", getattr(args, "ntheta", None)), ("n_rho", getattr(args, "nrho", None)),
                              ("delta", getattr(args, "delta", None)), ("refine", getattr(args, "refine", None)))
            if v is not None}
    try:
        return replace(base, **over)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _witness(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def cmd_norm(args):
    _need(args, "fn")
    f, w = _labels(args)
    spec = _spec(args)
    if args.r is not None:
        f = dilate(f, args.r)
    if args.kind == "bphi":
        if w is None:
            raise UsageError("--kind bphi needs --weight")
        est = bphi_norm(f, w, spec)
    elif args.kind == "bmoa":
        est = bmoa_garsia_norm(f, spec)
    else:
        est = bmo_arc_norm(f, spec.n_theta, spec=spec)
    return {"value": est.value, "witness": _witness(est.witness), "spec": spec.to_dict(),
            "kind": est.kind, "meta": est.meta}


def cmd_g(args):
    _need(args, "weight", "x")
    _, w = _labels(args)
    return {"value": w.g(args.x), "weight": w.label}


def cmd_dist(args):
    _need(args, "fn", "r")
    f, _ = _labels(args)
    n = args.ntheta or 256
    lambdas = None if args.lambda_max is None else np.linspace(0.0, args.lambda_max, 2000)
    sample = distribution_function(f, args.r, lambdas=lambdas, n_theta=n)
    moments = {str(p): layer_cake_moment(sample, p) for p in (1, 2, 4)}
    out = {"max_modulus": sample.max_modulus, "n_theta": n, "moments": moments}
    if args.out:
        sample.to_csv(args.out)
        out["csv"] = args.out
    else:
        out["lambda"], out["E"] = sample.lambdas.tolist(), sample.E.tolist()
    return out


def cmd_expint(args):
    _need(args, "fn", "weight", "r", "gamma")
    f, w = _labels(args)
    spec = _spec(args)
    norm = bphi_norm(f, w, spec).value
    val = exp_integral(f, w, args.r, args.gamma, n_theta=spec.n_theta, norm=norm, spec=spec)
    return {"value": val, "overflow": val == float("inf"), "bphi_norm": norm, "spec": spec.to_dict()}


def cmd_growth(args):
    _need(args, "fn", "weight", "r")
    f, w = _labels(args)
    n = args.rays or 32
    offset = 0.0 if args.seed is None else float(np.random.default_rng(args.seed).random())
    rays = np.exp(2j * np.pi * (np.arange(n) + offset) / n)
    ratios = np.atleast_1d(growth_ratio(f, w, rays, args.r))
    k = int(np.argmax(ratios))
    return {"value": float(ratios[k]), "witness": _witness(complex(rays[k])), "ratios": ratios.tolist()}


def cmd_verify(args):
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad config: {exc}") from None
    for label in cfg.corpus:
        try:
            parse_function(label)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for label in cfg.weights:
        try:
            parse_weight(label)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cfg.spec = _spec(args, cfg.spec)
    if args.rays is not None:
        cfg.rays = args.rays
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.format = args.format
    if args.out is not None:
        cfg.out_dir = args.out
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    theorems = THEOREM_CHOICES[:-1] if args.theorem == "all" else (args.theorem,)
    t0 = time.perf_counter()
    records, extras = run_verification(cfg, theorems, workers=args.workers)
    path = emit_report(records, cfg.out_dir, cfg.format, extras=extras)
    print(f"verify: {len(records)} records in {time.perf_counter() - t0:.1f}s -> {path}", file=sys.stderr)
    failed = [r for r in records if not r.passed]
    for r in failed[:20]:
        print(f"FAIL {r.theorem} {r.fn} {r.weight} r={r.r!r} ratio={r.ratio!r} {r.error or ''}", file=sys.stderr)
    out = {"report": str(path), "records": len(records), "failed": len(failed), "summary": summarize(records),
           "config": cfg.to_dict()}
    return out, (EXIT_VERIFY if failed else EXIT_OK)


def cmd_corpus(args):
    return {"functions": CORPUS_NOTES, "weights": ["power:<alpha>", "table:<csv with t,phi>"],
            "other_labels": ["mono:<n>", "const:<c>", "scale:<c>:<label>", "series:<csv index,re,im>",
                             "lacunary:<depth>"]}


COMMANDS = {"norm": cmd_norm, "g": cmd_g, "dist": cmd_dist, "expint": cmd_expint,
            "growth": cmd_growth, "verify": cmd_verify, "corpus": cmd_corpus}


def _emit(obj) -> None:
    json.dump(_jsonable(obj), sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    echo = {k: v for k, v in vars(args).items() if v is not None}
    try:
        result = COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"bphi-lab {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, OSError) as exc:
        print(f"bphi-lab {args.verb}: {type(exc).__name__}: {exc}", file=sys.stderr)
        _emit({"command": args.verb, "args": echo, "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_COMPUTE
    code = EXIT_OK
    if isinstance(result, tuple):
        result, code = result
    _emit({"command": args.verb, "args": echo, **result})
    return code


if __name__ == "__main__":
    sys.exit(main())
