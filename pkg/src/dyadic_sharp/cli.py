"""``dyadic-sharp`` command-line driver.

Exit codes: 0 success, 1 validation error, 2 computation error, 3 selftest
failure.  Errors are reported on stderr as ``error: <ErrorName>: message``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from .dyadic import ROOT, DyadicInterval, StepFunction
from .errors import ComputationError, DyadicError, ValidationError
from .haar import HaarShiftSpec, apply_shift, named_spec
from .lerner import LernerDecomposition, decompose, shift_domination, verify_decomposition
from .petermichl import DEFAULT_PADDING, hilbert_compare
from .samples import random_step_function, random_weight
from .selftest import run_selftest, tampered_fixture
from .sweep import DEFAULT_ALPHAS, DEFAULT_DEPTH, lp_lower_probe, run_sweep
from .weighted import ap_constant, power_weight, weighted_operator_norm

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_SELFTEST = 0, 1, 2, 3
MAX_DEPTH = 24

logger = logging.getLogger("dyadic_sharp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: UsageError: {message}", file=sys.stderr)
        sys.exit(EXIT_VALIDATION)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _interval(text: str) -> DyadicInterval:
    try:
        level, index = (int(t) for t in text.split(","))
    except ValueError:
        raise ValidationError(f"interval must be 'level,index', got {text!r}") from None
    return DyadicInterval(level, index)


def _depth(args, default: int) -> int:
    d = default if args.depth is None else args.depth
    if not 0 <= d <= MAX_DEPTH:
        raise ValidationError(f"depth must lie in [0, {MAX_DEPTH}], got {d}")
    return d


def _function(args, depth_default: int) -> StepFunction:
    if args.function:
        return StepFunction.from_json(_read_json(args.function))
    return random_step_function(np.random.default_rng(args.seed), _depth(args, depth_default))


def _weight(args, depth_default: int) -> StepFunction:
    if getattr(args, "weight", None):
        return StepFunction.from_json(_read_json(args.weight), weight=True)
    return power_weight(args.alpha, _depth(args, depth_default))


def _spec(args, depth: int) -> HaarShiftSpec:
    if args.spec:
        return HaarShiftSpec.from_json(_read_json(args.spec))
    return named_spec(args.name, depth)


def _flat_csv(record: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
    w.writerow(flat.keys())
    w.writerow(repr(v) if isinstance(v, float) else v for v in flat.values())
    return buf.getvalue()


def _cells_csv(f: StepFunction) -> str:
    lines = ["cell,value"] + [f"{i},{v!r}" for i, v in enumerate(f.cells.tolist())]
    return "\n".join(lines) + "\n"


def _emit(args, payload, csv_text=None):
    fmt = args.format or "json"
    if fmt == "csv":
        text = csv_text if csv_text is not None else _flat_csv(payload)
    else:
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen_weight(args):
    if args.alpha is not None:
        w = power_weight(args.alpha, _depth(args, 8))
    else:
        w = random_weight(np.random.default_rng(args.seed), _depth(args, 8))
    _emit(args, w.to_json(), _cells_csv(w))


def cmd_a2(args):
    rep = ap_constant(_weight(args, 8), args.p)
    _emit(args, rep.to_json())


def cmd_shift_apply(args):
    f = _function(args, 6)
    g = apply_shift(_spec(args, f.depth), f)
    _emit(args, g.to_json(), _cells_csv(g))


def cmd_norm(args):
    w = _weight(args, 8)
    rep = weighted_operator_norm(_spec(args, w.depth), w, w.depth, method=args.method,
                                 seed=args.seed)
    _emit(args, rep.to_json())


def cmd_lerner_verify(args):
    f = _function(args, 8)
    root = _interval(args.root)
    if args.decomposition:
        dec = LernerDecomposition.from_json(_read_json(args.decomposition), f.depth)
    else:
        dec = decompose(f, root)
    rep = verify_decomposition(f, dec)
    out = rep.to_json()
    out["decomposition"] = dec.to_json()
    _emit(args, out)
    return EXIT_OK if rep.ok else EXIT_COMPUTATION


def cmd_domination(args):
    f = _function(args, 8)
    dom = shift_domination(f, _spec(args, f.depth), _interval(args.root))
    out = {"empirical_constant": dom.empirical_constant, "depth": f.depth,
           "generations": len(dom.decomposition.generations)}
    if args.verbose_parts:
        out.update(dom.to_json())
    _emit(args, out)


def _alphas(text):
    if text is None:
        return list(DEFAULT_ALPHAS)
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"alphas must be comma-separated numbers, got {text!r}") from None


def cmd_sweep(args):
    res = run_sweep(_alphas(args.alphas), _depth(args, DEFAULT_DEPTH), args.seed,
                    method=args.method, lp_p=None if args.lp_p == 0 else args.lp_p,
                    trials=args.trials,
                    cross_check_depth=None if args.no_cross_check else args.cross_check_depth)
    if args.format is None:
        args.format = "csv"
    _emit(args, res.to_json(), res.to_csv(timings=args.timings))
    if args.summary:
        print(json.dumps({k: v for k, v in res.to_json().items() if k != "rows"}),
              file=sys.stderr)


def cmd_lp_probe(args):
    depth = _depth(args, 10)
    ratio = lp_lower_probe(args.alpha, args.p, depth)
    ap = ap_constant(power_weight(args.alpha, depth), args.p).constant
    _emit(args, {"alpha": args.alpha, "p": args.p, "depth": depth, "lower_ratio": ratio,
                 "ap_constant": ap})


def cmd_hilbert_compare(args):
    rep = hilbert_compare(args.a, args.b, args.shifts, args.dilations, _depth(args, 8),
                          args.seed, args.padding)
    _emit(args, rep.to_json())


def cmd_selftest(args):
    fixture = None
    if args.fixture:
        fixture = _read_json(args.fixture)
    elif args.inject_tamper:
        fixture = tampered_fixture()
    summary = run_selftest(args.seed, fixture)
    if args.json or args.format == "json":
        _emit(args, summary)
    else:
        for c in summary["checks"]:
            print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']}  {c['detail']}")
        print(f"{summary['n_checks']} checks, {len(summary['failed'])} failed, "
              f"{summary['runtime_s']} s")
    for name in summary["failed"]:
        print(f"selftest failure: {name}", file=sys.stderr)
    return EXIT_OK if summary["ok"] else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--depth", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)

    p = _Parser(prog="dyadic-sharp", description="Dyadic Haar shifts, weights and decompositions.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def spec_args(sp):
        sp.add_argument("--spec", help="HaarShiftSpec JSON file")
        sp.add_argument("--name", default="hd", help="built-in spec name (default hd)")

    sp = add("gen-weight", cmd_gen_weight, "power weight x^alpha or a random weight")
    sp.add_argument("--alpha", type=float)

    sp = add("a2", cmd_a2, "dyadic A_p constant")
    sp.add_argument("--weight", help="weight JSON file")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--p", type=float, default=2.0)

    sp = add("shift-apply", cmd_shift_apply, "apply a Haar shift to a step function")
    sp.add_argument("--function", help="step function JSON file (default: random)")
    spec_args(sp)

    sp = add("norm", cmd_norm, "weighted L2 operator norm")
    sp.add_argument("--weight", help="weight JSON file")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--method", choices=("dense", "power"), default="power")
    spec_args(sp)

    sp = add("lerner-verify", cmd_lerner_verify, "decompose and verify (or verify a given decomposition)")
    sp.add_argument("--function", help="step function JSON file (default: random)")
    sp.add_argument("--decomposition", help="decomposition JSON to verify instead of building one")
    sp.add_argument("--root", default="0,0", help="level,index of the root cube")

    sp = add("domination", cmd_domination, "least constant in the shift domination bound")
    sp.add_argument("--function", help="step function JSON file (default: random)")
    sp.add_argument("--root", default="0,0")
    sp.add_argument("--verbose-parts", action="store_true", help="include Mf, F and cubes")
    spec_args(sp)

    sp = add("sweep", cmd_sweep, "power-weight sweep (CSV by default)")
    sp.add_argument("--alphas", help="comma-separated alphas")
    sp.add_argument("--method", choices=("power", "dense"), default="power")
    sp.add_argument("--lp-p", type=float, default=2.0, help="probe exponent, 0 to skip")
    sp.add_argument("--trials", type=int, default=64)
    sp.add_argument("--cross-check-depth", type=int, default=8)
    sp.add_argument("--no-cross-check", action="store_true")
    sp.add_argument("--timings", action="store_true", help="fill runtime_ms (output no longer byte-stable)")
    sp.add_argument("--summary", action="store_true", help="slope and checks as JSON on stderr")

    sp = add("lp-probe", cmd_lp_probe, "L^p(w) lower-bound probe for the power weight")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, default=2.0)

    sp = add("hilbert-compare", cmd_hilbert_compare, "grid-averaged H^d against the Hilbert transform")
    sp.add_argument("--a", type=float, default=0.25)
    sp.add_argument("--b", type=float, default=0.75)
    sp.add_argument("--shifts", type=int, default=64)
    sp.add_argument("--dilations", type=int, default=4)
    sp.add_argument("--padding", type=int, default=DEFAULT_PADDING)

    sp = add("selftest", cmd_selftest, "run every invariant suite")
    sp.add_argument("--json", action="store_true", help="machine-readable summary")
    sp.add_argument("--fixture", help="decomposition fixture JSON to verify as an extra suite")
    sp.add_argument("--inject-tamper", action="store_true", help="add the built-in tampered fixture")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code = args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ComputationError, DyadicError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
