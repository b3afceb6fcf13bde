"""Command line front end.

Exit codes: 0 pass/success, 1 counterexample or refutation, 2 usage or
parse error, 3 search bound or depth exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .basis import Exhaustive, RandomUniverse, SearchExhausted, check_axioms, classify
from .expr import ParseError, parse_expr
from .instances import BUILTIN_BASES, LoadError, builtin_basis, load_finite_basis
from .matrices import MatrixError, builtin_real_matrix, validate_matrix
from .nucleus import (
    CarrierTooLarge,
    check_nucleus_laws,
    points_theorem_check,
    waybelow_recovery_report,
)
from .realcalc import DepthExhausted, evaluate

PASS, FAIL, USAGE, EXHAUSTED = 0, 1, 2, 3


def _rat(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("bad rational %r" % text)


def _load_basis(ref):
    if ref in BUILTIN_BASES:
        return builtin_basis(ref)
    with open(ref) as handle:
        return load_finite_basis(json.load(handle))


def _report_exit(report):
    print(report.summary())
    if report.refuted:
        return FAIL
    if report.exhausted:
        return EXHAUSTED
    return PASS


def _cmd_eval(args):
    try:
        expr = parse_expr(args.expr)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return USAGE
    if args.eps <= 0:
        print("eps must be positive", file=sys.stderr)
        return USAGE
    try:
        result = evaluate(expr, args.at, args.eps, max_depth=args.max_depth)
    except DepthExhausted as exc:
        print("depth exhausted: %s" % exc, file=sys.stderr)
        return EXHAUSTED
    if args.json:
        print(
            json.dumps(
                {
                    "expr": args.expr,
                    "at": str(args.at),
                    "eps": str(args.eps),
                    "lower": str(result.lower),
                    "upper": str(result.upper),
                    "depth": args.max_depth,
                }
            )
        )
    else:
        print(result)
    return PASS


def _universe(args, basis):
    if getattr(args, "exhaustive", False):
        return Exhaustive()
    if basis.is_finite and not getattr(args, "samples", None):
        return Exhaustive()
    return RandomUniverse(getattr(args, "samples", None) or 1000, getattr(args, "seed", 0))


def _cmd_check_basis(args):
    try:
        basis = _load_basis(args.basis)
    except (LoadError, OSError) as exc:
        print("cannot load basis: %s" % exc, file=sys.stderr)
        return USAGE
    report = check_axioms(basis, _universe(args, basis))
    cls = classify(basis, None if basis.is_finite else RandomUniverse(200, args.seed))
    print("compact=%s filter=%s" % (cls.compact, cls.filter))
    return _report_exit(report)


def _cmd_check_nucleus(args):
    try:
        basis = _load_basis(args.basis)
    except (LoadError, OSError) as exc:
        print("cannot load basis: %s" % exc, file=sys.stderr)
        return USAGE
    if not basis.is_finite:
        print("nucleus checking needs a finite carrier", file=sys.stderr)
        return USAGE
    size = len(basis.algebra.carrier)
    if size > args.max_card and not args.sampled:
        print(
            "carrier has %d codes (max-card %d): using %d sampled predicate pairs"
            % (size, args.max_card, 500)
        )
        universe = RandomUniverse(500, args.seed)
    elif args.sampled:
        universe = RandomUniverse(args.sampled, args.seed)
    else:
        universe = Exhaustive()
    try:
        report = check_nucleus_laws(basis, universe)
    except CarrierTooLarge as exc:
        print(str(exc), file=sys.stderr)
        return USAGE
    return _report_exit(report)


def _cmd_check_points(args):
    try:
        basis = _load_basis(args.basis)
    except (LoadError, OSError) as exc:
        print("cannot load basis: %s" % exc, file=sys.stderr)
        return USAGE
    if not basis.is_finite:
        print("the points theorem check needs a finite carrier", file=sys.stderr)
        return USAGE
    try:
        report = points_theorem_check(basis)
        recovery = waybelow_recovery_report(basis)
    except CarrierTooLarge as exc:
        print(str(exc), file=sys.stderr)
        return USAGE
    code = _report_exit(report)
    code2 = _report_exit(recovery)
    return max(code, code2)


def _load_matrix(path):
    with open(path) as handle:
        doc = json.load(handle)
    if "builtin" in doc:
        params = [Fraction(p) for p in doc.get("params", [])]
        return builtin_real_matrix(doc["builtin"], *params)
    from .matrices import Matrix

    source = _load_basis_ref(doc["source"])
    target = _load_basis_ref(doc["target"])
    pairs = {(row[0], row[1]) for row in doc["pairs"]}
    return Matrix(source, target, lambda n, m: (n, m) in pairs, name=doc.get("name", "loaded"))


def _load_basis_ref(ref):
    if isinstance(ref, str):
        return _load_basis(ref)
    return load_finite_basis(ref)


def _cmd_validate_matrix(args):
    try:
        mat = _load_matrix(args.path)
    except (LoadError, MatrixError, OSError, KeyError, ValueError) as exc:
        print("cannot load matrix: %s" % exc, file=sys.stderr)
        return USAGE
    universe = (
        Exhaustive()
        if (mat.source.is_finite and mat.target.is_finite and not args.samples)
        else RandomUniverse(args.samples or 400, args.seed)
    )
    return _report_exit(validate_matrix(mat, universe))


def build_parser():
    parser = argparse.ArgumentParser(prog="asd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an expression to requested precision")
    p.add_argument("expr")
    p.add_argument("--at", type=_rat, required=True)
    p.add_argument("--eps", type=_rat, required=True)
    p.add_argument("--max-depth", type=int, default=60)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("check-basis", help="verify the way-below axioms")
    p.add_argument("basis")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check_basis)

    p = sub.add_parser("check-nucleus", help="verify the closure operator laws")
    p.add_argument("basis")
    p.add_argument("--max-card", type=int, default=4)
    p.add_argument("--sampled", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check_nucleus)

    p = sub.add_parser("check-points", help="verify points = rounded lattice homomorphisms")
    p.add_argument("basis")
    p.set_defaults(func=_cmd_check_points)

    p = sub.add_parser("validate-matrix", help="verify the abstract matrix rules")
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate_matrix)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SearchExhausted as exc:
        print("search exhausted: %s" % exc, file=sys.stderr)
        return EXHAUSTED


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
