"""``poscone`` command line.

Exit status: 0 on success, 1 when a mathematical check fails (closure,
convergence, verification), 2 on usage or input errors. Elements and
subspaces are read from JSON files (``-`` for standard input).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional, Sequence

from .algebra import AlgebraMismatchError, NotPositiveError, element_from_dict, element_to_dict
from .convexity import (
    ClosureError,
    ConvexSubmanifold,
    Subspace,
    check_double_bracket,
    parse_subspace_spec,
)
from .geometry import SingularElementError, dist, geodesic
from .projection import ConditioningError, ConvergenceError, factor_iwasawa, factor_masa, factor_symmetric, project
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

TOL_ENV = "POSCONE_DEFAULT_TOL"


class InputError(Exception):
    """Bad input file or argument; maps to exit status 2."""


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _load_element(path: str, kind: str):
    data = _load_json(path)
    try:
        return element_from_dict(data, kind)
    except NotPositiveError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed element ({exc})") from exc


def dumps(obj) -> str:
    """Canonical JSON text used for every output document."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


def _emit(obj, out: Optional[str] = None) -> None:
    text = dumps(obj) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _submanifold(algebra, spec: str) -> ConvexSubmanifold:
    """Shortcut (``diagonal``, ``full``, ``blocks=...``) or a subspace JSON file.

    Raises :class:`ClosureError` when a file subspace fails the closure check.
    """
    if spec in ("diagonal", "full") or spec.startswith("blocks="):
        try:
            return parse_subspace_spec(algebra, spec)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    H = _load_subspace(spec)
    if H.algebra != algebra:
        raise InputError("subspace and element live in different algebras")
    return ConvexSubmanifold.certify(H)


def _load_subspace(path: str) -> Subspace:
    data = _load_json(path)
    try:
        return Subspace.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed subspace ({exc})") from exc


def _closure_failure(exc: ClosureError) -> int:
    _emit({"schema": 1, "closed": False, "witness": exc.witness.to_dict()})
    return EXIT_FAIL


def cmd_dist(args) -> int:
    a = _load_element(args.a, "positive")
    b = _load_element(args.b, "positive")
    print("%.17g" % dist(a, b))
    return EXIT_OK


def cmd_geodesic(args) -> int:
    a = _load_element(args.a, "positive")
    b = _load_element(args.b, "positive")
    _emit({"schema": 1, "t": args.t, "point": element_to_dict(geodesic(a, b)(args.t))})
    return EXIT_OK


def cmd_project(args) -> int:
    r = _load_element(args.r, "positive")
    try:
        M = _submanifold(r.algebra, args.subspace)
    except ClosureError as exc:
        return _closure_failure(exc)
    res = project(M, r, max_iter=args.max_iter, strict=False)
    _emit({"schema": 1, **res.to_dict()})
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_factor(args) -> int:
    kind = "general" if args.mode == "iwasawa" else "hermitian"
    x = _load_element(args.input, kind)
    if args.mode == "masa":
        d, v, f = factor_masa(x.algebra, x, max_iter=args.max_iter)
        doc = {"d": element_to_dict(d), "v": element_to_dict(v),
               "residuals": {"reconstruction": f.residual, "orthogonality": f.orthogonality},
               "iterations": f.iterations}
    else:
        if args.subspace is None:
            raise InputError(f"--subspace is required for mode {args.mode}")
        try:
            M = _submanifold(x.algebra, args.subspace)
        except ClosureError as exc:
            return _closure_failure(exc)
        if args.mode == "symmetric":
            doc = factor_symmetric(M, x, max_iter=args.max_iter).to_dict()
        else:
            doc = factor_iwasawa(M, x, max_iter=args.max_iter).to_dict()
    _emit({"schema": 1, "mode": args.mode, **doc})
    return EXIT_OK


def cmd_closure(args) -> int:
    H = _load_subspace(args.subspace)
    w = check_double_bracket(H)
    if w is None:
        _emit({"schema": 1, "closed": True, "dimension": H.dimension})
        return EXIT_OK
    _emit({"schema": 1, "closed": False, "dimension": H.dimension, "witness": w.to_dict()})
    return EXIT_FAIL


def _parse_dims(text: str) -> list:
    try:
        dims = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --dims {text!r}") from exc
    if not dims or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("--dims needs integers >= 2")
    return dims


def _nonnegative_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def _finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if v != v or v in (float("inf"), float("-inf")):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def default_tol_scale() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw.strip() == "":
        return 1.0
    try:
        return _positive_float(raw)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"{TOL_ENV}: {exc}") from exc


def cmd_verify(args) -> int:
    scale = args.tol if args.tol is not None else default_tol_scale()
    start = time.perf_counter()
    report = run_suite(args.suite, args.dims, args.trials, args.seed, scale)
    wall = time.perf_counter() - start
    doc = report.to_dict()
    if args.out is not None:
        _emit(doc, args.out)
    else:
        _emit(doc)
    for p in report.properties:
        if not p.passed:
            print(f"FAIL {p.name}: max violation {p.max_violation!r} > {p.tolerance!r} "
                  f"(seed {p.worst_seed})", file=sys.stderr)
    status = "pass" if report.passed else "FAIL"
    print(f"verify {args.suite}: {status}, {len(report.properties)} properties, "
          f"wall time {wall:.2f} s", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poscone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="geodesic distance between two positive elements")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("geodesic", help="point at time t on the geodesic from a to b")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--t", type=_finite_float, required=True)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("project", help="nearest point of an exponential set")
    p.add_argument("r")
    p.add_argument("--subspace", required=True,
                   help="diagonal, full, blocks=1,2|3, or a subspace JSON file")
    p.add_argument("--max-iter", type=_nonnegative_int, default=500)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("factor", help="symmetric, masa or Iwasawa factorization")
    p.add_argument("input")
    p.add_argument("--mode", choices=("symmetric", "masa", "iwasawa"), required=True)
    p.add_argument("--subspace")
    p.add_argument("--max-iter", type=_nonnegative_int, default=500)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("closure", help="double-bracket closure check of a subspace")
    p.add_argument("subspace")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("verify", help="randomized property suite")
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p.add_argument("--dims", type=_parse_dims, default=[2, 3, 5])
    p.add_argument("--trials", type=_nonnegative_int, default=20)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--tol", type=_positive_float, default=None,
                   help=f"tolerance scale factor (default: ${TOL_ENV} or 1)")
    p.add_argument("--out", help="write the JSON report here instead of standard output")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, AlgebraMismatchError, ConditioningError, SingularElementError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
