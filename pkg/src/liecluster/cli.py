"""Command-line front end.

Exit codes: 0 success; 1 validation or threshold failure; 2 bad arguments or
malformed input; 3 missing coupling tables with ``--no-compute``; 4 numerical
failure in ``demo``; 5 resource limit exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import coupling
from .algebra import COMMUTATOR_TOL, rep_from_json, validate_rep
from .coupling import coupling_to_json
from .errors import ConfigurationError, InvalidArgumentError, ResourceLimitError
from .irreps import irrep, parse_short_label
from .tables import MissingTableError, TableStore, write_text_atomic

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MISSING, EXIT_NUMERIC, EXIT_RESOURCE = 0, 1, 2, 3, 4, 5


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--cache-dir", default=d(None), help="directory for coupling tables (<hash>.json)")
    p.add_argument("--seed", type=int, default=d(None), help="random seed")
    p.add_argument("--tol", type=float, default=d(None), help="tolerance override")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liecluster", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cg", help="Clebsch-Gordan table for label1 (x) label2 -> label_out")
    p.add_argument("group")
    p.add_argument("label1")
    p.add_argument("label2")
    p.add_argument("label_out")
    p.add_argument("-o", "--out", help="output file (default: table on stdout)")

    p = sub.add_parser("check", help="validate a representation JSON file")
    p.add_argument("rep_path")

    p = sub.add_parser("couple", help="symmetric coupling table Sym^order(label) -> label_out")
    p.add_argument("group")
    p.add_argument("label")
    p.add_argument("order", type=int)
    p.add_argument("label_out")
    p.add_argument("-o", "--out", help="output file (default: table on stdout)")
    p.add_argument("--method", choices=("auto", "tree", "direct"), default="auto")

    p = sub.add_parser("features", help="equivariant features of a point cloud")
    p.add_argument("config_path")
    p.add_argument("cloud_path")
    p.add_argument("-o", "--out", help="output file (default: stdout)")
    p.add_argument("--no-compute", action="store_true", help="fail instead of solving missing tables")
    p.add_argument("--compare", help="features file to diff against; prints the max abs difference")

    p = sub.add_parser("demo", help="seeded fitting demonstration")
    p.add_argument("task", choices=("o3-invariant", "lorentz-mass"))
    p.add_argument("--elements", type=int, default=20, help="group elements in the residual check")

    for name, sp in sub.choices.items():
        _global_flags(sp, suppress=True)
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def _info(msg: str, to_stderr: bool):
    print(msg, file=sys.stderr if to_stderr else sys.stdout)


def _store(args, allow_compute: bool = True, tables=()) -> TableStore:
    tol = coupling.NULL_TOL if args.tol is None else args.tol
    return TableStore(args.cache_dir, tables, allow_compute, tol=tol)


def cmd_cg(args) -> int:
    labels = [parse_short_label(args.group, s) for s in (args.label1, args.label2, args.label_out)]
    reps = [irrep(l) for l in labels]
    ct = _store(args).pairwise(*reps)
    quiet = args.out is None
    _info(f"multiplicity: {ct.multiplicity}", quiet)
    if ct.multiplicity == 0:
        _info(f"warning: {labels[2]} does not occur in {labels[0]} (x) {labels[1]}", quiet)
    _emit(coupling_to_json(ct), args.out)
    return EXIT_OK


def cmd_couple(args) -> int:
    if args.order < 1:
        raise InvalidArgumentError("order must be >= 1")
    lab, lab_out = parse_short_label(args.group, args.label), parse_short_label(args.group, args.label_out)
    rep, rep_out = irrep(lab), irrep(lab_out)
    ct = _store(args).symmetric(rep, args.order, rep_out, method=args.method)
    quiet = args.out is None
    _info(f"multiplicity: {ct.multiplicity}", quiet)
    if ct.multiplicity == 0:
        _info(f"warning: {lab_out} does not occur in Sym^{args.order}({lab})", quiet)
    _emit(coupling_to_json(ct), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        with open(args.rep_path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidArgumentError(str(exc)) from exc
    rep = rep_from_json(text)
    report = validate_rep(rep, COMMUTATOR_TOL if args.tol is None else args.tol)
    print(f"dimension: {rep.dim}")
    print(f"generators: {rep.algebra.num_generators} continuous, {rep.num_discrete} discrete")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


def _max_diff(a, b) -> float:
    """Largest absolute difference between two feature documents of equal layout."""
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a) != set(b):
            raise InvalidArgumentError("feature files have different layouts")
        return max([_max_diff(a[k], b[k]) for k in a] or [0.0])
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            raise InvalidArgumentError("feature files have different layouts")
        return max([_max_diff(x, y) for x, y in zip(a, b)] or [0.0])
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        return abs(float(a) - float(b))
    if a != b:
        raise InvalidArgumentError("feature files have different layouts")
    return 0.0


def cmd_features(args) -> int:
    from .cluster.io import FeatureModel, features_to_json, load_cloud

    try:
        with open(args.config_path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidArgumentError(f"cannot read config {args.config_path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidArgumentError("config must be a JSON object")
    base = os.path.dirname(os.path.abspath(args.config_path))
    tables = [p if os.path.isabs(p) else os.path.join(base, p) for p in cfg.get("coupling_tables", [])]
    try:
        cloud = load_cloud(args.cloud_path)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read point cloud {args.cloud_path}: {exc}") from exc
    store = _store(args, allow_compute=not args.no_compute, tables=tables)
    model = FeatureModel(cfg, store, seed=args.seed)
    text = features_to_json(model.compute(cloud))
    _emit(text, args.out)
    if args.compare:
        with open(args.compare, encoding="utf-8") as fh:
            other = json.load(fh)
        diff = _max_diff(json.loads(text), other)
        _info(f"max abs difference: {diff:.17g}", args.out is None)
    return EXIT_OK


def cmd_demo(args) -> int:
    from .demos import run_demo

    seed = 0 if args.seed is None else args.seed
    try:
        res = run_demo(args.task, seed, n_elements=args.elements, threads=args.threads)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for line in res.lines():
        print(line)
    if not res.finite:
        print("numerical failure: non-finite fit statistics", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK if res.passed else EXIT_FAIL


def _validate_paths(args):
    """Reject unusable paths before any computation starts."""
    for attr in ("rep_path", "config_path", "cloud_path", "compare"):
        path = getattr(args, attr, None)
        if path is not None and not os.path.isfile(path):
            raise InvalidArgumentError(f"no such file: {path}")
    out = getattr(args, "out", None)
    if out is not None:
        parent = os.path.dirname(os.path.abspath(out))
        if not os.path.isdir(parent):
            raise InvalidArgumentError(f"output directory does not exist: {parent}")
        if os.path.isdir(out):
            raise InvalidArgumentError(f"output path is a directory: {out}")
    if args.cache_dir is not None and os.path.exists(args.cache_dir) and not os.path.isdir(args.cache_dir):
        raise InvalidArgumentError(f"cache path is not a directory: {args.cache_dir}")


COMMANDS = {"cg": cmd_cg, "check": cmd_check, "couple": cmd_couple,
            "features": cmd_features, "demo": cmd_demo}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        _validate_paths(args)
        return COMMANDS[args.command](args)
    except MissingTableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidArgumentError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
