"""Command-line front end.

Three subcommands:

``compute``
    Evaluate one functional of a grid function stored as JSON
    (``{"dimension": n, "depth": L, "values": [...]}``).
``verify``
    Run a seeded verification suite and write its deterministic report.
``maximal``
    Print the dyadic fractional maximal function of an input grid.

Every command emits JSON (sorted keys) and exits 0 exactly when all of its
assertions hold.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .grid import GridFunction, tree_size
from .maximal import fractional_maximal
from .norms import (NormParams, garo_norm, packing_sup_norm, ri_functionals,
                    sparse_norm_bounds, sparse_sup_exhaustive)
from .suites import SUITE_NAMES, SuiteConfig, run_suite

_NORM_KEYS = ("jn", "sjn", "v", "sv", "svt", "garo", "bmo", "weaklp", "llogl")


def _parse_p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    p = float(text)
    if p < 1.0:
        raise argparse.ArgumentTypeError(f"p must be >= 1 or inf, got {text}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscnorm",
        description="Oscillation norms of piecewise-constant functions "
                    "on the dyadic unit cube.")
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="evaluate one functional")
    comp.add_argument("--input", required=True, help="grid-function JSON file")
    comp.add_argument("--norm", required=True, choices=_NORM_KEYS)
    comp.add_argument("--p", type=_parse_p, default=2.0)
    comp.add_argument("--k", type=int, default=1)
    comp.add_argument("--q", type=int, default=1, choices=(1, 2))
    comp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    comp.add_argument("--mode", choices=("exact", "bounds"), default="exact")
    comp.add_argument("--out", help="write JSON here instead of stdout")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("--suite", required=True, choices=SUITE_NAMES)
    ver.add_argument("--dim", type=int, default=1, choices=(1, 2))
    ver.add_argument("--depth", type=int, default=2)
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", help="report file (default: stdout)")

    mx = sub.add_parser("maximal", help="dyadic fractional maximal function")
    mx.add_argument("--input", required=True)
    mx.add_argument("--q", type=int, default=1, choices=(1, 2))
    mx.add_argument("--lambda", dest="lam", type=float, default=0.0)
    mx.add_argument("--out", help="write JSON here instead of stdout")
    return parser


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _compute_params(args: argparse.Namespace) -> NormParams:
    key = args.norm
    if key == "jn":
        return NormParams.packing(args.p, args.k, args.q, args.lam)
    if key == "bmo":
        return NormParams.bmo()
    if key == "v":
        return NormParams.packing(args.p, args.k, args.q, args.lam)
    if key == "sjn":
        return NormParams.sjn(args.p) if (args.k, args.q, args.lam) == (1, 1, 0.0) \
            else NormParams.sv(args.p, args.k, args.q, args.lam)
    if key == "sv":
        return NormParams.sv(args.p, args.k, args.q, args.lam)
    if key == "svt":
        return NormParams.sv_fractional(args.p, args.k, args.q, args.lam,
                                        dimension=1)
    raise ValueError(key)


def _run_compute(args: argparse.Namespace) -> int:
    f = GridFunction.from_file(args.input)
    payload: dict = {"schema": 1, "norm": args.norm, "input": args.input}
    if args.norm in ("jn", "v", "bmo"):
        rep = packing_sup_norm(f, _compute_params(args))
        payload.update(rep.to_json_dict())
    elif args.norm in ("sjn", "sv", "svt"):
        params = _compute_params(args)
        if args.norm == "svt":
            params = NormParams.sv_fractional(args.p, args.k, args.q,
                                              args.lam, f.dimension)
        if args.mode == "exact":
            if tree_size(f.depth, f.dimension) > 15:
                print("error: exact sparse evaluation needs <= 15 tree "
                      "nodes; rerun with --mode bounds", file=sys.stderr)
                return 2
            rep = sparse_sup_exhaustive(f, params)
        else:
            rep = sparse_norm_bounds(f, params)
        payload.update(rep.to_json_dict())
    elif args.norm == "garo":
        rep = garo_norm(f, args.p)
        if args.mode == "exact" and not rep.exact:
            print("error: exact evaluation needs <= 15 tree nodes; "
                  "rerun with --mode bounds", file=sys.stderr)
            return 2
        payload.update(rep.to_json_dict())
    else:  # weaklp / llogl
        if args.norm == "weaklp" and args.p <= 1.0:
            print("error: weak-L^p needs p > 1", file=sys.stderr)
            return 2
        ri = ri_functionals(f, args.p if args.norm == "weaklp" else 2.0)
        value = ri.weak_lp if args.norm == "weaklp" else ri.llogl
        payload.update({"value_lower": value, "value_upper": value,
                        "exact": True, "p": args.p})
    _emit(payload, args.out)
    return 0


def _run_verify(args: argparse.Namespace) -> int:
    config = SuiteConfig(suite=args.suite, dimension=args.dim,
                         depth=args.depth, trials=args.trials, seed=args.seed)
    report = run_suite(config)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    else:
        sys.stdout.write(report.to_json())
    for a in report.assertions:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {args.suite}: {a['name']} -- {a['detail']}",
              file=sys.stderr)
    return 0 if report.passed else 1


def _run_maximal(args: argparse.Namespace) -> int:
    f = GridFunction.from_file(args.input)
    res = fractional_maximal(f, args.q, args.lam)
    payload = {
        "schema": 1,
        "input": args.input,
        "q": args.q,
        "lambda": args.lam,
        "dimension": f.dimension,
        "depth": f.depth,
        "values": [float(v) for v in res.values.values],
    }
    _emit(payload, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            return _run_compute(args)
        if args.command == "verify":
            return _run_verify(args)
        return _run_maximal(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
