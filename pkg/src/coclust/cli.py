"""Command-line front end: matrix files in, JSON (or CSV/DIMACS) out.

Exit codes: 0 feasible, 1 infeasible, 2 error or exhausted budget.  Block
indices in JSON output are 1-based.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .consecutive import (
    DEFAULT_MAX_CUTSETS,
    ConsecutiveStats,
    cutset_to_coclustering,
    optimize_consecutive,
    solve_consecutive,
)
from .core import (
    BudgetExhausted,
    CoclustError,
    CoClustering,
    Instance,
    InstanceTooLarge,
    IntMatrix,
    RealInstance,
    format_matrix,
    parse_matrix,
    read_matrix,
    rescale,
)
from .engine import BUDGET_ENV, STRATEGIES, EngineConfig, decide, optimize, scale_to_integers
from .generators import (
    discretization_matrix,
    from_3coloring,
    from_box_cover,
    from_optimal_discretization,
    parse_colored_points,
    parse_edge_list,
    parse_points,
    random_instance,
)
from .sat import ClusterBoundary, build_boundary_cnf, build_full_cnf, export_dimacs

SCHEMA = "v1"
EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_ERROR = 0, 1, 2


class UsageError(CoclustError):
    pass


# --- helpers -----------------------------------------------------------------


def _number(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _plain(value):
    """Fractions as int when integral, else float; JSON has no exact rationals."""
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    return value


def _blocks(partition) -> list[list[int]]:
    return [[i + 1 for i in block] for block in partition.blocks]


def _exact_cost(rows, cc: CoClustering) -> Fraction:
    return max(
        max(rows[i][j] for i in rb for j in cb) - min(rows[i][j] for i in rb for j in cb)
        for rb in cc.rows.blocks
        for cb in cc.cols.blocks
    )


def _integral(rows) -> bool:
    return all(v.denominator == 1 for row in rows for v in row)


def _emit(payload: dict, out=None) -> None:
    payload = {"schema": SCHEMA, **payload}
    text = json.dumps(payload, indent=2, default=_plain)
    print(text, file=out or sys.stdout)


def _config(args) -> EngineConfig:
    return EngineConfig.from_env(jobs=args.jobs)


def _max_cutsets(config: EngineConfig) -> int:
    # the env budget caps every enumeration, cut sets included
    return config.max_boundaries if os.environ.get(BUDGET_ENV) else DEFAULT_MAX_CUTSETS


def _check_shape(rows, k: int, l: int) -> None:
    m, n = len(rows), len(rows[0])
    if not 1 <= k <= m:
        raise UsageError(f"--k {k} must be between 1 and the row count {m}")
    if not 1 <= l <= n:
        raise UsageError(f"--l {l} must be between 1 and the column count {n}")


# --- commands ----------------------------------------------------------------


def cmd_decide(args) -> int:
    rows = read_matrix(args.matrix)
    _check_shape(rows, args.k, args.l)
    config = _config(args)
    if _integral(rows) and args.c.denominator == 1:
        inst = Instance(IntMatrix(rows), args.k, args.l, int(args.c))
        rescaled = False
    else:
        inst, _ = rescale(RealInstance(rows, args.k, args.l, args.c))
        rescaled = True

    if args.consecutive:
        stats = ConsecutiveStats()
        cuts = solve_consecutive(
            inst.matrix, inst.k, inst.l, inst.c, max_cutsets=_max_cutsets(config), stats=stats
        )
        cc = None if cuts is None else cutset_to_coclustering(cuts, inst.matrix.m, inst.matrix.n)
        route, trace_stats, transposed = "consecutive", dict(vars(stats)), False
        if cuts is not None:
            trace_stats["cuts"] = cuts.one_based()
    else:
        cc, trace = decide(inst, args.strategy, config)
        route, trace_stats, transposed = trace.route, trace.to_dict()["stats"], trace.transposed
        if trace.fallbacks:
            trace_stats["fallbacks"] = trace.fallbacks

    payload = {
        "feasible": cc is not None,
        "row_blocks": None if cc is None else _blocks(cc.rows),
        "col_blocks": None if cc is None else _blocks(cc.cols),
        "cost": None if cc is None else _exact_cost(rows, cc),
        "route": route,
        "stats": {"transposed": transposed, "rescaled": rescaled, **trace_stats},
    }
    _emit(payload)
    return EXIT_FEASIBLE if cc is not None else EXIT_INFEASIBLE


def cmd_optimize(args) -> int:
    rows = read_matrix(args.matrix)
    _check_shape(rows, args.k, args.l)
    config = _config(args)
    matrix, factor = scale_to_integers(rows)

    if args.consecutive:
        best, cuts = optimize_consecutive(matrix, args.k, args.l, max_cutsets=_max_cutsets(config))
        cc = cutset_to_coclustering(cuts, matrix.m, matrix.n)
        payload = {
            "feasible": True,
            "row_blocks": _blocks(cc.rows),
            "col_blocks": _blocks(cc.cols),
            "cost": Fraction(best, factor),
            "route": "consecutive",
            "stats": {"scale": factor, "cuts": cuts.one_based()},
        }
    else:
        res = optimize(matrix, args.k, args.l, config, strategy=args.strategy)
        b = res.bounds.to_dict()
        payload = {
            "feasible": True,
            "row_blocks": _blocks(res.coclustering.rows),
            "col_blocks": _blocks(res.coclustering.cols),
            "cost": Fraction(res.cost, factor),
            "route": "optimize",
            "bounds": {key: (Fraction(v, factor) if key != "tight" else v) for key, v in b.items()},
            "stats": {
                "scale": factor,
                "decisions": [{"c": Fraction(c, factor), **t.to_dict()} for c, t in res.traces],
            },
        }
    _emit(payload)
    return EXIT_FEASIBLE


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "3coloring":
        graph = parse_edge_list(Path(args.edges).read_text(encoding="utf-8"), args.vertices)
        inst = from_3coloring(graph)
    elif kind == "boxcover":
        points = parse_points(Path(args.points).read_text(encoding="utf-8"))
        inst = from_box_cover(points, args.l)
    elif kind == "discretization":
        points = parse_colored_points(Path(args.points).read_text(encoding="utf-8"))
        inst = from_optimal_discretization(points, args.k, args.l, args.layout)
        _, xs, ys = discretization_matrix(points, args.layout)
    else:
        matrix = random_instance(args.m, args.n, args.sigma, args.seed)
        inst = None

    matrix = inst.matrix if inst is not None else matrix
    _write(format_matrix(matrix), args.out)
    if args.out is not None:
        summary = {"out": args.out, "shape": list(matrix.shape)}
        if inst is not None:
            summary.update(k=inst.k, l=inst.l, c=inst.c)
        if kind == "discretization":
            summary.update(xs=xs, ys=ys)
        _emit(summary)
    return EXIT_FEASIBLE


def _parse_boundary(spec: str) -> ClusterBoundary:
    path = Path(spec)
    text = path.read_text(encoding="utf-8") if path.is_file() else spec
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"boundary spec is not valid JSON: {exc}") from None
    else:
        values = parse_matrix(text.replace("/", "\n"))
    try:
        return ClusterBoundary(tuple(tuple(int(v) for v in row) for row in values))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad boundary spec: {exc}") from None


def cmd_export_cnf(args) -> int:
    rows = read_matrix(args.matrix)
    _check_shape(rows, args.k, args.l)
    if not _integral(rows) or args.c.denominator != 1:
        inst, _ = rescale(RealInstance(rows, args.k, args.l, args.c))
    else:
        inst = Instance(IntMatrix(rows), args.k, args.l, int(args.c))
    if args.encoding == "full":
        if args.boundary_spec is not None:
            raise UsageError("--boundary-spec only applies to --encoding boundary")
        cnf, vm = build_full_cnf(inst)
    else:
        if args.boundary_spec is None:
            raise UsageError("--encoding boundary needs --boundary-spec")
        boundary = _parse_boundary(args.boundary_spec)
        if (boundary.k, boundary.l) != (inst.k, inst.l):
            raise UsageError(f"boundary is {boundary.k}x{boundary.l}, expected {inst.k}x{inst.l}")
        cnf, vm = build_boundary_cnf(inst, boundary)
    _write(export_dimacs(cnf, vm), args.out)
    return EXIT_FEASIBLE


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coclust", description="Exact L-infinity co-clustering.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_args(p, with_cost: bool):
        p.add_argument("matrix", help="CSV/TSV/whitespace matrix file")
        p.add_argument("--k", type=_positive, required=True, help="row blocks")
        p.add_argument("--l", type=_positive, required=True, help="column blocks")
        if with_cost:
            p.add_argument("--c", type=_number, required=True, help="cost budget")
        p.add_argument("--strategy", choices=STRATEGIES, default="auto")
        p.add_argument("--consecutive", action="store_true", help="blocks must be contiguous ranges")
        p.add_argument("--jobs", type=_positive, default=1, help="worker processes for boundary search")

    p = sub.add_parser("decide", help="is there a co-clustering of cost at most c?")
    solver_args(p, True)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("optimize", help="minimum cost, a witness and bounds")
    solver_args(p, False)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("generate", help="write a generated matrix as CSV")
    p.add_argument("kind", choices=("3coloring", "boxcover", "discretization", "random"))
    p.add_argument("--edges", help="edge list, one 'u v' pair per line, vertices from 1")
    p.add_argument("--vertices", type=_positive, help="vertex count (default: largest id)")
    p.add_argument("--points", help="point list, 'x y' or 'x y b|w' per line")
    p.add_argument("--k", type=int, help="horizontal lines (discretization)")
    p.add_argument("--l", type=int, help="squares (boxcover) or vertical lines (discretization)")
    p.add_argument("--layout", choices=("distinct", "grid"), default="distinct")
    p.add_argument("--m", type=_positive)
    p.add_argument("--n", type=_positive)
    p.add_argument("--sigma", type=_positive, help="alphabet size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-cnf", help="write a DIMACS CNF encoding")
    p.add_argument("matrix")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--l", type=_positive, required=True)
    p.add_argument("--c", type=_number, required=True)
    p.add_argument("--encoding", choices=("full", "boundary"), default="full")
    p.add_argument("--boundary-spec", help="JSON like [[2,1],[0,3]], rows split by '/', or a file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export_cnf)
    return parser


_REQUIRED = {
    "3coloring": ("edges",),
    "boxcover": ("points", "l"),
    "discretization": ("points", "k", "l"),
    "random": ("m", "n", "sigma"),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.command == "generate":
        missing = [f"--{name}" for name in _REQUIRED[args.kind] if getattr(args, name) is None]
        if missing:
            print(f"coclust: error: {args.kind} needs {', '.join(missing)}", file=sys.stderr)
            return EXIT_ERROR
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"coclust: budget exhausted: {exc} (raise ${BUDGET_ENV} to allow more)", file=sys.stderr)
        _emit({"error": "budget-exhausted", "message": str(exc)})
        return EXIT_ERROR
    except InstanceTooLarge as exc:
        print(f"coclust: error: {exc}", file=sys.stderr)
        _emit({"error": "instance-too-large", "message": str(exc)})
        return EXIT_ERROR
    except (CoclustError, ValueError, ArithmeticError, OSError) as exc:
        print(f"coclust: error: {exc}", file=sys.stderr)
        _emit({"error": "invalid-input", "message": str(exc)})
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
