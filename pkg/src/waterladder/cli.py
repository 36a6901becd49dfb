"""Command-line front end.

Exit codes: 0 success, 2 infeasible, 3 invalid input, 4 internal failure
(including a failed --kkt or --oracle check).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .chart import emit_chart_data
from .errors import (BracketFailure, GridTooLarge, InfeasibleProblem, InternalInvariant,
                     InvalidObjective, InvalidProblem, NoFeasibleGridPoint, UnboundedPin,
                     UnboundedProblem, WaterladderError)
from .io import encode_float, load_problem, solution_to_dict
from .oracle import GridSpec, grid_solve
from .solver import SolverOptions, solve
from .verify import kkt_check

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_INTERNAL = 0, 2, 3, 4


def _diag(**fields) -> None:
    print(json.dumps(fields), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waterladder",
        description="Separable convex minimization under nested prefix-sum and box constraints.")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("solve", help="solve one or more problem files")
    sp.add_argument("--input", nargs="+", required=True, metavar="PATH",
                    help="problem file(s) in the waterladder/1 JSON format")
    sp.add_argument("--output", metavar="PATH",
                    help="solution file (a directory when several inputs are given); default stdout")
    sp.add_argument("--kkt", action="store_true", help="verify the KKT conditions")
    sp.add_argument("--tol", type=float, default=1e-6, help="KKT tolerance (default 1e-6)")
    sp.add_argument("--oracle", action="store_true",
                    help="compare against the brute-force grid oracle (N <= 6)")
    sp.add_argument("--grid", type=int, default=41, metavar="INT",
                    help="oracle points per dimension (default 41)")
    sp.add_argument("--chart", metavar="PATH",
                    help="write chart CSV (a directory when several inputs are given)")
    sp.add_argument("--no-skip-rule", action="store_true",
                    help="solve every prefix equation in each outer iteration")
    sp.add_argument("--final-shortcut", action="store_true",
                    help="settle the last variable directly from its constraint")
    sp.add_argument("--trace", action="store_true", help="log the multiplier blocks to stderr")
    return parser


def _solve_one(path: str, args, opts: SolverOptions) -> tuple[int, Optional[dict]]:
    try:
        p = load_problem(path)
    except FileNotFoundError:
        _diag(level="error", input=path, error="FileNotFound", message=f"no such file: {path}")
        return EXIT_INVALID, None
    except InvalidProblem as exc:
        _diag(level="error", input=path, error=type(exc).__name__, message=str(exc))
        return EXIT_INVALID, None
    try:
        s = solve(p, opts)
    except InfeasibleProblem as exc:
        _diag(level="error", input=path, error="InfeasibleProblem",
              constraint=exc.constraint, message=str(exc))
        return EXIT_INFEASIBLE, None
    except (InvalidProblem, UnboundedPin, UnboundedProblem, InvalidObjective) as exc:
        _diag(level="error", input=path, error=type(exc).__name__, message=str(exc))
        return EXIT_INVALID, None
    except (BracketFailure, InternalInvariant, WaterladderError) as exc:
        _diag(level="error", input=path, error=type(exc).__name__, message=str(exc))
        return EXIT_INTERNAL, None

    code = EXIT_OK
    if args.trace:
        for i, b in enumerate(s.trace, 1):
            _diag(level="info", input=path, event="block", block=i, mu=encode_float(b.mu),
                  k=b.k, varsigma={str(j): encode_float(v) for j, v in b.varsigma.items()})
    report = kkt_check(p, s, args.tol) if args.kkt else None
    out = solution_to_dict(p, s, report)
    if report is not None and not report.passed:
        _diag(level="error", input=path, error="KktCheckFailed", residuals=out["kkt"]["residuals"])
        code = EXIT_INTERNAL

    if args.oracle:
        try:
            g = grid_solve(p, GridSpec(args.grid, anchor=s.x))
        except (GridTooLarge, NoFeasibleGridPoint) as exc:
            _diag(level="error", input=path, error=type(exc).__name__, message=str(exc))
            return EXIT_INTERNAL, out
        f_solver = p.objective(s.x)
        gap = f_solver - g.value
        ok = gap <= g.tolerance
        out["oracle"] = {"x": [encode_float(v) for v in g.x], "value": encode_float(g.value),
                         "solver_value": encode_float(f_solver), "gap": encode_float(gap),
                         "bound": encode_float(g.tolerance), "pass": bool(ok)}
        _diag(level="info" if ok else "error", input=path, event="oracle",
              gap=encode_float(gap), bound=encode_float(g.tolerance), points_per_dim=args.grid)
        if not ok:
            code = EXIT_INTERNAL

    if args.chart:
        target = Path(args.chart)
        if len(args.input) > 1:
            target.mkdir(parents=True, exist_ok=True)
            target = target / (Path(path).stem + ".chart.csv")
        with open(target, "w", newline="") as fh:
            emit_chart_data(p, s, fh)
    return code, out


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    opts = SolverOptions(skip_rule=not args.no_skip_rule, final_shortcut=args.final_shortcut)
    worst = EXIT_OK
    many = len(args.input) > 1
    if many and args.output:
        Path(args.output).mkdir(parents=True, exist_ok=True)
    for path in args.input:
        code, out = _solve_one(path, args, opts)
        worst = max(worst, code)
        if out is None:
            continue
        text = json.dumps(out, indent=2)
        if args.output:
            target = Path(args.output) / (Path(path).stem + ".solution.json") if many \
                else Path(args.output)
            target.write_text(text + "\n")
        elif many:
            print(json.dumps({"input": path, **out}))
        else:
            print(text)
    return worst


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
