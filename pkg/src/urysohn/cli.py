"""Command-line front end: `study` runs a convergence study over a doubling
mesh sequence, `solve` runs a single level and dumps the iterated solution
at the partition points.

Exit codes: 0 success, 2 solver divergence, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, DivergenceError, SingularLinearizationError
from .piecewise import make_mesh
from .problems import get_problem
from .quadrature import gauss_rule
from .solver import SolveOptions, iterated_at_partition, solve_galerkin, solve_paper_discrete
from .study import OUTPUT_FORMATS, StudyConfig, emit_report, render_report, run_study

__all__ = ["build_parser", "main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; that code is reserved for
    # solver divergence here, so usage problems become ConfigError -> 3.
    def error(self, message):
        raise ConfigError(message)


def _n_list(text: str):
    try:
        return [int(piece) for piece in text.split(",") if piece]
    except ValueError as exc:
        raise ConfigError(f"bad mesh list {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="urysohn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", help="built-in problem identifier")
        p.add_argument("--r", type=int, help="polynomial order (degree < r per cell)")
        p.add_argument("--method", choices=("picard", "newton"))
        p.add_argument("--tol", type=float, help="coefficient-update stopping tolerance")
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--quad-points", type=int, dest="quad_points",
                       help="Gauss points per panel in the integral operator")
        p.add_argument("--rhs", choices=("manufactured", "paper"), dest="rhs_mode")
        p.add_argument("--mode", choices=("full", "paper-discrete"), dest="discrete_mode")
        p.add_argument("--format", choices=OUTPUT_FORMATS, dest="output_format")
        p.add_argument("--out", dest="output_path", help="report file (stdout when omitted)")

    study = sub.add_parser("study", help="convergence study over a doubling mesh sequence")
    study.add_argument("--config", help="JSON file with StudyConfig fields; flags override it")
    study.add_argument("--n", type=_n_list, dest="n_sequence",
                       help="comma-separated doubling mesh sizes, e.g. 20,40,80")
    common(study)

    solve = sub.add_parser("solve", help="single solve; dumps iterated-solution samples")
    solve.add_argument("--n", type=int, dest="n", help="mesh size")
    common(solve)
    return parser


def _study_config(args) -> StudyConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("problem_id", "r", "n_sequence", "method", "tol", "max_iter",
                "quad_points", "rhs_mode", "discrete_mode", "output_path", "output_format"):
        value = getattr(args, "problem" if key == "problem_id" else key, None)
        if value is not None:
            data[key] = value
    return StudyConfig.from_dict(data)


def _run_study(args) -> int:
    config = _study_config(args)
    report = run_study(config)
    if config.output_path:
        emit_report(report, config.output_format, config.output_path)
        print(f"wrote {config.output_format} report to {config.output_path}")
    else:
        sys.stdout.write(render_report(report, config.output_format))
    alphas = np.concatenate([v[np.isfinite(v)] for v in report.alpha.values()]) if report.alpha else []
    if len(alphas):
        print(f"levels n={list(config.n_sequence)}; "
              f"alpha in [{np.min(alphas):.2f}, {np.max(alphas):.2f}]")
    return 0


def _run_solve(args) -> int:
    if not args.problem:
        raise ConfigError("solve needs --problem")
    if not args.n:
        raise ConfigError("solve needs --n")
    r = args.r if args.r is not None else 1
    discrete_mode = args.discrete_mode or "full"
    if discrete_mode == "paper-discrete" and r != 1:
        raise ConfigError("the paper-discrete scheme is piecewise constant (r = 1)")
    try:
        opts = SolveOptions(
            method=args.method or "picard",
            tol=args.tol if args.tol is not None else 1e-12,
            max_iter=args.max_iter if args.max_iter is not None else 200,
            quad_points=args.quad_points if args.quad_points is not None else 10,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    prob = get_problem(args.problem, rhs_mode=args.rhs_mode or "manufactured")
    mesh = make_mesh(args.n)
    if discrete_mode == "paper-discrete":
        sol = solve_paper_discrete(prob, mesh, opts)
    else:
        sol = solve_galerkin(prob, mesh, r, opts)
    pv = iterated_at_partition(prob, sol, gauss_rule(opts.quad_points))

    rows = {"t": mesh.points, "x_s": pv.values}
    if prob.exact is not None:
        exact = np.asarray(prob.exact(mesh.points), dtype=float)
        rows["exact"] = exact
        rows["error"] = np.abs(exact - pv.values)
    text = _solve_table(rows, args.output_format or "csv")
    if args.output_path:
        with open(args.output_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        print(f"wrote {len(mesh.points)} samples to {args.output_path} "
              f"({sol.iterations} iterations, final update {sol.final_update:.2e})")
    else:
        sys.stdout.write(text)
    return 0


def _solve_table(rows: dict, output_format: str) -> str:
    names = list(rows)
    count = len(next(iter(rows.values())))
    if output_format == "json":
        return json.dumps({name: [float(v) for v in vals] for name, vals in rows.items()},
                          indent=2) + "\n"
    if output_format == "md":
        lines = ["| " + " | ".join(names) + " |", "|" + "|".join("---" for _ in names) + "|"]
        for i in range(count):
            lines.append("| " + " | ".join(f"{rows[name][i]:.6e}" for name in names) + " |")
        return "\n".join(lines) + "\n"
    lines = [",".join(names)]
    for i in range(count):
        lines.append(",".join(repr(float(rows[name][i])) for name in names))
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "study":
            return _run_study(args)
        return _run_solve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        level = f" at level n={exc.level}" if exc.level else ""
        print(f"solver diverged{level}: {exc}", file=sys.stderr)
        return 2
    except SingularLinearizationError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 2
