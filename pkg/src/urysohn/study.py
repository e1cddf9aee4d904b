"""Convergence studies over doubling mesh sequences.

A study solves the same problem on meshes n, 2n, 4n, ..., measures errors
of the iterated solution at the coarsest mesh's interior partition points
(which nest in every finer mesh), extrapolates consecutive levels, and
estimates empirical orders and the scaled error coefficients.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DivergenceError
from .piecewise import make_mesh
from .problems import get_problem
from .quadrature import gauss_rule
from .solver import (
    SolveOptions,
    iterated_at_partition,
    richardson,
    solve_galerkin,
    solve_paper_discrete,
)

__all__ = [
    "StudyConfig",
    "ConvergenceReport",
    "run_study",
    "estimate_order",
    "zeta_estimate",
    "render_report",
    "emit_report",
]

DISCRETE_MODES = ("full", "paper-discrete")

OUTPUT_FORMATS = ("csv", "json", "md")

# Mesh-refinement factor for the reference solve used when a problem has no
# known exact solution.
_REFERENCE_REFINEMENT = 8


@dataclass
class StudyConfig:
    """Everything needed to reproduce a convergence study.

    ``n_sequence`` must be strictly doubling so partition points nest.
    JSON config files use exactly these field names.
    """

    problem_id: str
    params: dict = field(default_factory=dict)
    r: int = 1
    n_sequence: Sequence[int] = (20, 40, 80)
    method: str = "picard"
    tol: float = 1e-12
    max_iter: int = 200
    quad_points: int = 10
    rhs_mode: str = "manufactured"
    discrete_mode: str = "full"
    output_path: Optional[str] = None
    output_format: str = "csv"

    def __post_init__(self):
        self.n_sequence = tuple(int(n) for n in self.n_sequence)
        if len(self.n_sequence) < 2:
            raise ConfigError("n_sequence needs at least two levels")
        for a, b in zip(self.n_sequence, self.n_sequence[1:]):
            if b != 2 * a:
                raise ConfigError(f"n_sequence must double at every step, got {self.n_sequence}")
        if self.n_sequence[0] < 1:
            raise ConfigError("mesh sizes must be positive")
        if self.r < 1:
            raise ConfigError(f"polynomial order must be at least 1, got {self.r}")
        if self.discrete_mode not in DISCRETE_MODES:
            raise ConfigError(f"unknown discrete mode {self.discrete_mode!r}")
        if self.discrete_mode == "paper-discrete" and self.r != 1:
            raise ConfigError("the paper-discrete scheme is piecewise constant (r = 1)")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")
        try:
            SolveOptions(method=self.method, tol=self.tol, max_iter=self.max_iter,
                         quad_points=self.quad_points)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "problem_id" not in data:
            raise ConfigError("config needs a problem_id")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "params": dict(self.params),
            "r": self.r,
            "n_sequence": list(self.n_sequence),
            "method": self.method,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "quad_points": self.quad_points,
            "rhs_mode": self.rhs_mode,
            "discrete_mode": self.discrete_mode,
            "output_path": self.output_path,
            "output_format": self.output_format,
        }


@dataclass
class ConvergenceReport:
    """Per-point errors, orders, extrapolated errors, and error coefficients.

    ``e1``/``zeta`` are keyed by mesh size n; ``alpha`` by the coarse n of
    the (n, 2n) pair it compares; ``e2`` by the coarse n of the
    extrapolation pair; ``beta`` by the coarse n of the two extrapolated
    levels it compares.  Orders are NaN wherever an error level vanishes.
    """

    points: np.ndarray
    n_levels: tuple
    e1: dict
    alpha: dict
    e2: dict
    beta: dict
    zeta: dict
    zeta_stabilization: dict
    reference_based: bool
    meta: dict

    def columns(self):
        """(name, values) pairs in the canonical emission order.

        Pair columns use a colon (``alpha@(4:8)``) so headers stay free of
        CSV delimiters.
        """
        cols = [("t_i", self.points)]
        cols += [(f"E1@{n}", self.e1[n]) for n in self.n_levels]
        cols += [(f"alpha@({n}:{2 * n})", self.alpha[n]) for n in sorted(self.alpha)]
        cols += [(f"E2@{n}", self.e2[n]) for n in sorted(self.e2)]
        cols += [(f"beta@({n}:{2 * n})", self.beta[n]) for n in sorted(self.beta)]
        cols += [(f"zeta@{n}", self.zeta[n]) for n in self.n_levels]
        return cols


def estimate_order(e_coarse: float, e_fine: float) -> float:
    """log2 of the error ratio between consecutive levels; NaN when either
    error is nonpositive (order undefined, not an error)."""
    if not (e_coarse > 0.0 and e_fine > 0.0):
        return float("nan")
    return float(np.log2(e_coarse / e_fine))


def zeta_estimate(errors: Sequence[np.ndarray], hs: Sequence[float], r: int):
    """Scaled signed errors zeta_n = (phi - x_s)/h^(2r) per level, plus the
    stabilization metric max|zeta_n - zeta_2n| / max|zeta_2n| between
    consecutive levels.  A stabilizing zeta is the observable footprint of
    an h^(2r) leading error term."""
    if len(errors) < 2:
        raise ValueError("need at least two levels")
    if len(errors) != len(hs):
        raise ValueError("one mesh width per error level required")
    zetas = [np.asarray(e, dtype=float) / float(h) ** (2 * r) for e, h in zip(errors, hs)]
    metrics = []
    for z_coarse, z_fine in zip(zetas, zetas[1:]):
        if z_fine.size == 0 or float(np.max(np.abs(z_fine))) == 0.0:
            metrics.append(float("nan"))
            continue
        diff = float(np.max(np.abs(z_coarse - z_fine)))
        metrics.append(diff / float(np.max(np.abs(z_fine))))
    return zetas, metrics


def _solve_level(prob, n, r, opts, discrete_mode):
    mesh = make_mesh(n)
    try:
        if discrete_mode == "paper-discrete":
            return solve_paper_discrete(prob, mesh, opts)
        return solve_galerkin(prob, mesh, r, opts)
    except DivergenceError as exc:
        exc.level = n
        raise


def run_study(config: StudyConfig) -> ConvergenceReport:
    """Solve every level, measure errors at the coarse interior partition
    points, extrapolate consecutive pairs, and estimate orders.

    Endpoints are excluded: for Green's-kernel problems the operator
    contributes nothing at s in {0, 1} and the error there is quadrature
    noise.  Without an exact solution, a solve on an 8x-finer mesh serves
    as reference and the report is flagged accordingly.
    """
    t_start = time.perf_counter()
    prob = get_problem(config.problem_id, config.params, config.rhs_mode)
    opts = SolveOptions(method=config.method, tol=config.tol, max_iter=config.max_iter,
                        quad_points=config.quad_points)
    rule = gauss_rule(config.quad_points)
    ns = config.n_sequence
    n0 = ns[0]
    coarse_idx = np.arange(1, n0)  # interior partition points of the coarsest mesh
    points = make_mesh(n0).points[1:-1]

    level_values = {}
    partition = {}
    iterations = {}
    for n in ns:
        sol = _solve_level(prob, n, config.r, opts, config.discrete_mode)
        pv = iterated_at_partition(prob, sol, rule)
        partition[n] = pv
        level_values[n] = pv.values[coarse_idx * (n // n0)]
        iterations[n] = sol.iterations

    reference_based = prob.exact is None
    if reference_based:
        n_ref = ns[-1] * _REFERENCE_REFINEMENT
        ref_sol = _solve_level(prob, n_ref, config.r, opts, config.discrete_mode)
        ref_pv = iterated_at_partition(prob, ref_sol, rule)
        exact_vals = ref_pv.values[coarse_idx * (n_ref // n0)]
    else:
        exact_vals = np.asarray(prob.exact(points), dtype=float)

    signed = {n: exact_vals - level_values[n] for n in ns}
    e1 = {n: np.abs(signed[n]) for n in ns}

    alpha = {}
    for a, b in zip(ns, ns[1:]):
        alpha[a] = np.array([estimate_order(ec, ef) for ec, ef in zip(e1[a], e1[b])])

    e2 = {}
    for a, b in zip(ns, ns[1:]):
        extrap = richardson(partition[a], partition[b], config.r)
        e2[a] = np.abs(exact_vals - extrap.values[coarse_idx * (a // n0)])

    beta = {}
    e2_levels = sorted(e2)
    for a, b in zip(e2_levels, e2_levels[1:]):
        beta[a] = np.array([estimate_order(ec, ef) for ec, ef in zip(e2[a], e2[b])])

    zetas, metrics = zeta_estimate([signed[n] for n in ns], [1.0 / n for n in ns], config.r)
    zeta = dict(zip(ns, zetas))
    zeta_stabilization = dict(zip(ns, metrics))

    meta = {
        "config": config.to_dict(),
        "iterations": iterations,
        "reference_based": reference_based,
        "wall_time_s": time.perf_counter() - t_start,
    }
    return ConvergenceReport(
        points=points,
        n_levels=tuple(ns),
        e1=e1,
        alpha=alpha,
        e2=e2,
        beta=beta,
        zeta=zeta,
        zeta_stabilization=zeta_stabilization,
        reference_based=reference_based,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Report emission


def _fmt_full(x: float) -> str:
    return repr(float(x))


def _fmt_sci(x: float) -> str:
    return "-" if np.isnan(x) else f"{x:.3e}"


def _fmt_order(x: float) -> str:
    return "-" if np.isnan(x) else f"{x:.2f}"


def _render_csv(report: ConvergenceReport) -> str:
    cols = report.columns()
    lines = [",".join(name for name, _ in cols)]
    for i in range(report.points.size):
        lines.append(",".join(_fmt_full(values[i]) for _, values in cols))
    return "\n".join(lines) + "\n"


def _render_json(report: ConvergenceReport) -> str:
    cols = report.columns()
    payload = {
        "config": report.meta["config"],
        "reference_based": report.reference_based,
        "iterations": {str(n): it for n, it in report.meta["iterations"].items()},
        "zeta_stabilization": {str(n): v for n, v in report.zeta_stabilization.items()},
        "columns": [name for name, _ in cols],
        "data": {name: [float(v) for v in values] for name, values in cols},
    }
    # wall time stays out of the file so identical configs emit identical bytes
    return json.dumps(payload, indent=2) + "\n"


def _render_md(report: ConvergenceReport) -> str:
    cols = report.columns()
    cfg = report.meta["config"]
    head = [
        f"# Convergence study: {cfg['problem_id']} (r={cfg['r']}, "
        f"n={','.join(str(n) for n in cfg['n_sequence'])})",
        "",
    ]
    names = [name for name, _ in cols]
    head.append("| " + " | ".join(names) + " |")
    head.append("|" + "|".join("---" for _ in names) + "|")
    for i in range(report.points.size):
        row = []
        for name, values in cols:
            v = values[i]
            if name == "t_i":
                row.append(f"{v:.2f}")
            elif name.startswith(("alpha", "beta")):
                row.append(_fmt_order(v))
            else:
                row.append(_fmt_sci(v))
        head.append("| " + " | ".join(row) + " |")
    if report.zeta_stabilization:
        head.append("")
        stab = ", ".join(
            f"({n},{2 * n}): {_fmt_sci(v)}" for n, v in report.zeta_stabilization.items()
        )
        head.append(f"zeta stabilization {stab}")
    return "\n".join(head) + "\n"


_RENDERERS = {"csv": _render_csv, "json": _render_json, "md": _render_md}


def render_report(report: ConvergenceReport, output_format: str) -> str:
    """Render the report without touching the filesystem."""
    if output_format not in _RENDERERS:
        raise ConfigError(f"unknown output format {output_format!r}")
    return _RENDERERS[output_format](report)


def emit_report(report: ConvergenceReport, output_format: str, path: str) -> str:
    """Write the report table to ``path`` and return the rendered text.

    CSV holds the bare table at full precision; JSON mirrors the same
    columns plus the config echo; md renders a human-readable table.
    """
    text = render_report(report, output_format)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return text
