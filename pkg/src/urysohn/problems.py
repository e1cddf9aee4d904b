"""Urysohn integral equations with Green's-function-type kernels.

A kernel kappa(s, t, u) is given by two pieces that agree on the diagonal
t = s but whose s/t derivatives may jump there, so every integral is taken
with panels split at the diagonal.  The module provides the integral
operator, its first two u-derivatives, residual evaluation, manufactured
right-hand sides, and a small registry of built-in benchmark problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, MissingDerivativeError
from .piecewise import UniformMesh, make_mesh
from .quadrature import GaussRule, gauss_rule, split_panels

__all__ = [
    "GreenKernel",
    "UrysohnProblem",
    "kernel_eval",
    "apply_K",
    "apply_Kprime",
    "apply_Ksecond",
    "manufactured_f",
    "manufactured_rhs",
    "residual",
    "get_problem",
    "PROBLEM_IDS",
    "GAMMA_DEFAULT",
]

# Fixed internals for manufactured right-hand sides; fine enough that their
# quadrature error sits far below anything the solvers can resolve.
_RHS_MESH = None  # built lazily to avoid import-order games
_RHS_RULE = None


@dataclass(frozen=True)
class GreenKernel:
    """Two-piece kernel: ``kappa1`` on t <= s, ``kappa2`` on s <= t.

    The pieces agree on the diagonal.  ``du_*`` are the first u-derivative
    pieces, ``du2_*`` the second; both are optional and only needed for
    Newton solves and derivative checks.  All callables take (s, t, u) and
    must accept numpy arrays.

    ``smoothness_r`` records the claimed C^r smoothness of each piece on
    its closed triangle, i.e. the largest polynomial order the kernel is
    known to support at full rate.
    """

    kappa1: Callable
    kappa2: Callable
    du_kappa1: Optional[Callable] = None
    du_kappa2: Optional[Callable] = None
    du2_kappa1: Optional[Callable] = None
    du2_kappa2: Optional[Callable] = None
    smoothness_r: int = 4

    def require_first_derivative(self):
        if self.du_kappa1 is None or self.du_kappa2 is None:
            raise MissingDerivativeError("kernel has no first u-derivative pieces")

    def require_second_derivative(self):
        if self.du2_kappa1 is None or self.du2_kappa2 is None:
            raise MissingDerivativeError("kernel has no second u-derivative pieces")


@dataclass(frozen=True)
class UrysohnProblem:
    """The equation x(s) - integral_0^1 kappa(s, t, x(t)) dt = f(s) on [0, 1].

    ``exact`` is the known solution when available (manufactured problems),
    enabling exact error measurement in convergence studies.
    """

    kernel: GreenKernel
    f: Callable
    exact: Optional[Callable] = None
    name: str = ""


def _check_unit(name, value):
    if np.any((np.asarray(value) < 0.0) | (np.asarray(value) > 1.0)):
        raise ValueError(f"{name} outside [0, 1]")


def kernel_eval(kernel: GreenKernel, s, t, u):
    """kappa(s, t, u): piece 1 where t <= s, piece 2 where t >= s.

    On the diagonal either piece applies (they agree).  Each piece is only
    evaluated on its own closed triangle.
    """
    _check_unit("s", s)
    _check_unit("t", t)
    s_arr, t_arr, u_arr = np.broadcast_arrays(
        np.asarray(s, dtype=float), np.asarray(t, dtype=float), np.asarray(u, dtype=float)
    )
    lower = t_arr <= s_arr
    out = np.empty(s_arr.shape)
    if np.any(lower):
        out[lower] = kernel.kappa1(s_arr[lower], t_arr[lower], u_arr[lower])
    if not np.all(lower):
        upper = ~lower
        out[upper] = kernel.kappa2(s_arr[upper], t_arr[upper], u_arr[upper])
    return float(out) if out.ndim == 0 else out


def _sampled(x, t: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(x(t), dtype=float), t.shape)


def _integrate_pieces(fn1, fn2, x, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """Integrate fn1(s, t, x(t)) over [0, s] plus fn2 over [s, 1] with panels
    that never cross the diagonal."""
    pan = split_panels(s, mesh, rule)
    total = 0.0
    if pan.t1.size:
        total += float(np.sum(fn1(s, pan.t1, _sampled(x, pan.t1)) * pan.w1))
    if pan.t2.size:
        total += float(np.sum(fn2(s, pan.t2, _sampled(x, pan.t2)) * pan.w2))
    return total


def apply_K(prob: UrysohnProblem, x, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """The integral operator: integral_0^1 kappa(s, t, x(t)) dt."""
    _check_unit("s", s)
    k = prob.kernel
    return _integrate_pieces(k.kappa1, k.kappa2, x, float(s), rule, mesh)


def apply_Kprime(prob: UrysohnProblem, x, v, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """Derivative of the operator at x applied to v:
    integral of d kappa/du (s, t, x(t)) v(t) dt."""
    _check_unit("s", s)
    k = prob.kernel
    k.require_first_derivative()

    def fn1(sv, t, xv):
        return k.du_kappa1(sv, t, xv) * _sampled(v, t)

    def fn2(sv, t, xv):
        return k.du_kappa2(sv, t, xv) * _sampled(v, t)

    return _integrate_pieces(fn1, fn2, x, float(s), rule, mesh)


def apply_Ksecond(prob: UrysohnProblem, x, v1, v2, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """Second derivative at x applied to (v1, v2):
    integral of d^2 kappa/du^2 (s, t, x(t)) v1(t) v2(t) dt."""
    _check_unit("s", s)
    k = prob.kernel
    k.require_second_derivative()

    def fn1(sv, t, xv):
        return k.du2_kappa1(sv, t, xv) * _sampled(v1, t) * _sampled(v2, t)

    def fn2(sv, t, xv):
        return k.du2_kappa2(sv, t, xv) * _sampled(v1, t) * _sampled(v2, t)

    return _integrate_pieces(fn1, fn2, x, float(s), rule, mesh)


def manufactured_f(kernel: GreenKernel, phi, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """f(s) := phi(s) - integral kappa(s, t, phi(t)) dt, so that phi solves the
    problem exactly up to quadrature error."""
    _check_unit("s", s)
    value = _integrate_pieces(kernel.kappa1, kernel.kappa2, phi, float(s), rule, mesh)
    return float(np.asarray(phi(float(s)), dtype=float)) - value


def _rhs_internals():
    global _RHS_MESH, _RHS_RULE
    if _RHS_MESH is None:
        _RHS_MESH = make_mesh(8)
        _RHS_RULE = gauss_rule(16)
    return _RHS_MESH, _RHS_RULE


def manufactured_rhs(kernel: GreenKernel, phi) -> Callable:
    """A right-hand-side callable built from a prescribed solution phi.

    Uses a fixed 8-cell mesh with 16-point Gauss panels; for kernels that
    are analytic off the diagonal the quadrature error is negligible
    against every effect the solvers can measure.  Accepts scalars or
    arrays (evaluated pointwise: the split location moves with s).
    """
    mesh, rule = _rhs_internals()

    def f(s):
        arr = np.asarray(s, dtype=float)
        if arr.ndim == 0:
            return manufactured_f(kernel, phi, float(arr), rule, mesh)
        out = np.empty(arr.shape)
        for idx in np.ndindex(arr.shape):
            out[idx] = manufactured_f(kernel, phi, float(arr[idx]), rule, mesh)
        return out

    return f


def residual(prob: UrysohnProblem, x, s: float, rule: GaussRule, mesh: UniformMesh) -> float:
    """x(s) - K(x)(s) - f(s); zero at the exact solution."""
    xs = float(np.asarray(x(float(s)), dtype=float))
    return xs - apply_K(prob, x, s, rule, mesh) - float(np.asarray(prob.f(float(s)), dtype=float))


# ---------------------------------------------------------------------------
# Built-in problems

GAMMA_DEFAULT = float(np.sqrt(12.0))

PROBLEM_IDS = ("paper-hammerstein", "linear-green", "zero-kernel")

RHS_MODES = ("manufactured", "paper")


def _green_factor_pieces(gamma: float):
    """The symmetric kernel sinh(g*min) sinh(g*(1-max)) / (g sinh g): the
    Green's function of -u'' + g^2 u with Dirichlet conditions."""
    c = gamma * np.sinh(gamma)

    def lower(s, t):  # t <= s
        return np.sinh(gamma * t) * np.sinh(gamma * (1.0 - s)) / c

    def upper(s, t):  # s <= t
        return np.sinh(gamma * s) * np.sinh(gamma * (1.0 - t)) / c

    return lower, upper


def _hammerstein_problem(gamma: float, rhs_mode: str) -> UrysohnProblem:
    lower, upper = _green_factor_pieces(gamma)
    g2 = gamma * gamma

    def psi(t, u):
        return g2 * u - 2.0 * u ** 3

    def dpsi(t, u):
        return g2 - 6.0 * u ** 2

    def d2psi(t, u):
        return -12.0 * u

    kernel = GreenKernel(
        kappa1=lambda s, t, u: lower(s, t) * psi(t, u),
        kappa2=lambda s, t, u: upper(s, t) * psi(t, u),
        du_kappa1=lambda s, t, u: lower(s, t) * dpsi(t, u),
        du_kappa2=lambda s, t, u: upper(s, t) * dpsi(t, u),
        du2_kappa1=lambda s, t, u: lower(s, t) * d2psi(t, u),
        du2_kappa2=lambda s, t, u: upper(s, t) * d2psi(t, u),
        smoothness_r=8,
    )

    def phi(s):
        return 2.0 / (2.0 * s + 1.0)

    if rhs_mode == "manufactured":
        return UrysohnProblem(kernel, manufactured_rhs(kernel, phi), exact=phi,
                              name="paper-hammerstein")

    # Historical closed form kept for comparison runs.  Its normalization is
    # inconsistent with phi (f(0) = 2/gamma instead of phi(0) = 2), so no
    # exact solution is attached and studies fall back to a reference solve.
    def f_printed(s):
        return (2.0 * np.sinh(gamma * (1.0 - s)) + (2.0 / 3.0) * np.sinh(gamma * s)) / (
            gamma * np.sinh(gamma)
        )

    return UrysohnProblem(kernel, f_printed, exact=None, name="paper-hammerstein[paper-rhs]")


def _linear_green_problem(gamma: float, scale: float) -> UrysohnProblem:
    lower, upper = _green_factor_pieces(gamma)
    kernel = GreenKernel(
        kappa1=lambda s, t, u: scale * lower(s, t) * u,
        kappa2=lambda s, t, u: scale * upper(s, t) * u,
        du_kappa1=lambda s, t, u: scale * lower(s, t) * np.ones_like(u),
        du_kappa2=lambda s, t, u: scale * upper(s, t) * np.ones_like(u),
        du2_kappa1=lambda s, t, u: np.zeros_like(u),
        du2_kappa2=lambda s, t, u: np.zeros_like(u),
        smoothness_r=8,
    )
    phi = np.exp
    return UrysohnProblem(kernel, manufactured_rhs(kernel, phi), exact=phi, name="linear-green")


def _zero_kernel_problem() -> UrysohnProblem:
    def zero(s, t, u):
        return 0.0 * (s + t + u)

    kernel = GreenKernel(
        kappa1=zero, kappa2=zero,
        du_kappa1=zero, du_kappa2=zero,
        du2_kappa1=zero, du2_kappa2=zero,
        smoothness_r=8,
    )

    def f(s):
        return np.sin(np.pi * s) + 1.0

    return UrysohnProblem(kernel, f, exact=f, name="zero-kernel")


def get_problem(problem_id: str, params: Optional[dict] = None, rhs_mode: str = "manufactured") -> UrysohnProblem:
    """Look up a built-in problem by identifier.

    ``params`` may override numeric problem parameters (``gamma`` for the
    Green's-kernel problems, plus ``scale`` for linear-green).  ``rhs_mode``
    selects the manufactured right-hand side (default) or, for
    paper-hammerstein only, the historical printed one.
    """
    params = dict(params or {})
    if rhs_mode not in RHS_MODES:
        raise ConfigError(f"unknown rhs mode {rhs_mode!r}; expected one of {RHS_MODES}")

    def take(key, default):
        value = params.pop(key, default)
        return float(value)

    if problem_id == "paper-hammerstein":
        gamma = take("gamma", GAMMA_DEFAULT)
        prob = _hammerstein_problem(gamma, rhs_mode)
    elif problem_id == "linear-green":
        gamma = take("gamma", GAMMA_DEFAULT)
        scale = take("scale", 1.0)
        if rhs_mode != "manufactured":
            raise ConfigError(f"{problem_id} has no printed right-hand side")
        prob = _linear_green_problem(gamma, scale)
    elif problem_id == "zero-kernel":
        if rhs_mode != "manufactured":
            raise ConfigError(f"{problem_id} has no printed right-hand side")
        prob = _zero_kernel_problem()
    else:
        raise ConfigError(f"unknown problem {problem_id!r}; expected one of {PROBLEM_IDS}")

    if params:
        raise ConfigError(f"unknown parameters for {problem_id}: {sorted(params)}")
    return prob
