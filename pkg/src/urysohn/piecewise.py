"""Uniform meshes of [0, 1], orthonormal shifted-Legendre cell bases, and the
cell-wise L2 projection onto piecewise polynomials.

The approximating space has no continuity constraints at the partition
points: a member is an independent polynomial of degree <= r-1 on every
cell.  Coefficients are stored against cell-mapped basis functions that are
L2-orthonormal on their cell (scaled by 1/sqrt(h)), so the mass matrix is
the identity and projecting is a single quadrature pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import GaussRule, gauss_rule

__all__ = [
    "UniformMesh",
    "make_mesh",
    "eval_basis",
    "basis_table",
    "LocalBasis",
    "PiecewisePoly",
    "project",
]


@dataclass(frozen=True)
class UniformMesh:
    """The partition {t_i = i/n} of [0, 1] into n cells of width h = 1/n."""

    n: int
    h: float
    points: np.ndarray

    def cell_of(self, s: float) -> int:
        """0-based index of the cell containing s; interior partition points
        resolve to the left cell (values there are left limits)."""
        self._check_domain(np.asarray(s, dtype=float))
        return int(self._cells(np.asarray(s, dtype=float), side="left"))

    def _check_domain(self, s: np.ndarray) -> None:
        if np.any((s < 0.0) | (s > 1.0)):
            raise ValueError("point outside [0, 1]")

    def _cells(self, s: np.ndarray, side: str) -> np.ndarray:
        kind = "left" if side == "left" else "right"
        idx = np.searchsorted(self.points, s, side=kind) - 1
        return np.clip(idx, 0, self.n - 1)


def make_mesh(n: int) -> UniformMesh:
    """Uniform mesh with n cells."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cell count must be positive, got {n}")
    points = np.arange(n + 1) / n
    points.flags.writeable = False
    return UniformMesh(n=n, h=1.0 / n, points=points)


def _legendre(q: int, x: np.ndarray) -> np.ndarray:
    """Legendre polynomial P_q on [-1, 1] by the three-term recurrence."""
    if q == 0:
        return np.ones_like(x)
    p_km1, p_k = np.ones_like(x), x
    for k in range(2, q + 1):
        p_km1, p_k = p_k, ((2 * k - 1) * x * p_k - (k - 1) * p_km1) / k
    return p_k


def eval_basis(q: int, tau):
    """Value of the degree-q L2[0, 1]-orthonormal Legendre polynomial."""
    if q < 0:
        raise ValueError(f"degree must be nonnegative, got {q}")
    tau = np.asarray(tau, dtype=float)
    if np.any((tau < 0.0) | (tau > 1.0)):
        raise ValueError("basis argument outside [0, 1]")
    out = math.sqrt(2 * q + 1) * _legendre(q, 2.0 * tau - 1.0)
    return float(out) if tau.ndim == 0 else out


def basis_table(r: int, tau: np.ndarray) -> np.ndarray:
    """Values of the first r orthonormal basis polynomials, shape tau.shape + (r,)."""
    tau = np.asarray(tau, dtype=float)
    x = 2.0 * tau - 1.0
    out = np.empty(x.shape + (r,))
    out[..., 0] = 1.0
    if r > 1:
        out[..., 1] = math.sqrt(3.0) * x
    p_km1, p_k = np.ones_like(x), x
    for k in range(2, r):
        p_km1, p_k = p_k, ((2 * k - 1) * x * p_k - (k - 1) * p_km1) / k
        out[..., k] = math.sqrt(2 * k + 1) * p_k
    return out


@dataclass(frozen=True)
class LocalBasis:
    """The first r orthonormal Legendre polynomials on [0, 1] (deg e_q = q)."""

    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"basis size must be positive, got {self.r}")

    def eval(self, q: int, tau):
        if not 0 <= q < self.r:
            raise ValueError(f"degree {q} outside [0, {self.r - 1}]")
        return eval_basis(q, tau)

    def table(self, tau) -> np.ndarray:
        return basis_table(self.r, np.asarray(tau, dtype=float))


@dataclass(frozen=True)
class PiecewisePoly:
    """A piecewise polynomial of degree <= r-1 per cell, as an (n, r) array of
    coefficients against the cell-mapped orthonormal basis.

    The L2[0, 1] norm is the plain Euclidean norm of the coefficients.
    Members are generally discontinuous at partition points; plain calls
    take the left limit there, and one-sided limits are explicit via
    :meth:`eval_left` / :meth:`eval_right`.
    """

    mesh: UniformMesh
    r: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.mesh.n, self.r):
            raise ValueError(
                f"coefficient array must be {(self.mesh.n, self.r)}, got {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def _eval(self, s, side: str):
        arr = np.asarray(s, dtype=float)
        self.mesh._check_domain(arr)
        cells = self.mesh._cells(arr, side)
        vals = self.eval_on_cells(arr, cells)
        return float(vals) if arr.ndim == 0 else vals

    def eval_on_cells(self, t: np.ndarray, cells: np.ndarray) -> np.ndarray:
        """Evaluate using given cell indices (t assumed inside those cells)."""
        tau = (t - self.mesh.points[cells]) / self.mesh.h
        table = basis_table(self.r, np.clip(tau, 0.0, 1.0))
        return np.einsum("...q,...q->...", self.coeffs[cells], table) / math.sqrt(self.mesh.h)

    def __call__(self, s):
        return self._eval(s, "left")

    def eval_left(self, s):
        """Left limit; at s = 0 this is the value from the first cell."""
        return self._eval(s, "left")

    def eval_right(self, s):
        """Right limit; at s = 1 this is the value from the last cell."""
        return self._eval(s, "right")

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def project(f, mesh: UniformMesh, r: int, quad: GaussRule | None = None) -> PiecewisePoly:
    """Cell-wise L2 projection of f onto piecewise polynomials of degree < r.

    ``quad`` defaults to a max(r, 10)-point Gauss rule per cell, which keeps
    the quadrature error far below the h^r projection error for smooth f.
    """
    if r < 1:
        raise ValueError(f"polynomial order must be positive, got {r}")
    rule = quad if quad is not None else gauss_rule(max(r, 10))
    t = mesh.points[:-1, None] + mesh.h * rule.nodes
    fvals = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    table = basis_table(r, rule.nodes)  # (p, r)
    coeffs = math.sqrt(mesh.h) * ((fvals * rule.weights) @ table)
    return PiecewisePoly(mesh=mesh, r=r, coeffs=coeffs)
