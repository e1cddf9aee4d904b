"""Gauss-Legendre quadrature on [0, 1] and composite rules that respect both
mesh cells and an integrand whose formula changes at a point t = s."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_POINTS",
    "GaussRule",
    "gauss_rule",
    "integrate_cell",
    "SplitPanels",
    "split_panels",
    "integrate_split",
]

MAX_POINTS = 64


@dataclass(frozen=True)
class GaussRule:
    """p-point Gauss-Legendre rule mapped to [0, 1]; weights sum to 1."""

    p: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(p: int) -> GaussRule:
    """Build the p-point Gauss-Legendre rule on [0, 1], exact to degree 2p - 1."""
    p = int(p)
    if not 1 <= p <= MAX_POINTS:
        raise ValueError(f"rule size must be in [1, {MAX_POINTS}], got {p}")
    x, w = np.polynomial.legendre.leggauss(p)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return GaussRule(p, nodes, weights)


def _values(g, t):
    """Evaluate g at the node array t, broadcasting scalar results."""
    return np.broadcast_to(np.asarray(g(t), dtype=float), t.shape)


def integrate_cell(g, a: float, b: float, rule: GaussRule) -> float:
    """Gauss approximation of the integral of g over [a, b]."""
    if a > b:
        raise ValueError(f"empty interval: a={a} > b={b}")
    width = b - a
    t = a + width * rule.nodes
    return float(width * np.dot(rule.weights, _values(g, t)))


@dataclass(frozen=True)
class SplitPanels:
    """Gauss panels for the two sides of a split point s on a mesh.

    Arrays are (panels, p); row k of part 1 covers cell ``cells1[k]`` with
    t <= s, part 2 likewise with t >= s.  No panel straddles a mesh point
    or the split, so each panel sees a smooth integrand.  Zero-width
    sub-panels (s on a mesh point) are dropped.
    """

    t1: np.ndarray
    w1: np.ndarray
    cells1: np.ndarray
    t2: np.ndarray
    w2: np.ndarray
    cells2: np.ndarray


def split_panels(s: float, mesh, rule: GaussRule) -> SplitPanels:
    """Panel nodes and weights for integrating across the split at s."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"split point outside [0, 1]: {s}")
    pts, h, n = mesh.points, mesh.h, mesh.n
    j = mesh.cell_of(s)
    xi, w = rule.nodes, rule.weights

    lo, hi = pts[j], pts[j + 1]
    t1 = pts[:j, None] + h * xi
    w1 = np.broadcast_to(h * w, t1.shape)
    cells1 = np.arange(j)
    if s > lo:  # sub-panel [t_j, s] on the left side of the split
        d = s - lo
        t1 = np.vstack([t1, lo + d * xi])
        w1 = np.vstack([w1, d * w])
        cells1 = np.append(cells1, j)

    t2 = pts[j + 1:n, None] + h * xi
    w2 = np.broadcast_to(h * w, t2.shape)
    cells2 = np.arange(j + 1, n)
    if s < hi:  # sub-panel [s, t_{j+1}] on the right side
        d = hi - s
        t2 = np.vstack([s + d * xi, t2])
        w2 = np.vstack([d * w, w2])
        cells2 = np.append(j, cells2)

    return SplitPanels(t1, w1, cells1, t2, w2, cells2)


def integrate_split(g1, g2, s: float, mesh, rule: GaussRule) -> float:
    """Integrate g1 over [0, s] plus g2 over [s, 1], cell by cell.

    The cell containing s is subdivided at s so that neither a mesh point
    nor the split lies inside any Gauss panel; g1 is only evaluated at
    t <= s and g2 only at t >= s.
    """
    pan = split_panels(s, mesh, rule)
    total = 0.0
    if pan.t1.size:
        total += float(np.sum(_values(g1, pan.t1) * pan.w1))
    if pan.t2.size:
        total += float(np.sum(_values(g2, pan.t2) * pan.w2))
    return total
