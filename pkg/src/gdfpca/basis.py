"""Orthonormal basis systems on a sampling grid.

Curves are stored as values on a shared grid; inner products use the
trapezoidal rule on that grid. Every basis returned by :func:`make_basis`
is orthonormal under that quadrature, so scores and curves are related by
plain matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .exceptions import GridMismatchError

__all__ = [
    "Grid",
    "BasisSystem",
    "FunctionalSeries",
    "uniform_grid",
    "trapezoid_weights",
    "make_basis",
    "fourier_values",
    "project_scores",
    "synthesize_curves",
    "gram_matrix",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def trapezoid_weights(points):
    points = np.asarray(points, dtype=float)
    h = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Sampling abscissae with trapezoidal quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        w = _frozen(self.weights)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        if w.shape != pts.shape or not np.all(w > 0):
            raise ValueError("grid weights must be positive and match the points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, points):
        return cls(points, trapezoid_weights(points))

    @property
    def a(self):
        return float(self.points[0])

    @property
    def b(self):
        return float(self.points[-1])

    @property
    def size(self):
        return self.points.size

    def same_as(self, other):
        return self is other or (
            self.points.shape == other.points.shape
            and np.allclose(self.points, other.points, rtol=0, atol=1e-12)
        )


def uniform_grid(size=101, a=0.0, b=1.0):
    """Equispaced grid of ``size`` points on ``[a, b]``."""
    if not b > a:
        raise ValueError(f"grid bounds must satisfy a < b, got [{a}, {b}]")
    return Grid.from_points(np.linspace(a, b, size))


@dataclass(frozen=True, eq=False)
class BasisSystem:
    """``m`` functions sampled on a grid; ``values`` has shape (m, G)."""

    kind: str
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def m(self):
        return self.values.shape[0]

    def evaluate_coefficients(self, coefs):
        return np.asarray(coefs, dtype=float) @ self.values


@dataclass(frozen=True, eq=False)
class FunctionalSeries:
    """``n`` curves on a common grid; ``values`` has shape (n, G)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 2:
            raise ValueError("functional series values must be a 2-D (n, G) array")
        if vals.shape[1] != self.grid.size:
            raise GridMismatchError(
                f"series has {vals.shape[1]} grid columns but the grid has {self.grid.size} points"
            )
        if vals.shape[0] < 1:
            raise ValueError("functional series needs at least one curve")
        if not np.all(np.isfinite(vals)):
            raise ValueError("functional series contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return self.values.shape[0]

    def norms_squared(self):
        return (self.values**2) @ self.grid.weights


def fourier_values(m, x, a=0.0, b=1.0):
    """Orthonormal Fourier functions on ``[a, b]`` evaluated at ``x``.

    Ordering is 1, sin(2 pi u), cos(2 pi u), sin(4 pi u), ... with
    ``u = (x - a) / (b - a)``.
    """
    if m < 1 or m % 2 == 0:
        raise ValueError(f"Fourier basis size must be odd and >= 1, got m={m}")
    x = np.asarray(x, dtype=float)
    u = (x - a) / (b - a)
    scale = 1.0 / np.sqrt(b - a)
    out = np.empty((m, x.size))
    out[0] = scale
    for k in range(1, (m - 1) // 2 + 1):
        arg = 2.0 * np.pi * k * u
        out[2 * k - 1] = np.sqrt(2.0) * scale * np.sin(arg)
        out[2 * k] = np.sqrt(2.0) * scale * np.cos(arg)
    return out


def _bspline_values(m, points, order, a, b):
    n_interior = m - order
    if n_interior < 0:
        raise ValueError(f"B-spline basis of order {order} needs m >= {order}, got m={m}")
    degree = order - 1
    inner = np.linspace(a, b, n_interior + 2)
    knots = np.concatenate([np.full(degree, a), inner, np.full(degree, b)])
    dm = BSpline.design_matrix(np.clip(points, a, b), knots, degree)
    return dm.toarray().T


def _orthonormalize(values, weights):
    # Modified Gram-Schmidt, two passes for re-orthogonalization.
    q = np.array(values, dtype=float)
    for _ in range(2):
        for i in range(q.shape[0]):
            for k in range(i):
                q[i] -= (q[i] * q[k]) @ weights * q[k]
            norm = np.sqrt((q[i] ** 2) @ weights)
            if norm < 1e-12:
                raise ValueError("basis functions are linearly dependent on this grid")
            q[i] /= norm
    return q


def make_basis(kind, m, grid, order=4):
    """Build an orthonormal basis of ``m`` functions on ``grid``.

    Parameters
    ----------
    kind : {"fourier", "bspline"}
    m : int
        Number of functions. Must be odd for ``"fourier"``.
    grid : Grid
    order : int, optional
        B-spline order (degree + 1). The interior knot count is ``m - order``.

    Returns
    -------
    BasisSystem
    """
    if m < 1:
        raise ValueError(f"basis size must be >= 1, got m={m}")
    if m > grid.size:
        raise ValueError(
            f"basis size m={m} exceeds the {grid.size} grid points; quadrature is underdetermined"
        )
    if kind == "fourier":
        values = fourier_values(m, grid.points, grid.a, grid.b)
    elif kind == "bspline":
        raw = _bspline_values(m, grid.points, order, grid.a, grid.b)
        values = _orthonormalize(raw, grid.weights)
    else:
        raise ValueError(f"unknown basis kind {kind!r}; expected 'fourier' or 'bspline'")
    return BasisSystem(kind, values, grid)


def gram_matrix(basis):
    v = basis.values
    return (v * basis.grid.weights) @ v.T


def project_scores(series, basis):
    """Score matrix ``chi[t, j] = <X_t, phi_j>`` by quadrature, shape (n, m)."""
    if not series.grid.same_as(basis.grid):
        raise GridMismatchError("series and basis are sampled on different grids")
    return series.values @ (basis.values * basis.grid.weights).T


def synthesize_curves(scores, basis):
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    if scores.shape[1] != basis.m:
        raise ValueError(f"scores have {scores.shape[1]} columns but the basis has m={basis.m}")
    return FunctionalSeries(scores @ basis.values, basis.grid)
