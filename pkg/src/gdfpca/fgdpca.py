"""Functional GDPCA: curves -> scores -> stacked components -> curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, FunctionalSeries, project_scores, synthesize_curves
from .exceptions import GridMismatchError
from .gdpc import FitConfig, GdpcFit, fit_gdpc, residual_scores

__all__ = [
    "FgdpcaModel",
    "LoadingCurves",
    "fit_fgdpca",
    "reconstruct_scores",
    "reconstruct_functional",
    "loading_curves",
    "functional_mse",
    "explained_variance",
]


@dataclass(frozen=True, eq=False)
class FgdpcaModel:
    """Greedy stack of components; component ``k`` is fitted on the
    residual scores left by components ``1..k-1``."""

    basis: BasisSystem
    components: tuple[GdpcFit, ...]
    scores: np.ndarray

    @property
    def m(self):
        return self.basis.m

    @property
    def K(self):
        return self.components[0].K

    @property
    def p(self):
        return len(self.components)

    @property
    def n(self):
        return self.scores.shape[0]


@dataclass(frozen=True, eq=False)
class LoadingCurves:
    """Grid-sampled intercept curve and lag loading curves.

    ``alpha_curves[k]`` has shape (G,); ``beta_curves[k]`` has shape (K+1, G)
    for component ``k``.
    """

    alpha_curves: np.ndarray
    beta_curves: np.ndarray


def fit_fgdpca(series, basis, p, config=None):
    """Fit ``p`` functional GDPCs to ``series`` using ``basis`` truncation."""
    if p < 1:
        raise ValueError(f"need at least one component, got p={p}")
    if not series.grid.same_as(basis.grid):
        raise GridMismatchError("series and basis are sampled on different grids")
    config = config or FitConfig()
    scores = project_scores(series, basis)
    scores.setflags(write=False)
    components = []
    current = scores
    for _ in range(p):
        fit = fit_gdpc(current, config)
        components.append(fit)
        current = residual_scores(current, fit)
    return FgdpcaModel(basis=basis, components=tuple(components), scores=scores)


def reconstruct_scores(model, p_used=None):
    p_used = model.p if p_used is None else p_used
    if not 1 <= p_used <= model.p:
        raise ValueError(f"p_used must lie in [1, {model.p}], got {p_used}")
    total = np.zeros_like(model.scores)
    for fit in model.components[:p_used]:
        total += fit.reconstruct()
    return total


def reconstruct_functional(model, p_used=None):
    """Curves rebuilt from the first ``p_used`` components."""
    return synthesize_curves(reconstruct_scores(model, p_used), model.basis)


def loading_curves(model):
    vals = model.basis.values
    alphas = np.array([fit.alpha @ vals for fit in model.components])
    betas = np.array([fit.beta @ vals for fit in model.components])
    return LoadingCurves(alpha_curves=alphas, beta_curves=betas)


def _values_pair(series, reconstruction):
    if not series.grid.same_as(reconstruction.grid):
        raise GridMismatchError("series and reconstruction are on different grids")
    if series.values.shape != reconstruction.values.shape:
        raise ValueError(
            f"shape mismatch: {series.values.shape} vs {reconstruction.values.shape}"
        )
    return series.values, reconstruction.values


def functional_mse(series, reconstruction):
    """``(1/n) sum_t ||X_t - R_t||^2`` with trapezoidal quadrature."""
    x, r = _values_pair(series, reconstruction)
    resid = x - r
    return float(np.mean((resid * resid) @ series.grid.weights))


def explained_variance(series, reconstruction):
    """One minus residual over total variance about the time-mean curve.

    Not clamped: a reconstruction worse than the mean curve gives a
    negative value.
    """
    x, r = _values_pair(series, reconstruction)
    w = series.grid.weights
    total = float(np.sum(((x - x.mean(axis=0)) ** 2) @ w))
    if total <= 0.0:
        raise ValueError("series has zero total variance; explained variance is undefined")
    resid = float(np.sum(((x - r) ** 2) @ w))
    return 1.0 - resid / total
