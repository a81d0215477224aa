"""Generalized dynamic functional principal component analysis."""

__version__ = "0.1.0"

from .basis import (  # noqa: E402
    BasisSystem,
    FunctionalSeries,
    Grid,
    make_basis,
    project_scores,
    synthesize_curves,
    uniform_grid,
)
from .baselines import FpcaFit, fit_fpca, reconstruct_fpca  # noqa: E402
from .fgdpca import (  # noqa: E402
    FgdpcaModel,
    explained_variance,
    fit_fgdpca,
    functional_mse,
    loading_curves,
    reconstruct_functional,
)
from .gdpc import FitConfig, GdpcFit, fit_gdpc, residual_scores  # noqa: E402

__all__ = [
    "BasisSystem",
    "FunctionalSeries",
    "Grid",
    "make_basis",
    "project_scores",
    "synthesize_curves",
    "uniform_grid",
    "FpcaFit",
    "fit_fpca",
    "reconstruct_fpca",
    "FgdpcaModel",
    "explained_variance",
    "fit_fgdpca",
    "functional_mse",
    "loading_curves",
    "reconstruct_functional",
    "FitConfig",
    "GdpcFit",
    "fit_gdpc",
    "residual_scores",
]
