"""Classical (static) FPCA on score matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FpcaFit", "fit_fpca", "reconstruct_fpca"]


@dataclass(frozen=True, eq=False)
class FpcaFit:
    """Eigen-decomposition of the sample covariance (``1/(n-1)``).

    ``eigenvalues`` holds all ``min(n, m)`` values in descending order;
    ``eigenvectors`` and ``pc_scores`` keep the leading ``p``.
    """

    mean_scores: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pc_scores: np.ndarray

    @property
    def p(self):
        return self.eigenvectors.shape[1]


def fit_fpca(scores, p):
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValueError("scores must be a 2-D (n, m) array")
    n, m = scores.shape
    if n < 2:
        raise ValueError("FPCA needs at least two observations")
    if not 1 <= p <= m:
        raise ValueError(f"p must lie in [1, m={m}], got {p}")
    mean = scores.mean(axis=0)
    centered = scores - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    vecs = vt[:p].T.copy()
    # deterministic sign: largest-magnitude entry of each eigenvector positive
    idx = np.argmax(np.abs(vecs), axis=0)
    vecs *= np.sign(vecs[idx, np.arange(p)])
    eigenvalues = np.zeros(m)
    eigenvalues[: s.size] = s**2 / (n - 1)
    return FpcaFit(
        mean_scores=mean,
        eigenvalues=eigenvalues,
        eigenvectors=vecs,
        pc_scores=centered @ vecs,
    )


def reconstruct_fpca(fit, p_used=None):
    """Mean plus rank-``p_used`` projection; the MSE-optimal such approximation."""
    p_used = fit.p if p_used is None else p_used
    if not 1 <= p_used <= fit.p:
        raise ValueError(f"p_used must lie in [1, {fit.p}], got {p_used}")
    return fit.mean_scores + fit.pc_scores[:, :p_used] @ fit.eigenvectors[:, :p_used].T
