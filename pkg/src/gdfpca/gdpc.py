"""Generalized dynamic principal component of a score matrix.

One component reconstructs each score vector from the current and ``K``
past values of a scalar factor::

    chi_hat[t, j] = alpha[j] + sum_{h=0}^{K} f[t - h] * beta[h, j]

and is fitted by alternating exact least squares: loadings ``(beta, alpha)``
given the factor, then the factor given the loadings, followed by
renormalization of the factor to zero mean and squared norm ``n + K - 1``.

Storage of the factor: ``f`` has length ``n + K`` and ``f[s]`` is the
factor at time ``s - K + 1`` (times run ``1 - K .. n``). ``beta[h]`` is the
loading on lag ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _kernels
from .exceptions import (
    DegenerateError,
    DegenerateFactorError,
    DegenerateInputError,
    DegenerateLoadingsError,
    SingularDesignError,
)

__all__ = [
    "FitConfig",
    "GdpcFit",
    "build_factor_design",
    "update_loadings",
    "build_C",
    "build_D",
    "solve_factor",
    "normalize_factor",
    "update_factor",
    "initial_factor",
    "objective",
    "fit_gdpc",
    "residual_scores",
]

# Both subproblems are solved by orthogonal factorizations, so the limit
# applies to the condition number of the least-squares matrix itself.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit_gdpc`.

    ``init`` is one of ``"first_pc"``, ``"supplied"`` (uses ``f0``) or
    ``"random"`` (uses ``seed``).
    """

    K: int = 10
    epsilon: float = 1e-6
    max_iter: int = 500
    init: str = "first_pc"
    f0: np.ndarray | None = field(default=None, repr=False, compare=False)
    seed: int | None = None

    def __post_init__(self):
        problems = []
        if not isinstance(self.K, (int, np.integer)) or self.K < 0:
            problems.append(f"K must be a non-negative integer, got {self.K!r}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be > 0, got {self.epsilon!r}")
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            problems.append(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        if self.init not in ("first_pc", "supplied", "random"):
            problems.append(f"init must be 'first_pc', 'supplied' or 'random', got {self.init!r}")
        if self.init == "supplied" and self.f0 is None:
            problems.append("init='supplied' requires f0")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True, eq=False)
class GdpcFit:
    f: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    mse_trace: np.ndarray
    iterations: int
    converged: bool

    @property
    def K(self):
        return self.beta.shape[0] - 1

    @property
    def m(self):
        return self.beta.shape[1]

    @property
    def n(self):
        return self.f.size - self.K

    @property
    def mse(self):
        return float(self.mse_trace[-1])

    def reconstruct(self):
        """Fitted score matrix, shape (n, m)."""
        return _kernels.lag_reconstruct(self.f, self.beta, self.alpha)


def _as_scores(scores):
    scores = np.ascontiguousarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValueError("scores must be a 2-D (n, m) array")
    return scores


def build_factor_design(f, n, K):
    """Design matrix with row ``t`` equal to ``(f[t], ..., f[t+K], 1)``.

    Column ``q`` (0-based, ``q <= K``) multiplies the lag-``K - q`` loading.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size != n + K:
        raise ValueError(f"factor must have length n + K = {n + K}, got shape {f.shape}")
    F = np.empty((n, K + 2))
    for q in range(K + 1):
        F[:, q] = f[q : q + n]
    F[:, K + 1] = 1.0
    return F


def update_loadings(f, scores, K):
    """Least-squares loadings and intercepts for a fixed factor.

    All ``m`` coordinates are regressed on the same design through a single
    QR factorization.

    Returns
    -------
    beta : ndarray, shape (K+1, m)
    alpha : ndarray, shape (m,)
    """
    scores = _as_scores(scores)
    n = scores.shape[0]
    F = build_factor_design(f, n, K)
    Q, R = linalg.qr(F, mode="economic")
    sv = linalg.svdvals(R)
    cond = np.inf if sv[-1] == 0.0 else sv[0] / sv[-1]
    if cond > COND_LIMIT:
        raise SingularDesignError(f"lagged factor design is singular or ill-conditioned (cond(F) ~ {cond:.3g})")
    coef = linalg.solve_triangular(R, Q.T @ scores)
    beta = np.ascontiguousarray(coef[K::-1])
    alpha = np.ascontiguousarray(coef[K + 1])
    return beta, alpha


def build_C(scores, alpha, K):
    """Stack of the ``m`` matrices ``C_j``, shape (m, n+K, K+1).

    ``C_j[s, q] = chi[s - q, j] - alpha[j]`` when ``0 <= s - q < n``, else 0
    (0-based form of the band condition ``1 v (t-n+1) <= q <= (K+1) ^ t``).
    """
    scores = _as_scores(scores)
    alpha = np.asarray(alpha, dtype=float)
    n, m = scores.shape
    if alpha.shape != (m,):
        raise ValueError(f"alpha must have length m = {m}")
    centered = scores - alpha
    C = np.zeros((m, n + K, K + 1))
    for q in range(K + 1):
        C[:, q : q + n, q] = centered.T
    return C


def _reversed_loadings(beta):
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 2:
        raise ValueError("beta must be a 2-D (K+1, m) array")
    return np.ascontiguousarray(beta[::-1])


def _dense_from_band(ab):
    kp1, size = ab.shape
    D = np.zeros((size, size))
    for d in range(kp1):
        idx = np.arange(size - d)
        D[idx + d, idx] = ab[d, : size - d]
        D[idx, idx + d] = ab[d, : size - d]
    return D


def build_D(beta, n):
    """Dense ``(n+K, n+K)`` normal matrix of the factor subproblem.

    Symmetric with bandwidth ``K``; assembled from the banded kernel.
    """
    brev = _reversed_loadings(beta)
    return _dense_from_band(_kernels.band_normal(brev @ brev.T, n))


def solve_factor(scores, beta, alpha):
    """Unnormalized factor minimizing the objective for fixed loadings.

    This is the solution of ``D(beta) f = sum_j C_j(alpha) brev_j``, computed
    without forming ``D``: every time step contributes the same block
    ``brev.T``, which is first reduced by QR to at most ``K + 1`` rows, and
    the stacked system is then factorized by banded QR.
    """
    scores = _as_scores(scores)
    n, m = scores.shape
    brev = _reversed_loadings(beta)
    alpha = np.asarray(alpha, dtype=float)
    if brev.shape[1] != m or alpha.shape != (m,):
        raise ValueError("loadings do not match the score matrix")
    if not np.any(brev):
        raise DegenerateLoadingsError("all loadings are zero; the factor is not identified")

    Q0, R0 = linalg.qr(brev.T, mode="economic")
    Z = np.ascontiguousarray((scores - alpha) @ Q0)
    f, rdiag = _kernels.banded_lsq(np.ascontiguousarray(R0), Z)
    low = rdiag.min()
    cond = np.inf if low == 0.0 else rdiag.max() / low
    if cond > COND_LIMIT:
        raise DegenerateLoadingsError(f"factor subproblem is singular or ill-conditioned (cond ~ {cond:.3g})")
    return f


def normalize_factor(f):
    """Center ``f`` and scale it to squared norm ``len(f) - 1``."""
    f = np.asarray(f, dtype=float)
    centered = f - f.mean()
    norm = np.linalg.norm(centered)
    if norm < 1e-14:
        raise DegenerateFactorError("factor is constant and cannot be normalized")
    return np.sqrt(f.size - 1) * centered / norm


def update_factor(scores, beta, alpha):
    return normalize_factor(solve_factor(scores, beta, alpha))


def initial_factor(scores, K):
    """First principal-component score sequence, padded to length ``n + K``.

    The first value is repeated ``K`` times in front, and the result is
    normalized like every other factor iterate.
    """
    scores = _as_scores(scores)
    n = scores.shape[0]
    if n < K + 2:
        raise ValueError(f"need at least K + 2 = {K + 2} observations, got n = {n}")
    if not np.any(np.ptp(scores, axis=0)):
        raise DegenerateInputError("score matrix has zero variance")
    centered = scores - scores.mean(axis=0)
    u, _, vt = np.linalg.svd(centered, full_matrices=False)
    # deterministic sign: largest-magnitude loading positive
    if vt[0, np.argmax(np.abs(vt[0]))] < 0:
        u[:, 0] = -u[:, 0]
    # unit-norm score: same direction as u * s but independent of the data
    # scale, so near-zero residuals still give a usable start
    pc = u[:, 0]
    return normalize_factor(np.concatenate([np.full(K, pc[0]), pc]))


def objective(scores, f, beta, alpha):
    """Mean squared score residual ``1/(n m) sum_t ||chi_t - chi_hat_t||^2``."""
    scores = _as_scores(scores)
    n, m = scores.shape
    return _kernels.sse(scores, np.asarray(f, float), np.ascontiguousarray(beta, float), np.asarray(alpha, float)) / (n * m)


def _starting_factor(scores, config):
    n = scores.shape[0]
    K = config.K
    if config.init == "first_pc":
        return initial_factor(scores, K)
    if config.init == "supplied":
        f0 = np.asarray(config.f0, dtype=float)
        if f0.shape != (n + K,):
            raise ValueError(f"supplied f0 must have length n + K = {n + K}")
        return normalize_factor(f0)
    rng = np.random.default_rng(config.seed)
    return normalize_factor(rng.standard_normal(n + K))


def fit_gdpc(scores, config=None):
    """Fit one generalized dynamic principal component.

    Alternates :func:`update_loadings` and :func:`update_factor` until the
    relative decrease of the objective falls below ``config.epsilon`` or
    ``config.max_iter`` sweeps have run. ``mse_trace[0]`` is the objective
    at the starting factor, then one entry per sweep.

    Hitting ``max_iter`` is not an error; the returned fit has
    ``converged=False``.
    """
    config = config or FitConfig()
    scores = _as_scores(scores)
    n, m = scores.shape
    K = config.K
    if m < 1:
        raise ValueError("score matrix needs at least one column")
    if n <= K + 2:
        raise ValueError(f"need n > K + 2 observations, got n = {n}, K = {K}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("score matrix contains non-finite values")

    f0 = _starting_factor(scores, config)
    f = f0
    try:
        beta, alpha = update_loadings(f, scores, K)
    except DegenerateError as err:
        raise err.at_iteration(0) from err
    mse = objective(scores, f, beta, alpha)
    trace = [mse]
    converged = False
    sweeps = 0
    while sweeps < config.max_iter:
        if mse == 0.0:
            converged = True
            break
        sweeps += 1
        try:
            f_new = update_factor(scores, beta, alpha)
            beta_new, alpha_new = update_loadings(f_new, scores, K)
        except DegenerateError as err:
            raise err.at_iteration(sweeps) from err
        mse_new = objective(scores, f_new, beta_new, alpha_new)
        trace.append(mse_new)
        improvement = (mse - mse_new) / mse
        f, beta, alpha, mse = f_new, beta_new, alpha_new, mse_new
        if improvement < config.epsilon:
            converged = True
            break

    if np.dot(f - f.mean(), f0 - f0.mean()) < 0:
        f, beta = -f, -beta
    return GdpcFit(
        f=f,
        beta=beta,
        alpha=alpha,
        mse_trace=np.array(trace),
        iterations=sweeps,
        converged=converged,
    )


def residual_scores(scores, fit):
    scores = _as_scores(scores)
    if scores.shape != (fit.n, fit.m):
        raise ValueError(f"scores shape {scores.shape} does not match the fit ({fit.n}, {fit.m})")
    return scores - fit.reconstruct()
