"""Seeded generators for the three simulation designs.

* FAR(1): a VAR(1) on the first ``d`` Fourier coefficients with transition
  ``B = kappa * G / (2 ||G||_2)``, ``G[i, j] = exp(-(i + j))`` (1-based).
* Smoothed VARI(1,1): an integrated VAR(1) panel over ``m`` spatial
  points, smoothed onto Fourier functions.
* Dynamic factor model with a static factor representation, smoothed the
  same way; the noiseless common part is returned as well.

Every generator takes a master ``seed`` and a ``replication`` index; the
pair selects an independent, reproducible random stream.
"""

from __future__ import annotations

import numpy as np

from .basis import FunctionalSeries, fourier_values, uniform_grid

__all__ = [
    "replication_rng",
    "far1_transition",
    "far1_coefficients",
    "gen_far1",
    "haar_orthogonal",
    "vari11_panel",
    "smooth_panel",
    "gen_vari11",
    "dfm_transition",
    "dfm_panel",
    "gen_dfm",
]


def replication_rng(seed, replication=0):
    """Generator for stream ``replication`` of master ``seed``."""
    if seed < 0 or replication < 0:
        raise ValueError("seed and replication index must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(replication)])))


def far1_transition(d, kappa):
    if d < 1 or d % 2 == 0:
        raise ValueError(f"FAR(1) dimension d must be odd and >= 1, got d={d}")
    if not 0 <= kappa < 2:
        raise ValueError(
            f"kappa={kappa} violates the stationarity bound 0 <= kappa < 2 "
            "(the transition operator norm is kappa/2)"
        )
    i = np.arange(1, d + 1)
    G = np.exp(-(i[:, None] + i[None, :]))
    return kappa * G / (2.0 * np.linalg.norm(G, 2))


def far1_coefficients(d, kappa, n, burn_in=200, seed=0, replication=0):
    """Fourier coefficient series of a FAR(1) process, shape (n, d)."""
    B = far1_transition(d, kappa)
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    rng = replication_rng(seed, replication)
    eps = rng.standard_normal((burn_in + n, d))
    x = np.zeros(d)
    out = np.empty((n, d))
    for t in range(burn_in + n):
        x = B @ x + eps[t]
        if t >= burn_in:
            out[t - burn_in] = x
    return out


def gen_far1(d, kappa, n, burn_in=200, grid=None, seed=0, replication=0):
    grid = grid or uniform_grid()
    coefs = far1_coefficients(d, kappa, n, burn_in, seed, replication)
    return FunctionalSeries(coefs @ fourier_values(d, grid.points, grid.a, grid.b), grid)


def haar_orthogonal(m, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian, sign-fixed)."""
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    return Q * np.sign(np.diag(R))


def vari11_panel(m, T, rng):
    """Integrated VAR(1) panel ``z`` of shape (T, m) and its AR matrix ``A``.

    ``x_t = A x_{t-1} + u_t``, ``z_t = z_{t-1} + x_t`` with ``x_0 = z_0 = 0``.
    """
    V = haar_orthogonal(m, rng)
    lam = rng.uniform(0.0, 0.9, size=m)
    A = (V * lam) @ V.T
    u = rng.standard_normal((T, m))
    z = np.empty((T, m))
    x = np.zeros(m)
    level = np.zeros(m)
    for t in range(T):
        x = A @ x + u[t]
        level = level + x
        z[t] = level
    return z, A


def _design_points(m):
    return (np.arange(m) + 0.5) / m


def smooth_panel(panel, n_basis=21, grid=None):
    """Least-squares fit of each row of ``panel`` onto Fourier functions.

    Row ``t`` is read as values at ``m`` equispaced points of [0, 1]
    (cell midpoints). Returns the (T, n_basis) coefficients and the curves
    on ``grid``.
    """
    panel = np.asarray(panel, dtype=float)
    m = panel.shape[1]
    if n_basis > m:
        raise ValueError(f"n_basis={n_basis} exceeds the {m} design points; smoothing is underdetermined")
    grid = grid or uniform_grid()
    design = fourier_values(n_basis, _design_points(m)).T
    coefs, *_ = np.linalg.lstsq(design, panel.T, rcond=None)
    coefs = coefs.T
    curves = coefs @ fourier_values(n_basis, grid.points, grid.a, grid.b)
    return coefs, FunctionalSeries(curves, grid)


def gen_vari11(m, T, n_basis=21, grid=None, seed=0, replication=0):
    if m < 2 or T < 2:
        raise ValueError("VARI(1,1) needs m >= 2 and T >= 2")
    if n_basis > m:
        raise ValueError(f"n_basis={n_basis} exceeds m={m}; smoothing is underdetermined")
    z, _ = vari11_panel(m, T, replication_rng(seed, replication))
    return smooth_panel(z, n_basis, grid)[1]


def dfm_transition(r, rng):
    """Random ``r x r`` transition with spectral norm ``|s|``, ``s ~ U(-1, 1)``."""
    U = rng.uniform(-1.0, 1.0, size=(r, r))
    return rng.uniform(-1.0, 1.0) * U / np.linalg.norm(U, 2)


def dfm_panel(m, T, r=6, q=2, rng=None, burn_in=100):
    """Static-representation dynamic factor panel.

    Returns ``(z, common)``, both (T, m), where ``common = F @ lambda.T``
    and ``z = common + eps`` with standard normal ``eps``.
    """
    if not (r >= q >= 1):
        raise ValueError(f"need r >= q >= 1, got r={r}, q={q}")
    if r > m:
        raise ValueError(f"number of static factors r={r} exceeds the panel dimension m={m}")
    rng = rng or np.random.default_rng()
    lam = rng.uniform(-1.0, 1.0, size=(m, r))
    Kmat = rng.uniform(-1.0, 1.0, size=(r, q))
    D = dfm_transition(r, rng)
    u = rng.standard_normal((burn_in + T, q))
    F = np.empty((T, r))
    state = np.zeros(r)
    for t in range(burn_in + T):
        state = D @ state + Kmat @ u[t]
        if t >= burn_in:
            F[t - burn_in] = state
    common = F @ lam.T
    eps = rng.standard_normal((T, m))
    return common + eps, common


def gen_dfm(m, T, r=6, q=2, grid=None, n_basis=21, seed=0, replication=0, burn_in=100):
    """Smoothed dynamic factor curves and their smoothed common part."""
    if n_basis > m:
        raise ValueError(f"n_basis={n_basis} exceeds m={m}; smoothing is underdetermined")
    z, common = dfm_panel(m, T, r, q, replication_rng(seed, replication), burn_in)
    grid = grid or uniform_grid()
    return smooth_panel(z, n_basis, grid)[1], smooth_panel(common, n_basis, grid)[1]
