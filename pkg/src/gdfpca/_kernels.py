"""Inner loops of the alternating least-squares fit.

Each kernel has a numba implementation and a pure-numpy one with identical
semantics. The numba path is used when numba imports and the environment
variable ``GDFPCA_DISABLE_NUMBA`` is unset or ``0``; set it to ``1`` to force
numpy. ``benchmarks/bench_kernels.py`` times both.

Index conventions: the factor is stored as ``f[0 .. n+K-1]``; stored index
``s`` holds time ``s - K + 1`` (1-based), so the lag-``h`` factor for 0-based
observation ``t`` is ``f[t + K - h]``. ``brev`` is the loading matrix with
lags reversed, ``brev[r] = beta[K - r]``, which lines ``brev[r]`` up with
``f[t + r]``.

The factor subproblem is solved as a least-squares problem by banded QR
rather than through its normal matrix ``D``: the triangular factor ``R``
satisfies ``R'R = D`` but its accuracy depends on ``sqrt(cond(D))``.
"""

import os

import numpy as np
from scipy.linalg import solve_banded

_DISABLE = os.environ.get("GDFPCA_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def band_normal_numpy(gram, n):
    """Lower band of D: ``ab[d, s] = D[s + d, s]``, shape (K+1, n+K).

    ``gram[r, r2] = sum_j brev[r, j] * brev[r2, j]``.
    """
    kp1 = gram.shape[0]
    ab = np.zeros((kp1, n + kp1 - 1))
    for r in range(kp1):
        for d in range(kp1 - r):
            ab[d, r : r + n] += gram[r, r + d]
    return ab


def banded_lsq_numpy(R0, Z):
    """Minimize ``sum_t ||R0 @ f[t : t+K+1] - Z[t]||^2`` over ``f``.

    ``R0`` is the (k, K+1) upper-trapezoidal block shared by every time
    step and ``Z`` is (n, k). Returns ``(f, rdiag)`` where ``rdiag`` holds
    the magnitudes of the banded triangular factor's diagonal; zero or tiny
    entries flag rank deficiency.

    Sliding-window QR: at step ``t`` the ``K`` unfinished rows carried over
    from earlier steps are stacked on the new block and re-triangularized;
    the leading row is then final, because no later block touches column
    ``t``.
    """
    k, kp1 = R0.shape
    K = kp1 - 1
    n = Z.shape[0]
    N = n + K
    band = np.zeros((kp1, N))  # solve_banded layout: band[K + i - j, j] = R[i, j]
    z = np.zeros(N)
    carry = np.zeros((K, kp1))
    carry_z = np.zeros(K)
    for t in range(n):
        Q, R = np.linalg.qr(np.vstack([carry, R0]))
        y = Q.T @ np.concatenate([carry_z, Z[t]])
        rows = R.shape[0]
        if rows < kp1:
            R = np.vstack([R, np.zeros((kp1 - rows, kp1))])
            y = np.concatenate([y, np.zeros(kp1 - rows)])
        for d in range(kp1):
            band[K - d, t + d] = R[0, d]
        z[t] = y[0]
        carry = np.zeros((K, kp1))
        carry[:, :K] = R[1:, 1:]
        carry_z = y[1:]
    for i in range(K):
        for d in range(K - i):
            band[K - d, n + i + d] = carry[i, i + d]
        z[n + i] = carry_z[i]
    rdiag = np.abs(band[K])
    if not np.all(rdiag > 0):
        return np.zeros(N), rdiag
    return solve_banded((0, K), band, z), rdiag


def lag_reconstruct_numpy(f, beta, alpha):
    """``out[t, j] = alpha[j] + sum_h f[t + K - h] * beta[h, j]``."""
    K = beta.shape[0] - 1
    n = f.size - K
    out = np.broadcast_to(alpha, (n, alpha.size)).copy()
    for h in range(K + 1):
        out += np.outer(f[K - h : K - h + n], beta[h])
    return out


def sse_numpy(scores, f, beta, alpha):
    resid = scores - lag_reconstruct_numpy(f, beta, alpha)
    return float(np.sum(resid * resid))


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def band_normal_numba(gram, n):
        kp1 = gram.shape[0]
        ab = np.zeros((kp1, n + kp1 - 1))
        for t in range(n):
            for r in range(kp1):
                for d in range(kp1 - r):
                    ab[d, t + r] += gram[r, r + d]
        return ab

    @njit(cache=True, nogil=True)
    def banded_lsq_numba(R0, Z):
        # Givens rotations fold each incoming row into a banded R, stored
        # as Rb[i, d] = R[i, i + d]
        k, kp1 = R0.shape
        n = Z.shape[0]
        N = n + kp1 - 1
        Rb = np.zeros((N, kp1))
        z = np.zeros(N)
        buf = np.empty(kp1)
        for t in range(n):
            for i in range(k):
                for d in range(kp1):
                    buf[d] = R0[i, d]
                y = Z[t, i]
                for c in range(i, kp1):
                    x = buf[c]
                    if x == 0.0:
                        continue
                    row = t + c
                    h = np.hypot(Rb[row, 0], x)
                    cs = Rb[row, 0] / h
                    sn = x / h
                    Rb[row, 0] = h
                    for cc in range(c + 1, kp1):
                        a = Rb[row, cc - c]
                        b = buf[cc]
                        Rb[row, cc - c] = cs * a + sn * b
                        buf[cc] = cs * b - sn * a
                    zr = z[row]
                    z[row] = cs * zr + sn * y
                    y = cs * y - sn * zr
        rdiag = Rb[:, 0].copy()
        f = np.zeros(N)
        for d in range(N):
            if rdiag[d] == 0.0:
                return f, rdiag
        for row in range(N - 1, -1, -1):
            acc = z[row]
            for d in range(1, min(kp1, N - row)):
                acc -= Rb[row, d] * f[row + d]
            f[row] = acc / Rb[row, 0]
        return f, rdiag

    @njit(cache=True, nogil=True)
    def lag_reconstruct_numba(f, beta, alpha):
        kp1, m = beta.shape
        K = kp1 - 1
        n = f.size - K
        out = np.empty((n, m))
        for t in range(n):
            for j in range(m):
                acc = alpha[j]
                for h in range(kp1):
                    acc += f[t + K - h] * beta[h, j]
                out[t, j] = acc
        return out

    @njit(cache=True, nogil=True)
    def sse_numba(scores, f, beta, alpha):
        kp1, m = beta.shape
        K = kp1 - 1
        n = f.size - K
        total = 0.0
        for t in range(n):
            for j in range(m):
                acc = alpha[j]
                for h in range(kp1):
                    acc += f[t + K - h] * beta[h, j]
                e = scores[t, j] - acc
                total += e * e
        return total

    band_normal = band_normal_numba
    banded_lsq = banded_lsq_numba
    lag_reconstruct = lag_reconstruct_numba
    sse = sse_numba
else:
    band_normal = band_normal_numpy
    banded_lsq = banded_lsq_numpy
    lag_reconstruct = lag_reconstruct_numpy
    sse = sse_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
