"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--n 300] [--m 15] [--K 10] [--repeat 20]

Part one times each kernel in-process (numba timings exclude the first,
compiling call). Part two runs one full GDPC fit in a fresh interpreter
per backend, selected with ``GDFPCA_DISABLE_NUMBA``.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np
from scipy import linalg

from gdfpca import _kernels as kn

FIT_SNIPPET = """
import json, time, numpy as np
from gdfpca import _kernels
from gdfpca.gdpc import FitConfig, fit_gdpc
from gdfpca.metrics import DgpConfig, generate
from gdfpca.basis import make_basis, project_scores
s = generate(DgpConfig(dgp="far1", n={n}, d={m}), 0)
chi = project_scores(s, make_basis("fourier", {m}, s.grid))
fit_gdpc(chi[:40], FitConfig(K=2))  # warm-up (compilation / imports)
t0 = time.perf_counter()
fit = fit_gdpc(chi, FitConfig(K={K}))
print(json.dumps({{"backend": _kernels.BACKEND, "seconds": time.perf_counter() - t0,
                  "iterations": fit.iterations, "mse": fit.mse}}))
"""


def _inputs(n, m, K, seed=0):
    r = np.random.default_rng(seed)
    f = r.standard_normal(n + K)
    beta = r.standard_normal((K + 1, m))
    alpha = r.standard_normal(m)
    scores = r.standard_normal((n, m))
    brev = np.ascontiguousarray(beta[::-1])
    Q0, R0 = linalg.qr(brev.T, mode="economic")
    Z = np.ascontiguousarray((scores - alpha) @ Q0)
    return {
        "band_normal": (brev @ brev.T, n),
        "banded_lsq": (np.ascontiguousarray(R0), Z),
        "lag_reconstruct": (f, beta, alpha),
        "sse": (scores, f, beta, alpha),
    }


def bench_kernels(n, m, K, repeat):
    rows = []
    for name, args in _inputs(n, m, K).items():
        fast = getattr(kn, f"{name}_numba")
        slow = getattr(kn, f"{name}_numpy")
        fast(*args)  # compile
        t_fast = min(timeit.repeat(lambda: fast(*args), number=1, repeat=repeat))
        t_slow = min(timeit.repeat(lambda: slow(*args), number=1, repeat=repeat))
        rows.append((name, t_fast, t_slow))
    return rows


def bench_fit(n, m, K):
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, GDFPCA_DISABLE_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, "-c", FIT_SNIPPET.format(n=n, m=m, K=K)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        res = json.loads(proc.stdout.strip().splitlines()[-1])
        out[res["backend"]] = res
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--m", type=int, default=15, help="score dimension (odd, used as Fourier size)")
    ap.add_argument("--K", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not kn.HAVE_NUMBA:
        sys.exit("numba is not active in this interpreter; unset GDFPCA_DISABLE_NUMBA")

    print(f"kernels at n={args.n}, m={args.m}, K={args.K} (best of {args.repeat})")
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, t_fast, t_slow in bench_kernels(args.n, args.m, args.K, args.repeat):
        print(f"{name:<16}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}")

    print("\nfull fit_gdpc on FAR(1) scores")
    fits = bench_fit(args.n, args.m, args.K)
    for backend in ("numba", "numpy"):
        r = fits[backend]
        print(f"{backend:<8}{r['seconds']:>9.3f} s  iterations={r['iterations']}  mse={r['mse']:.10g}")
    print(f"speedup  {fits['numpy']['seconds'] / fits['numba']['seconds']:.1f}x")


if __name__ == "__main__":
    main()
