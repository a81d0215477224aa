"""Acceptance criteria, each run at its stated tolerance and time budget.

Every test appends one PASS/FAIL line to the terminal summary.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from gdfpca import _kernels
from gdfpca.baselines import fit_fpca, reconstruct_fpca
from gdfpca.basis import make_basis, project_scores, synthesize_curves, uniform_grid
from gdfpca.fgdpca import fit_fgdpca, functional_mse, reconstruct_functional
from gdfpca.gdpc import FitConfig, build_C, build_D, fit_gdpc, residual_scores, solve_factor, update_loadings
from gdfpca.metrics import DgpConfig, run_replications
from gdfpca.simgen import dfm_panel, gen_dfm, replication_rng

from conftest import ACCEPTANCE_LINES
from test_gdpc import brute_C, brute_D, factor_oracle, loadings_oracle, rel_err


def _record(number, title, ok, detail, elapsed, budget):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {number:>2}. {title}: {detail} ({elapsed:.1f}s / budget {budget:.0f}s)")
    assert ok, detail
    assert within, f"runtime {elapsed:.1f}s exceeds {budget}s"


def test_01_formula_fidelity():
    start = time.perf_counter()
    worst = 0.0
    r = np.random.default_rng(101)
    for _ in range(50):
        n, K, m = int(r.integers(1, 11)), int(r.integers(0, 4)), int(r.integers(1, 5))
        chi = r.standard_normal((n, m))
        alpha = r.standard_normal(m)
        beta = r.standard_normal((K + 1, m))
        worst = max(worst, np.max(np.abs(build_C(chi, alpha, K) - brute_C(chi, alpha, K))))
        worst = max(worst, np.max(np.abs(build_D(beta, n) - brute_D(beta, n))))
    _record(1, "C/D formula fidelity", worst <= 1e-12, f"max abs deviation {worst:.2e}",
            time.perf_counter() - start, 5)


def test_02_ls_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    r = np.random.default_rng(202)
    for _ in range(50):
        n, m, K = int(r.integers(8, 31)), int(r.integers(2, 7)), int(r.integers(0, 4))
        chi = r.standard_normal((n, m))
        f = r.standard_normal(n + K)
        b, a = update_loadings(f, chi, K)
        ob, oa = loadings_oracle(f, chi, K)
        worst = max(worst, rel_err(np.vstack([b, a]), np.vstack([ob, oa])))
        beta = r.standard_normal((K + 1, m))
        alpha = r.standard_normal(m)
        worst = max(worst, rel_err(solve_factor(chi, beta, alpha), factor_oracle(chi, beta, alpha)))
    _record(2, "LS-oracle equivalence", worst < 1e-8, f"max relative error {worst:.2e}",
            time.perf_counter() - start, 10)


def test_03_monotonicity():
    start = time.perf_counter()
    worst = -np.inf
    for seed in range(100):
        chi = np.random.default_rng(seed).standard_normal((100, 8))
        trace = fit_gdpc(chi, FitConfig(K=2)).mse_trace
        worst = max(worst, np.max(np.diff(trace)) if trace.size > 1 else -np.inf)
    _record(3, "coordinate-descent monotonicity", worst <= 1e-10,
            f"largest step increase {worst:.2e} over 100 fits", time.perf_counter() - start, 30)


def _one_factor_functional(seed, n=200, m=10, K=2):
    r = np.random.default_rng(seed)
    basis = make_basis("bspline", m, uniform_grid())
    chi = _kernels.lag_reconstruct_numpy(
        r.standard_normal(n + K), r.standard_normal((K + 1, m)), r.standard_normal(m)
    )
    return synthesize_curves(chi, basis), basis


def _relative_functional_mse(seed):
    series, basis = _one_factor_functional(seed)
    model = fit_fgdpca(series, basis, 1, FitConfig(K=2))
    truth_power = np.mean(series.values**2 @ series.grid.weights)
    return functional_mse(series, reconstruct_functional(model)) / truth_power


def test_04_noise_free_recovery():
    start = time.perf_counter()
    rel = _relative_functional_mse(0)
    # context for the single-instance check: recovery rate across seeds
    rate = sum(_relative_functional_mse(s) < 1e-8 for s in range(20))
    _record(4, "noise-free recovery (seed 0)", rel < 1e-8,
            f"relative functional MSE {rel:.2e}; {rate}/20 seeds recover", time.perf_counter() - start, 10)


def test_05_k0_matches_pca():
    start = time.perf_counter()
    hits = 0
    for seed in range(50):
        chi = np.random.default_rng(seed).standard_normal((80, 6))
        g = fit_gdpc(chi, FitConfig(K=0)).mse
        f = np.mean((chi - reconstruct_fpca(fit_fpca(chi, 1))) ** 2)
        hits += abs(g - f) <= 1e-6 * f
    _record(5, "K=0 equals PCA optimum", hits >= 48, f"{hits}/50 trials within 1e-6 relative",
            time.perf_counter() - start, 30)


def _score_error(m, seed, p=2, K=1):
    z, common = dfm_panel(m, 300, 6, 2, replication_rng(seed))
    total = np.zeros_like(z)
    resid = z
    for _ in range(p):
        fit = fit_gdpc(resid, FitConfig(K=K))
        total += fit.reconstruct()
        resid = residual_scores(resid, fit)
    return np.mean((common - total) ** 2)


def _functional_error(m, seed, p=2, K=1):
    nb = m - 1 if m % 2 == 0 else m
    series, common = gen_dfm(m, 300, 6, 2, uniform_grid(), n_basis=nb, seed=seed)
    basis = make_basis("fourier", nb, series.grid)
    model = fit_fgdpca(series, basis, p, FitConfig(K=K))
    return functional_mse(common, reconstruct_functional(model))


def test_06_consistency_trend():
    start = time.perf_counter()
    ladder = (10, 20, 40)
    score = [np.median([_score_error(m, s) for s in range(20)]) for m in ladder]
    func = [np.median([_functional_error(m, s) for s in range(20)]) for m in ladder]
    ok = score[0] > score[1] > score[2] and func[0] >= func[1] >= func[2]
    detail = "score-level " + " > ".join(f"{v:.4f}" for v in score) + "; functional " + " >= ".join(
        f"{v:.4f}" for v in func
    )
    _record(6, "consistency trend over m=10,20,40", ok, detail, time.perf_counter() - start, 300)


def test_07_vari_direction():
    start = time.perf_counter()
    cfg = DgpConfig(dgp="vari11", m=50, n=100, n_basis=21)
    s = run_replications(cfg, ("gdfpca", "fpca"), (2,), reps=20, seed=0)
    g, f = s.median("gdfpca", 2), s.median("fpca", 2)
    _record(7, "VARI(1,1) GDFPCA beats FPCA", g > f and s.replications == 20,
            f"median EV gdfpca {g:.4f} vs fpca {f:.4f}", time.perf_counter() - start, 300)


def test_08_far1_scale():
    start = time.perf_counter()
    cfg = DgpConfig(dgp="far1", d=15, kappa=0.3, n=300)
    s = run_replications(cfg, ("gdfpca",), (7,), reps=20, seed=0)
    med = s.median("gdfpca", 7)
    _record(8, "FAR(1) p=7 reaches 80%", med >= 0.80 and s.replications == 20,
            f"median EV {med:.4f}", time.perf_counter() - start, 300)


def test_09_basis_parseval():
    start = time.perf_counter()
    grid = uniform_grid()
    w = grid.weights
    gram_dev = 0.0
    trip = 0.0
    parse = 0.0
    r = np.random.default_rng(909)
    for kind, m in (("fourier", 15), ("fourier", 21), ("bspline", 10), ("bspline", 20)):
        basis = make_basis(kind, m, grid)
        V = basis.values
        gram = np.array([[np.sum(w * V[i] * V[j]) for j in range(m)] for i in range(m)])
        gram_dev = max(gram_dev, np.max(np.abs(gram - np.eye(m))))
        a = r.standard_normal((30, m))
        b = r.standard_normal((30, m))
        xa = synthesize_curves(a, basis)
        trip = max(trip, np.max(np.abs(project_scores(xa, basis) - a)))
        fm = functional_mse(xa, synthesize_curves(b, basis))
        parse = max(parse, abs(fm - np.mean(np.sum((a - b) ** 2, axis=1))))
    ok = gram_dev < 1e-6 and trip < 1e-8 and parse < 1e-8
    _record(9, "basis orthonormality and Parseval", ok,
            f"Gram dev {gram_dev:.1e}, round trip {trip:.1e}, MSE gap {parse:.1e}", time.perf_counter() - start, 5)


def _pm10_path():
    env = os.environ.get("GDFPCA_PM10_CSV")
    if env:
        return Path(env)
    local = Path(__file__).parent / "data" / "pm10.csv"
    return local if local.is_file() else None


def test_10_pm10_table():
    path = _pm10_path()
    if path is None or not path.is_file():
        ACCEPTANCE_LINES.append(
            "[SKIP] 10. PM10 explained-variance table: no data file "
            "(set GDFPCA_PM10_CSV or add tests/data/pm10.csv)"
        )
        pytest.skip("PM10 CSV not supplied; set GDFPCA_PM10_CSV to run this criterion")
    from gdfpca.harness import DatasetSpec, load_fts_csv
    from gdfpca.metrics import evaluate_methods

    start = time.perf_counter()
    layout = os.environ.get("GDFPCA_PM10_LAYOUT", "time_by_grid")
    series = load_fts_csv(DatasetSpec(str(path), layout=layout, smooth_kind="fourier", smooth_size=15))
    basis = make_basis("fourier", 15, series.grid)
    records, _ = evaluate_methods(series, basis, ("gdfpca",), (1, 2, 3), FitConfig())
    got = [r["explained_variance"] * 100 for r in records]
    target = [81.1, 89.7, 93.8]
    ok = series.n == 175 and all(abs(g - t) <= 2 for g, t in zip(got, target))
    _record(10, "PM10 GDFPCA column", ok,
            f"n={series.n}, EV% " + ", ".join(f"{g:.1f} (vs {t})" for g, t in zip(got, target)),
            time.perf_counter() - start, 300)
