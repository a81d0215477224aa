"""Replication studies comparing GDFPCA with static FPCA."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import fit_fpca, reconstruct_fpca
from .basis import FunctionalSeries, fourier_values, make_basis, project_scores, synthesize_curves, uniform_grid
from .exceptions import GdfpcaError, ThresholdUnreachableError
from .fgdpca import explained_variance, fit_fgdpca, functional_mse, reconstruct_functional
from .gdpc import FitConfig, fit_gdpc, residual_scores
from .simgen import gen_dfm, gen_far1, gen_vari11, replication_rng

log = logging.getLogger(__name__)

__all__ = [
    "DgpConfig",
    "ReplicationSummary",
    "generate",
    "evaluate_methods",
    "run_replications",
    "select_p",
    "thread_count",
]

DGPS = ("far1", "vari11", "dfm", "factor")
METHODS = ("gdfpca", "fpca")


@dataclass(frozen=True)
class DgpConfig:
    """Data-generating process plus the fitting settings used on it.

    ``n`` is the series length (``T`` for the panel designs). ``m`` is the
    panel dimension for ``vari11``/``dfm``. ``truncation`` is the number of
    Fourier functions used for fitting; ``None`` means ``d`` for ``far1``
    and ``n_basis`` otherwise. The ``factor`` design builds curves from a
    known factor with ``lags`` lags plus optional Gaussian score noise.
    """

    dgp: str = "far1"
    n: int = 300
    d: int = 15
    kappa: float = 0.3
    burn_in: int = 200
    m: int = 50
    n_basis: int = 21
    r: int = 6
    q: int = 2
    lags: int = 0
    noise_sd: float = 0.0
    grid_size: int = 101
    truncation: int | None = None
    K: int = 10
    epsilon: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.dgp not in DGPS:
            raise ValueError(f"unknown dgp {self.dgp!r}; expected one of {DGPS}")

    @property
    def basis_size(self):
        if self.truncation is not None:
            return self.truncation
        return self.d if self.dgp == "far1" else self.n_basis

    def fit_config(self):
        return FitConfig(K=self.K, epsilon=self.epsilon, max_iter=self.max_iter)

    def to_dict(self):
        return asdict(self)


def _factor_curves(cfg, grid, seed, replication):
    rng = replication_rng(seed, replication)
    nb = cfg.n_basis
    f = rng.standard_normal(cfg.n + cfg.lags)
    beta = rng.standard_normal((cfg.lags + 1, nb))
    alpha = rng.standard_normal(nb)
    scores = np.tile(alpha, (cfg.n, 1))
    for h in range(cfg.lags + 1):
        scores += np.outer(f[cfg.lags - h : cfg.lags - h + cfg.n], beta[h])
    if cfg.noise_sd > 0:
        scores += cfg.noise_sd * rng.standard_normal(scores.shape)
    return FunctionalSeries(scores @ fourier_values(nb, grid.points, grid.a, grid.b), grid)


def generate(cfg, seed, replication=0):
    """Curves for replication ``replication`` of the configured design."""
    grid = uniform_grid(cfg.grid_size)
    if cfg.dgp == "far1":
        return gen_far1(cfg.d, cfg.kappa, cfg.n, cfg.burn_in, grid, seed, replication)
    if cfg.dgp == "vari11":
        return gen_vari11(cfg.m, cfg.n, cfg.n_basis, grid, seed, replication)
    if cfg.dgp == "dfm":
        return gen_dfm(cfg.m, cfg.n, cfg.r, cfg.q, grid, cfg.n_basis, seed, replication)[0]
    return _factor_curves(cfg, grid, seed, replication)


def evaluate_methods(series, basis, methods, p_list, fit_config):
    """Functional MSE and explained variance for each method and ``p``.

    Returns ``(records, traces)``; records are dicts with keys
    ``method, p, mse, explained_variance``; traces maps component index to
    the GDPC objective trace.
    """
    p_list = sorted(set(int(p) for p in p_list))
    p_max = p_list[-1]
    records = []
    traces = {}
    if "gdfpca" in methods:
        model = fit_fgdpca(series, basis, p_max, fit_config)
        traces = {k + 1: c.mse_trace.tolist() for k, c in enumerate(model.components)}
        for p in p_list:
            rec = reconstruct_functional(model, p)
            records.append(
                {
                    "method": "gdfpca",
                    "p": p,
                    "mse": functional_mse(series, rec),
                    "explained_variance": explained_variance(series, rec),
                }
            )
    if "fpca" in methods:
        fp = fit_fpca(project_scores(series, basis), p_max)
        for p in p_list:
            rec = synthesize_curves(reconstruct_fpca(fp, p), basis)
            records.append(
                {
                    "method": "fpca",
                    "p": p,
                    "mse": functional_mse(series, rec),
                    "explained_variance": explained_variance(series, rec),
                }
            )
    return records, traces


def thread_count():
    env = os.environ.get("GDFPCA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer GDFPCA_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class ReplicationSummary:
    methods: tuple
    p_list: tuple
    dgp: dict
    seed: int
    requested: int
    records: list = field(repr=False)
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def replications(self):
        return self.requested - len(self.failures)

    def values(self, method, p, key="explained_variance"):
        return np.array([r[key] for r in self.records if r["method"] == method and r["p"] == p])

    def median(self, method, p, key="explained_variance"):
        return self.stats[(method, p)][key]["median"]


def _quartiles(values):
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return {"q1": float(q1), "median": float(med), "q3": float(q3)}


def _one_replication(cfg, methods, p_list, seed, r):
    series = generate(cfg, seed, r)
    basis = make_basis("fourier", cfg.basis_size, series.grid)
    records, _ = evaluate_methods(series, basis, methods, p_list, cfg.fit_config())
    for rec in records:
        rec["replication"] = r
    return records


def run_replications(dgp_config, methods=METHODS, p_list=(1,), reps=50, seed=0, threads=None):
    """Generate ``reps`` datasets and score every method at every ``p``.

    Replication ``r`` uses random stream ``r`` of ``seed``. A replication
    whose fit raises is logged and dropped; ``failures`` records why.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    methods = tuple(methods)
    unknown = set(methods) - set(METHODS)
    if unknown or not methods:
        raise ValueError(f"methods must be a non-empty subset of {METHODS}, got {methods}")
    p_list = tuple(sorted(set(int(p) for p in p_list)))
    if not p_list or p_list[0] < 1 or p_list[-1] > dgp_config.basis_size:
        raise ValueError(f"p values must lie in [1, {dgp_config.basis_size}], got {p_list}")

    def task(r):
        try:
            return r, _one_replication(dgp_config, methods, p_list, seed, r), None
        except (GdfpcaError, np.linalg.LinAlgError) as err:
            log.warning("replication %d failed: %s", r, err)
            return r, None, f"{type(err).__name__}: {err}"

    workers = min(threads or thread_count(), reps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(reps)))
    else:
        results = [task(r) for r in range(reps)]
    results.sort(key=lambda item: item[0])

    records, failures = [], []
    for r, recs, err in results:
        if err is None:
            records.extend(recs)
        else:
            failures.append({"replication": r, "error": err})

    stats = {}
    for method in methods:
        for p in p_list:
            rows = [x for x in records if x["method"] == method and x["p"] == p]
            if rows:
                stats[(method, p)] = {
                    key: _quartiles([x[key] for x in rows]) for key in ("mse", "explained_variance")
                }
    return ReplicationSummary(
        methods=methods,
        p_list=p_list,
        dgp=dgp_config.to_dict(),
        seed=seed,
        requested=reps,
        records=records,
        failures=failures,
        stats=stats,
    )


def select_p(dgp_config, threshold=0.8, seed=0, reps=10):
    """Smallest ``p`` whose median GDFPCA explained variance reaches ``threshold``.

    Components are added greedily to every replication in lockstep, so each
    step costs one extra component fit per replication.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    fit_config = dgp_config.fit_config()
    state = []
    for r in range(reps):
        series = generate(dgp_config, seed, r)
        basis = make_basis("fourier", dgp_config.basis_size, series.grid)
        scores = project_scores(series, basis)
        state.append([series, basis, scores, np.zeros_like(scores)])

    best = -np.inf
    for p in range(1, dgp_config.basis_size + 1):
        evs = []
        for item in state:
            series, basis, resid, total = item
            fit = fit_gdpc(resid, fit_config)
            item[2] = residual_scores(resid, fit)
            item[3] = total + fit.reconstruct()
            evs.append(explained_variance(series, synthesize_curves(item[3], basis)))
        med = float(np.median(evs))
        best = max(best, med)
        if med >= threshold:
            return p
    raise ThresholdUnreachableError(threshold, best, dgp_config.basis_size)
