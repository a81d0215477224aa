"""Dataset ingestion, run configuration and report emission.

The CLI in :mod:`gdfpca.cli` is a thin layer over the ``run_*`` functions
here, which take a flat configuration dict (the same keys accepted in a
``--config`` JSON file) and write their outputs into ``out_dir``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .basis import FunctionalSeries, Grid, _bspline_values, fourier_values, make_basis, uniform_grid
from .exceptions import (
    ConfigError,
    DataFormatError,
    NonNumericCellError,
    RaggedRowError,
    ZeroVarianceColumnError,
)
from .fgdpca import fit_fgdpca, loading_curves, reconstruct_functional
from .gdpc import FitConfig
from .metrics import DgpConfig, evaluate_methods, generate, run_replications

__all__ = [
    "DatasetSpec",
    "load_fts_csv",
    "write_curves_csv",
    "DEFAULTS",
    "validate_config",
    "run_simulate",
    "run_fit",
    "run_compare",
]

CSV_DIGITS = 12


@dataclass(frozen=True)
class DatasetSpec:
    """How to read and preprocess a curve file.

    ``layout`` is ``"time_by_grid"`` (one curve per row) or
    ``"grid_by_time"`` (one curve per column). Grid points are taken as
    equispaced on ``[a, b]``. Preprocessing runs in the fixed order
    log-return, center, scale, smooth.
    """

    path: str
    layout: str = "time_by_grid"
    a: float = 0.0
    b: float = 1.0
    center: bool = False
    scale: bool = False
    log_return: bool = False
    smooth_kind: str | None = None
    smooth_size: int | None = None
    smooth_order: int = 4
    resample_size: int = 101
    columns: int | None = None

    def __post_init__(self):
        if self.layout not in ("time_by_grid", "grid_by_time"):
            raise ValueError(f"layout must be 'time_by_grid' or 'grid_by_time', got {self.layout!r}")
        if not self.a < self.b:
            raise ValueError(f"grid bounds must satisfy a < b, got [{self.a}, {self.b}]")
        if (self.smooth_kind is None) != (self.smooth_size is None):
            raise ValueError("smoothing needs both a basis kind and a basis size")


def _parse_float(cell):
    try:
        value = float(cell)
    except ValueError:
        return None
    return value


def _read_matrix(path, expected_columns=None):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    with path.open(newline="") as fh:
        rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]
    if not rows:
        raise DataFormatError(f"{path} contains no data")
    first_line, first = rows[0]
    if any(_parse_float(c) is None for c in first):
        rows = rows[1:]  # header
        if not rows:
            raise DataFormatError(f"{path} contains a header but no data")
    width = len(rows[0][1])
    if expected_columns is not None and width != expected_columns:
        raise DataFormatError(
            f"expected {expected_columns} columns but found {width}", row=rows[0][0]
        )
    data = np.empty((len(rows), width))
    for k, (line, row) in enumerate(rows):
        if len(row) != width:
            raise RaggedRowError(f"row has {len(row)} cells, expected {width}", row=line, column=min(len(row), width) + 1)
        for col, cell in enumerate(row):
            value = _parse_float(cell)
            if value is None or not math.isfinite(value):
                raise NonNumericCellError(f"non-numeric cell {cell!r}", row=line, column=col + 1)
            data[k, col] = value
    return data


def load_fts_csv(spec):
    """Read a CSV of curves into a :class:`FunctionalSeries`."""
    data = _read_matrix(spec.path, spec.columns)
    if spec.layout == "grid_by_time":
        data = data.T
    if spec.log_return:
        if np.any(data <= 0):
            t, g = np.argwhere(data <= 0)[0]
            raise DataFormatError("log returns need strictly positive values", row=t + 1, column=g + 1)
        data = np.diff(np.log(data), axis=0)
    if spec.center:
        data = data - data.mean(axis=0)
    if spec.scale:
        if data.shape[0] < 2:
            raise DataFormatError("scaling needs at least two curves")
        sd = data.std(axis=0, ddof=1)
        zero = np.flatnonzero(sd == 0)
        if zero.size:
            raise ZeroVarianceColumnError("grid column has zero variance; cannot scale", column=int(zero[0]) + 1)
        data = data / sd
    points = np.linspace(spec.a, spec.b, data.shape[1])
    if spec.smooth_kind is None:
        return FunctionalSeries(data, Grid.from_points(points))

    target = uniform_grid(spec.resample_size, spec.a, spec.b)
    if spec.smooth_kind == "fourier":
        raw = fourier_values(spec.smooth_size, points, spec.a, spec.b)
        out = fourier_values(spec.smooth_size, target.points, spec.a, spec.b)
    elif spec.smooth_kind == "bspline":
        raw = _bspline_values(spec.smooth_size, points, spec.smooth_order, spec.a, spec.b)
        out = _bspline_values(spec.smooth_size, target.points, spec.smooth_order, spec.a, spec.b)
    else:
        raise ValueError(f"unknown smoothing basis {spec.smooth_kind!r}")
    if spec.smooth_size > points.size:
        raise DataFormatError(
            f"smoothing basis size {spec.smooth_size} exceeds the {points.size} sampled points"
        )
    coefs, *_ = np.linalg.lstsq(raw.T, data.T, rcond=None)
    return FunctionalSeries(coefs.T @ out, target)


def write_curves_csv(path, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.atleast_2d(values):
            writer.writerow([f"{v:.{CSV_DIGITS}g}" for v in row])


# -- configuration ---------------------------------------------------------

DEFAULTS = {
    "seed": 0,
    "out_dir": ".",
    # simulation designs
    "dgp": None,
    "d": 15,
    "kappa": 0.3,
    "n": 300,
    "burn_in": 200,
    "m": 50,
    "n_basis": 21,
    "r": 6,
    "q": 2,
    "lags": 0,
    "noise_sd": 0.0,
    "grid_size": 101,
    "replication": 0,
    "out": None,
    # datasets
    "input": None,
    "layout": "time_by_grid",
    "a": 0.0,
    "b": 1.0,
    "center": False,
    "scale": False,
    "log_return": False,
    "smooth_basis": None,
    "smooth_size": None,
    "resample_size": 101,
    # fitting
    "basis": "fourier",
    "basis_size": None,
    "order": 4,
    "K": 10,
    "p": 3,
    "epsilon": 1e-6,
    "max_iter": 500,
    "methods": "gdfpca,fpca",
    "reps": 50,
    "reconstruction": False,
}

_INT_KEYS = {"seed", "d", "n", "burn_in", "m", "n_basis", "r", "q", "lags", "grid_size",
             "replication", "resample_size", "order", "K", "p", "max_iter", "reps"}
_POSITIVE = {"d", "n", "m", "n_basis", "r", "q", "grid_size", "resample_size", "order", "p", "max_iter", "reps"}


def _is_int(value):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def validate_config(cfg, command):
    """Check a merged config dict; raise :class:`ConfigError` listing every problem."""
    problems = []
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        problems.append(f"unknown keys: {', '.join(unknown)}")
    for key in sorted(_INT_KEYS & set(cfg)):
        value = cfg[key]
        if not _is_int(value):
            problems.append(f"{key} must be an integer, got {value!r}")
        elif key in _POSITIVE and value < 1:
            problems.append(f"{key} must be >= 1, got {value}")
        elif value < 0:
            problems.append(f"{key} must be >= 0, got {value}")
    kappa = cfg.get("kappa")
    if not isinstance(kappa, (int, float)) or not 0 <= kappa < 2:
        problems.append(
            f"kappa={kappa!r} violates the FAR(1) stationarity bound 0 <= kappa < 2"
        )
    if _is_int(cfg.get("d")) and cfg["d"] % 2 == 0:
        problems.append(f"d must be odd (Fourier basis size), got {cfg['d']}")
    if _is_int(cfg.get("n_basis")) and cfg["n_basis"] % 2 == 0:
        problems.append(f"n_basis must be odd (Fourier basis size), got {cfg['n_basis']}")
    if not isinstance(cfg.get("epsilon"), (int, float)) or not cfg["epsilon"] > 0:
        problems.append(f"epsilon must be > 0, got {cfg.get('epsilon')!r}")
    if cfg.get("basis") not in ("fourier", "bspline"):
        problems.append(f"basis must be 'fourier' or 'bspline', got {cfg.get('basis')!r}")
    if cfg.get("smooth_basis") not in (None, "fourier", "bspline"):
        problems.append(f"smooth_basis must be 'fourier' or 'bspline', got {cfg.get('smooth_basis')!r}")
    if (cfg.get("smooth_basis") is None) != (cfg.get("smooth_size") is None):
        problems.append("smooth_basis and smooth_size must be given together")
    if cfg.get("layout") not in ("time_by_grid", "grid_by_time"):
        problems.append(f"layout must be 'time_by_grid' or 'grid_by_time', got {cfg.get('layout')!r}")
    if isinstance(cfg.get("a"), (int, float)) and isinstance(cfg.get("b"), (int, float)):
        if not cfg["a"] < cfg["b"]:
            problems.append(f"grid bounds must satisfy a < b, got a={cfg['a']}, b={cfg['b']}")
    methods = [x for x in str(cfg.get("methods", "")).split(",") if x]
    if not methods or set(methods) - {"gdfpca", "fpca"}:
        problems.append(f"methods must be a comma list drawn from gdfpca,fpca, got {cfg.get('methods')!r}")
    dgp = cfg.get("dgp")
    if dgp is not None and dgp not in ("far1", "vari11", "dfm", "factor"):
        problems.append(f"dgp must be one of far1, vari11, dfm, factor; got {dgp!r}")

    if command == "simulate":
        if dgp is None:
            problems.append("simulate requires --dgp")
        if not cfg.get("out"):
            problems.append("simulate requires --out")
        if cfg.get("input") is not None:
            problems.append("--in conflicts with simulate (it writes data, it does not read it)")
    elif command == "fit":
        if cfg.get("input") is None:
            problems.append("fit requires --in")
        if dgp is not None:
            problems.append("--dgp conflicts with --in for fit; fit works on a data file")
    elif command == "compare":
        if (dgp is None) == (cfg.get("input") is None):
            problems.append("compare needs exactly one of --dgp or --in")
    if problems:
        raise ConfigError(problems)
    return cfg


def _dgp_config(cfg):
    return DgpConfig(
        dgp=cfg["dgp"],
        n=cfg["n"],
        d=cfg["d"],
        kappa=float(cfg["kappa"]),
        burn_in=cfg["burn_in"],
        m=cfg["m"],
        n_basis=cfg["n_basis"],
        r=cfg["r"],
        q=cfg["q"],
        lags=cfg["lags"],
        noise_sd=float(cfg["noise_sd"]),
        grid_size=cfg["grid_size"],
        truncation=cfg["basis_size"],
        K=cfg["K"],
        epsilon=float(cfg["epsilon"]),
        max_iter=cfg["max_iter"],
    )


def _dataset_spec(cfg):
    return DatasetSpec(
        path=cfg["input"],
        layout=cfg["layout"],
        a=float(cfg["a"]),
        b=float(cfg["b"]),
        center=bool(cfg["center"]),
        scale=bool(cfg["scale"]),
        log_return=bool(cfg["log_return"]),
        smooth_kind=cfg["smooth_basis"],
        smooth_size=cfg["smooth_size"],
        smooth_order=cfg["order"],
        resample_size=cfg["resample_size"],
    )


def _numba_version():
    try:
        import numba
    except ImportError:
        return None
    return numba.__version__


def _metadata(cfg, command):
    import scipy

    return {
        "command": command,
        "seed": cfg["seed"],
        "config": {k: cfg[k] for k in sorted(cfg)},
        "versions": {
            "gdfpca": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": _numba_version(),
            "kernel_backend": _kernels.BACKEND,
        },
    }


def _check_finite(obj, where="report"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"non-finite value in {where}")


def _write_json(path, payload):
    _check_finite(payload)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_ev_table(path, table, p_list):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + [f"p={p}" for p in p_list])
        for method, row in table.items():
            writer.writerow([method] + [repr(float(row[p])) for p in p_list])


def _basis_for(cfg, grid, default_size):
    size = cfg["basis_size"] or default_size
    return make_basis(cfg["basis"], size, grid, order=cfg["order"])


def _fit_config(cfg):
    return FitConfig(K=cfg["K"], epsilon=float(cfg["epsilon"]), max_iter=cfg["max_iter"])


def run_simulate(cfg):
    """Write one replication of a simulation design to ``cfg['out']``."""
    validate_config(cfg, "simulate")
    series = generate(_dgp_config(cfg), cfg["seed"], cfg["replication"])
    write_curves_csv(cfg["out"], series.values)
    return series


def _model_payload(model):
    curves = loading_curves(model)
    return {
        "m": model.m,
        "K": model.K,
        "basis": model.basis.kind,
        "grid": model.basis.grid.points.tolist(),
        "components": [
            {
                "factor": c.f.tolist(),
                "beta": c.beta.tolist(),
                "alpha": c.alpha.tolist(),
                "alpha_curve": curves.alpha_curves[k].tolist(),
                "beta_curves": curves.beta_curves[k].tolist(),
                "iterations": c.iterations,
                "converged": c.converged,
            }
            for k, c in enumerate(model.components)
        ],
    }


def run_fit(cfg):
    """Fit GDFPCA to a data file; write ``model.json``, ``report.json``,
    ``explained_variance.csv`` and, if requested, ``reconstruction.csv``."""
    validate_config(cfg, "fit")
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    series = load_fts_csv(_dataset_spec(cfg))
    basis = _basis_for(cfg, series.grid, default_size=cfg["smooth_size"] or _default_size(series, cfg))
    p_list = list(range(1, cfg["p"] + 1))
    fit_config = _fit_config(cfg)
    model = fit_fgdpca(series, basis, cfg["p"], fit_config)
    methods = [x for x in cfg["methods"].split(",") if x]
    records, traces = evaluate_methods(series, basis, methods, p_list, fit_config)

    report = _metadata(cfg, "fit")
    report.update({"n": series.n, "grid_points": series.grid.size, "results": records, "mse_traces": traces})
    _write_json(out / "report.json", report)
    _write_json(out / "model.json", _model_payload(model))
    _write_ev_table(out / "explained_variance.csv", _ev_table(records, methods, p_list), p_list)
    if cfg["reconstruction"]:
        write_curves_csv(out / "reconstruction.csv", reconstruct_functional(model).values)
    return report


def _default_size(series, cfg):
    # largest odd count not exceeding min(15, G) for Fourier, else min(15, G)
    size = min(15, series.grid.size)
    if cfg["basis"] == "fourier" and size % 2 == 0:
        size -= 1
    return size


def _ev_table(records, methods, p_list):
    table = {}
    for method in methods:
        table[method] = {}
        for p in p_list:
            vals = [r["explained_variance"] for r in records if r["method"] == method and r["p"] == p]
            table[method][p] = float(np.median(vals)) if vals else float("nan")
    return table


def run_compare(cfg):
    """Replication study on a simulation design, or a one-shot comparison on
    a data file. Writes ``report.json``, ``explained_variance.csv`` and,
    for simulations, ``boxplot_data.csv``."""
    validate_config(cfg, "compare")
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    methods = [x for x in cfg["methods"].split(",") if x]
    p_list = list(range(1, cfg["p"] + 1))
    report = _metadata(cfg, "compare")

    if cfg["dgp"] is not None:
        summary = run_replications(_dgp_config(cfg), methods, p_list, cfg["reps"], cfg["seed"])
        report.update(
            {
                "replications": summary.replications,
                "failures": summary.failures,
                "results": summary.records,
                "summary": [
                    {"method": meth, "p": p, **{key: val for key, val in st.items()}}
                    for (meth, p), st in sorted(summary.stats.items())
                ],
            }
        )
        with open(out / "boxplot_data.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["replication", "method", "p", "mse", "explained_variance"])
            for rec in summary.records:
                writer.writerow(
                    [rec["replication"], rec["method"], rec["p"], repr(rec["mse"]), repr(rec["explained_variance"])]
                )
        records = summary.records
    else:
        series = load_fts_csv(_dataset_spec(cfg))
        basis = _basis_for(cfg, series.grid, default_size=cfg["smooth_size"] or _default_size(series, cfg))
        records, traces = evaluate_methods(series, basis, methods, p_list, _fit_config(cfg))
        report.update({"n": series.n, "results": records, "mse_traces": traces})

    table = _ev_table(records, methods, p_list)
    report["explained_variance_table"] = {meth: {str(p): v for p, v in row.items()} for meth, row in table.items()}
    _write_json(out / "report.json", report)
    _write_ev_table(out / "explained_variance.csv", table, p_list)
    return report


def load_config_file(path):
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise ConfigError([f"config file {path} must hold a flat JSON object"])
    return data
