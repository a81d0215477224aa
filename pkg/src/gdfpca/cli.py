"""Command-line interface: ``gdfpca {simulate,fit,compare}``.

Settings come from three layers, later ones winning: built-in defaults,
an optional flat JSON ``--config`` file (keys as listed in
``gdfpca.harness.DEFAULTS``), and explicit flags.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import ConfigError, GdfpcaError
from .harness import DEFAULTS, load_config_file, run_compare, run_fit, run_simulate

S = argparse.SUPPRESS


def _common(p):
    p.add_argument("--seed", type=int, default=S, help="master random seed (default 0)")
    p.add_argument("--config", default=S, help="flat JSON file of settings; flags override it")
    p.add_argument("--out-dir", dest="out_dir", default=S, help="directory for report files (default .)")


def _dgp_flags(p, panel_m=True):
    g = p.add_argument_group("simulation design")
    g.add_argument("--dgp", choices=["far1", "vari11", "dfm", "factor"], default=S, help="data-generating process")
    g.add_argument("--d", type=int, default=S, help="FAR(1): number of Fourier coefficients, odd (default 15)")
    g.add_argument("--kappa", type=float, default=S, help="FAR(1): transition norm parameter, 0 <= kappa < 2 (default 0.3)")
    g.add_argument("--n", type=int, default=S, help="series length n (T for vari11/dfm) (default 300)")
    g.add_argument("--burn-in", dest="burn_in", type=int, default=S, help="FAR(1): discarded warm-up draws (default 200)")
    if panel_m:
        g.add_argument("--m", type=int, default=S, help="vari11/dfm: panel dimension (default 50)")
    g.add_argument("--n-basis", dest="n_basis", type=int, default=S,
                   help="Fourier functions used to smooth panels / build factor curves, odd (default 21)")
    g.add_argument("--r", type=int, default=S, help="dfm: static factors (default 6)")
    g.add_argument("--q", type=int, default=S, help="dfm: dynamic shocks (default 2)")
    g.add_argument("--lags", type=int, default=S, help="factor: true lag count of the generating factor (default 0)")
    g.add_argument("--noise-sd", dest="noise_sd", type=float, default=S, help="factor: score noise sd (default 0)")
    g.add_argument("--grid-size", dest="grid_size", type=int, default=S, help="points on [0,1] (default 101)")


def _data_flags(p):
    g = p.add_argument_group("data file")
    g.add_argument("--in", dest="input", default=S, help="CSV of curves")
    g.add_argument("--layout", choices=["time_by_grid", "grid_by_time"], default=S,
                   help="rows are curves (time_by_grid, default) or columns are curves")
    g.add_argument("--a", type=float, default=S, help="left end of the curve domain (default 0)")
    g.add_argument("--b", type=float, default=S, help="right end of the curve domain (default 1)")
    g.add_argument("--center", action=argparse.BooleanOptionalAction, default=S, help="remove the mean curve")
    g.add_argument("--scale", action=argparse.BooleanOptionalAction, default=S, help="unit variance per grid point")
    g.add_argument("--log-return", dest="log_return", action=argparse.BooleanOptionalAction, default=S,
                   help="replace curves by differenced logs (n shrinks by one)")
    g.add_argument("--smooth-basis", dest="smooth_basis", choices=["fourier", "bspline"], default=S,
                   help="least-squares smooth the raw curves onto this basis")
    g.add_argument("--smooth-size", dest="smooth_size", type=int, default=S, help="size of the smoothing basis")
    g.add_argument("--resample-size", dest="resample_size", type=int, default=S,
                   help="grid points after smoothing (default 101)")


def _fit_flags(p, m_is_basis):
    g = p.add_argument_group("fitting")
    g.add_argument("--basis", choices=["fourier", "bspline"], default=S, help="truncation basis (default fourier)")
    if m_is_basis:
        g.add_argument("--m", dest="basis_size", type=int, default=S, help="truncation dimension (basis size)")
    else:
        g.add_argument("--basis-size", dest="basis_size", type=int, default=S,
                       help="truncation dimension (default: the generating basis size)")
    g.add_argument("--order", type=int, default=S, help="B-spline order (default 4)")
    g.add_argument("--K", type=int, default=S, help="lags per component (default 10)")
    g.add_argument("--p", type=int, default=S, help="components; results for 1..p (default 3)")
    g.add_argument("--epsilon", type=float, default=S, help="relative-improvement stopping threshold (default 1e-6)")
    g.add_argument("--max-iter", dest="max_iter", type=int, default=S, help="iteration cap per component (default 500)")
    g.add_argument("--methods", default=S, help="comma list from gdfpca,fpca (default both)")


def build_parser():
    parser = argparse.ArgumentParser(prog="gdfpca", description="Generalized dynamic functional PCA: simulate, fit and compare.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write one simulated functional time series to CSV")
    _common(sim)
    _dgp_flags(sim)
    sim.add_argument("--replication", type=int, default=S, help="random stream index (default 0)")
    sim.add_argument("--out", default=S, help="output CSV path (one curve per row)")

    fit = sub.add_parser("fit", help="fit GDFPCA to a CSV of curves")
    _common(fit)
    _data_flags(fit)
    _fit_flags(fit, m_is_basis=True)
    fit.add_argument("--reconstruction", action=argparse.BooleanOptionalAction, default=S,
                     help="also write reconstruction.csv")

    cmp_ = sub.add_parser("compare", help="compare GDFPCA with FPCA on a design (replicated) or a data file")
    _common(cmp_)
    _dgp_flags(cmp_)
    _data_flags(cmp_)
    _fit_flags(cmp_, m_is_basis=False)
    cmp_.add_argument("--reps", type=int, default=S, help="replications for simulation designs (default 50)")
    return parser


def parse_config(argv=None):
    """Parse ``argv`` into a merged, validated config dict and the command."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    verbose = ns.pop("verbose")
    cfg = dict(DEFAULTS)
    if "config" in ns:
        cfg.update(load_config_file(ns.pop("config")))
    cfg.update(ns)
    return command, cfg, verbose


standardize_cli = parse_config

RUNNERS = {"simulate": run_simulate, "fit": run_fit, "compare": run_compare}


def main(argv=None):
    try:
        command, cfg, verbose = parse_config(argv)
    except SystemExit as stop:  # argparse: usage errors and --help
        return stop.code
    except ConfigError as err:
        print(f"gdfpca: {err}", file=sys.stderr)
        return 2
    try:
        logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
        RUNNERS[command](cfg)
    except ConfigError as err:
        print(f"gdfpca: {err}", file=sys.stderr)
        return 2
    except (GdfpcaError, ValueError, OSError) as err:
        print(f"gdfpca: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
