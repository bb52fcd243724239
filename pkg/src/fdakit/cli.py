"""Batch command-line front end.

One subcommand per pipeline: ``smooth``, ``fpca``, ``regress``,
``cluster``, ``scan``, ``simulate``. Inputs are CSV files, outputs are
CSV/JSON (plus an optional SVG plot), and every output embeds
provenance: command, parameters, seed, and toolkit version. Exit codes:
0 success, 2 usage error, 3 data error, 4 numerical error.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BSPLINE, bspline_basis, fourier_basis, uniform_grid
from .clustering import select_g
from .exceptions import DataError, DomainError, FdaError, NumericalError
from .fpca import explained_variance, fpca
from .io import (
    ingest_curves,
    provenance_lines,
    read_keyed_columns,
    write_curves_csv,
    write_dataset_csv,
    write_json,
    write_table_csv,
)
from .regression import beta_function, fit_gflm
from .scan import SpatialFunctionalDataSet, detect_cluster
from .simulate import simulate_curves
from .smoothing import build_dataset, eval_curves

PLOT_POINTS = 101


@dataclass
class RunConfig:
    """Everything one batch invocation needs, already validated by argparse."""

    command: str
    out: Path
    seed: int = 0
    plot: bool = False
    curves: Path | None = None
    response: Path | None = None
    covariates: Path | None = None
    coords: Path | None = None
    basis: str = BSPLINE
    k: int = 15
    order: int = 4
    domain: tuple[float, float] = (0.0, 1.0)
    ridge: float = 0.0
    p: int | None = None
    link: str = "identity"
    g_min: int = 2
    g_max: int = 6
    n_restarts: int = 10
    max_iter: int = 100
    max_fraction: float = 0.5
    n_perm: int = 999
    n: int = 100
    lambdas: tuple[float, ...] = (1.0,)
    mean_coeffs: tuple[float, ...] | None = None
    grid_points: int = 101
    noise_sd: float = 0.0
    params: dict = field(default_factory=dict)


def _parse_domain(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"domain must look like lo:hi, got {text!r}")
    try:
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric domain bounds in {text!r}") from None


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_basis_flags(sub):
    sub.add_argument("--basis", choices=["bspline", "fourier"], default="bspline",
                     help="basis family for smoothing (default bspline)")
    sub.add_argument("--k", type=int, default=15,
                     help="number of basis functions (default 15)")
    sub.add_argument("--order", type=int, default=4,
                     help="B-spline order, 4 = cubic (default 4)")
    sub.add_argument("--domain", type=_parse_domain, default=(0.0, 1.0),
                     metavar="LO:HI", help="curve domain (default 0:1)")
    sub.add_argument("--ridge", type=float, default=0.0,
                     help="ridge penalty for per-curve fits (default 0)")


def _add_common_flags(sub, needs_curves=True):
    if needs_curves:
        sub.add_argument("--curves", type=Path, required=True,
                         help="long-format curve CSV (id,t,value)")
    sub.add_argument("--out", type=Path, required=True, help="output directory")
    sub.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub.add_argument("--plot", action="store_true", help="also write curves.svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdakit",
        description="Batch functional data analysis on long-format curve CSVs.",
    )
    parser.add_argument("--version", action="version", version=f"fdakit {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("smooth", help="fit curves to a basis, emit coefficients")
    _add_common_flags(sub)
    _add_basis_flags(sub)

    sub = commands.add_parser("fpca", help="principal component decomposition")
    _add_common_flags(sub)
    _add_basis_flags(sub)
    sub.add_argument("--p", type=int, default=None,
                     help="components to retain (default: 95%% variance rule)")

    sub = commands.add_parser("regress", help="scalar-on-function regression")
    _add_common_flags(sub)
    _add_basis_flags(sub)
    sub.add_argument("--response", type=Path, required=True,
                     help="response CSV keyed by curve id (id,y)")
    sub.add_argument("--covariates", type=Path, default=None,
                     help="optional scalar covariate CSV keyed by id")
    sub.add_argument("--link", choices=["identity", "log", "logit"],
                     default="identity")
    sub.add_argument("--p", type=int, default=None,
                     help="truncation order (default: 95%% variance rule)")

    sub = commands.add_parser("cluster", help="functional K-means with silhouette selection")
    _add_common_flags(sub)
    _add_basis_flags(sub)
    sub.add_argument("--g-min", type=int, required=True)
    sub.add_argument("--g-max", type=int, required=True)
    sub.add_argument("--n-restarts", type=int, default=10)
    sub.add_argument("--max-iter", type=int, default=100)

    sub = commands.add_parser("scan", help="spatial hotspot detection")
    _add_common_flags(sub)
    _add_basis_flags(sub)
    sub.add_argument("--coords", type=Path, required=True,
                     help="coordinate CSV keyed by curve id (id,x,y)")
    sub.add_argument("--max-fraction", type=float, default=0.5,
                     help="largest window size as a fraction of n (default 0.5)")
    sub.add_argument("--n-perm", type=int, default=999,
                     help="permutation replicates (default 999)")

    sub = commands.add_parser("simulate", help="draw synthetic curves from a component model")
    _add_common_flags(sub, needs_curves=False)
    sub.add_argument("--n", type=int, required=True, help="number of curves")
    sub.add_argument("--k", type=int, default=5,
                     help="Fourier basis size, odd (default 5)")
    sub.add_argument("--domain", type=_parse_domain, default=(0.0, 1.0), metavar="LO:HI")
    sub.add_argument("--lambdas", type=_parse_floats, default=(1.0,),
                     metavar="L1,L2,...", help="component variances, nonincreasing")
    sub.add_argument("--mean-coeffs", type=_parse_floats, default=None,
                     metavar="C1,C2,...", help="mean coefficients (default zeros)")
    sub.add_argument("--grid-points", type=int, default=101)
    sub.add_argument("--noise-sd", type=float, default=0.0)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if k != "version" and v is not None}
    config = RunConfig(**fields)
    params = {
        k: v for k, v in vars(args).items()
        if k not in {"command", "out", "seed", "plot"} and v is not None
    }
    config.params = {
        k: (str(v) if isinstance(v, Path) else list(v) if isinstance(v, tuple) else v)
        for k, v in sorted(params.items())
    }
    return config


def _check_inputs_exist(config: RunConfig):
    for attr in ("curves", "response", "covariates", "coords"):
        path = getattr(config, attr)
        if path is not None and not Path(path).is_file():
            raise FileNotFoundError(f"{attr} file not found: {path}")


def _make_basis(config: RunConfig):
    if config.basis == BSPLINE:
        return bspline_basis(config.k, config.domain, order=config.order)
    return fourier_basis(config.k, config.domain)


def _load_dataset(config: RunConfig):
    curves = ingest_curves(config.curves)
    return build_dataset(curves, _make_basis(config), ridge=config.ridge)


def _provenance(config: RunConfig) -> list[str]:
    return provenance_lines(config.command, config.params, config.seed)


def _plot(config: RunConfig, ds, labels=None, label_names=None):
    if not config.plot:
        return
    from .plotting import plot_curves_svg

    grid = uniform_grid(ds.basis.domain, PLOT_POINTS)
    plot_curves_svg(
        config.out / "curves.svg",
        grid.points,
        eval_curves(ds, grid),
        labels=labels,
        label_names=label_names,
        title=f"fdakit {config.command}",
    )


def run(config: RunConfig) -> None:
    """Execute one batch command, writing its outputs under config.out."""
    _check_inputs_exist(config)
    config.out.mkdir(parents=True, exist_ok=True)
    handler = {
        "smooth": _run_smooth,
        "fpca": _run_fpca,
        "regress": _run_regress,
        "cluster": _run_cluster,
        "scan": _run_scan,
        "simulate": _run_simulate,
    }[config.command]
    handler(config)


def _run_smooth(config: RunConfig):
    ds = _load_dataset(config)
    write_dataset_csv(config.out / "coefficients.csv", ds, _provenance(config))
    _plot(config, ds)


def _run_fpca(config: RunConfig):
    ds = _load_dataset(config)
    result = fpca(ds, config.p)
    ratios = explained_variance(result)
    prov = _provenance(config)
    write_dataset_csv(config.out / "coefficients.csv", ds, prov)
    write_table_csv(
        config.out / "eigenvalues.csv",
        ["component", "eigenvalue", "explained_variance_ratio"],
        [(j + 1, float(result.eigenvalues[j]), float(ratios[j]))
         for j in range(result.n_components)],
        prov,
    )
    write_table_csv(
        config.out / "scores.csv",
        ["id"] + [f"score_{j + 1}" for j in range(result.n_components)],
        [[ds.ids[i]] + [float(s) for s in result.scores[i]] for i in range(ds.n_curves)],
        prov,
    )
    write_json(
        config.out / "fpca.json",
        {
            "n_components": result.n_components,
            "eigenvalues": result.eigenvalues,
            "explained_variance_ratio": ratios,
            "total_variance": result.total_variance,
            "mean_coefficients": result.mean.coefficients,
            "eigen_coefficients": result.eigen_coeffs,
            "ids": list(ds.ids),
        },
        config.command,
        config.params,
        config.seed,
    )
    _plot(config, ds)


def _run_regress(config: RunConfig):
    ds = _load_dataset(config)
    response = read_keyed_columns(config.response, ds.ids, n_columns=1)[:, 0]
    covariates = None
    if config.covariates is not None:
        covariates = read_keyed_columns(config.covariates, ds.ids)
    fit = fit_gflm(ds, covariates, response, config.p, link=config.link)
    grid = uniform_grid(ds.basis.domain, PLOT_POINTS)
    write_json(
        config.out / "fit.json",
        {
            "link": fit.link,
            "alpha": fit.alpha,
            "theta": fit.theta,
            "d_coeffs": fit.d_coeffs,
            "dispersion": fit.dispersion,
            "std_errors": fit.std_errors,
            "n_components": fit.fpca.n_components,
            "eigenvalues": fit.fpca.eigenvalues,
            "deviance_path": fit.deviance_path,
            "beta_grid": grid.points,
            "beta_values": beta_function(fit, grid),
        },
        config.command,
        config.params,
        config.seed,
    )
    _plot(config, ds)


def _run_cluster(config: RunConfig):
    ds = _load_dataset(config)
    best_g, results = select_g(
        ds,
        config.g_min,
        config.g_max,
        n_restarts=config.n_restarts,
        max_iter=config.max_iter,
        seed=config.seed,
    )
    best = results[best_g - config.g_min]
    prov = _provenance(config)
    write_table_csv(
        config.out / "assignments.csv",
        ["id", "label"],
        [(ds.ids[i], int(best.assignments[i])) for i in range(ds.n_curves)],
        prov,
    )
    write_table_csv(
        config.out / "silhouette.csv",
        ["n_clusters", "silhouette", "inertia", "n_iter"],
        [(r.n_clusters, float(r.silhouette), float(r.inertia), r.n_iter)
         for r in results],
        prov,
    )
    _plot(config, ds, labels=best.assignments)


def _run_scan(config: RunConfig):
    ds = _load_dataset(config)
    coords = read_keyed_columns(config.coords, ds.ids, n_columns=2)
    sds = SpatialFunctionalDataSet(ds=ds, coords=coords)
    result = detect_cluster(
        sds,
        config.max_fraction,
        n_perm=config.n_perm,
        seed=config.seed,
    )
    inside = np.zeros(ds.n_curves, dtype=int)
    inside[list(result.window)] = 1
    prov = _provenance(config)
    write_json(
        config.out / "scan.json",
        {
            "window_ids": [ds.ids[i] for i in result.window],
            "center_id": ds.ids[result.center_index],
            "radius": result.radius,
            "statistic": result.statistic,
            "p_value": result.p_value,
            "n_perm": result.n_perm,
        },
        config.command,
        config.params,
        config.seed,
    )
    write_table_csv(
        config.out / "window.csv",
        ["id", "in_window"],
        [(ds.ids[i], int(inside[i])) for i in range(ds.n_curves)],
        prov,
    )
    _plot(config, ds, labels=inside,
          label_names={0: "outside", 1: "inside"})


def _run_simulate(config: RunConfig):
    basis = fourier_basis(config.k, config.domain)
    mean = (
        np.asarray(config.mean_coeffs, dtype=float)
        if config.mean_coeffs is not None
        else np.zeros(config.k)
    )
    grid = uniform_grid(config.domain, config.grid_points)
    values = simulate_curves(
        basis,
        mean,
        np.asarray(config.lambdas),
        config.n,
        grid,
        noise_sd=config.noise_sd,
        seed=config.seed,
    )
    width = len(str(config.n))
    ids = [f"c{i + 1:0{width}d}" for i in range(config.n)]
    write_curves_csv(
        config.out / "curves.csv", ids, grid.points, values, _provenance(config)
    )
    if config.plot:
        from .plotting import plot_curves_svg

        plot_curves_svg(config.out / "curves.svg", grid.points, values,
                        title="fdakit simulate")


def main(argv=None) -> int:
    """Entry point; returns the process exit code instead of raising."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    config = _config_from_args(args)
    try:
        run(config)
    except (DomainError, DataError, FileNotFoundError) as exc:
        print(f"fdakit {config.command}: data error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"fdakit {config.command}: invalid arguments: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FdaError) as exc:
        print(f"fdakit {config.command}: numerical error: {exc}", file=sys.stderr)
        return 4
    return 0


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
