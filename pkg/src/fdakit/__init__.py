"""Functional data analysis toolkit.

Turns discretely sampled curves into basis-expansion functional data and
provides the standard pipelines on top: mean and covariance estimation,
functional principal component analysis, scalar-on-function regression,
functional K-means clustering with silhouette model selection, spatial
hotspot scanning, and a seeded synthetic curve generator. A batch CLI
(``fdakit``) exposes the same pipelines on CSV inputs.
"""

__version__ = "0.1.0"

from .basis import (
    BasisSystem,
    EvalGrid,
    bspline_basis,
    design_matrix,
    evaluate,
    fourier_basis,
    gram_matrix,
    gram_sqrt,
    uniform_grid,
)
from .clustering import ClusterResult, fkmeans, select_g, silhouette_score
from .exceptions import (
    ConvergenceError,
    DataError,
    DomainError,
    FdaError,
    NumericalError,
    RankError,
)
from .fpca import FpcaResult, explained_variance, fpca, reconstruct
from .moments import (
    CenteredDataSet,
    MeanFunction,
    apply_cov_operator,
    center,
    covariance_on_grid,
    mean_function,
)
from .regression import RegressionFit, beta_function, fit_flm, fit_gflm, predict
from .scan import (
    ScanResult,
    SpatialFunctionalDataSet,
    detect_cluster,
    enumerate_windows,
    window_statistic,
)
from .simulate import simulate_curves
from .smoothing import (
    FunctionalDataSet,
    RawCurve,
    build_dataset,
    eval_curves,
    fit_coefficients,
)

__all__ = [
    "__version__",
    "BasisSystem",
    "EvalGrid",
    "bspline_basis",
    "design_matrix",
    "evaluate",
    "fourier_basis",
    "gram_matrix",
    "gram_sqrt",
    "uniform_grid",
    "RawCurve",
    "FunctionalDataSet",
    "fit_coefficients",
    "build_dataset",
    "eval_curves",
    "MeanFunction",
    "CenteredDataSet",
    "mean_function",
    "center",
    "covariance_on_grid",
    "apply_cov_operator",
    "FpcaResult",
    "fpca",
    "explained_variance",
    "reconstruct",
    "RegressionFit",
    "fit_flm",
    "fit_gflm",
    "beta_function",
    "predict",
    "ClusterResult",
    "fkmeans",
    "silhouette_score",
    "select_g",
    "SpatialFunctionalDataSet",
    "ScanResult",
    "enumerate_windows",
    "window_statistic",
    "detect_cluster",
    "simulate_curves",
    "FdaError",
    "DomainError",
    "DataError",
    "RankError",
    "NumericalError",
    "ConvergenceError",
]
