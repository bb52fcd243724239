"""Scalar-on-function regression through a principal component truncation.

The functional covariate enters the linear predictor through its leading
principal component scores, so the infinite-dimensional coefficient
function is estimated inside the span of the first few eigenfunctions.
Identity-link models are plain least squares on the truncated design;
log and logit links are fitted by iteratively reweighted least squares
with step halving, so the deviance never increases between iterations.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, xlogy

from .basis import EvalGrid, gram_matrix
from .exceptions import ConvergenceError, RankError
from .fpca import FpcaResult, fpca
from .smoothing import FunctionalDataSet

LINKS = ("identity", "log", "logit")

_IRLS_MAX_ITER = 100
_IRLS_TOL = 1e-8
_MU_EPS = 1e-10


@dataclass(frozen=True)
class RegressionFit:
    """Fitted truncated model Y = g^-1(alpha + Z theta + scores . d).

    Attributes
    ----------
    alpha : float
        Intercept.
    theta : np.ndarray, shape (d,)
        Effects of the scalar covariates (empty when none were supplied).
    d_coeffs : np.ndarray, shape (n_components,)
        Effects of the principal component scores; these are also the
        coordinates of the coefficient function in the eigenfunction
        basis.
    fpca : FpcaResult
        Decomposition the scores came from.
    link : str
        One of ``identity``, ``log``, ``logit``.
    dispersion : float
        Residual variance for the identity link; fixed at 1.0 otherwise.
    std_errors : np.ndarray
        Standard errors for (alpha, theta, d), classical OLS / Fisher
        formulas.
    deviance_path : np.ndarray
        Deviance after each accepted reweighted step (a single entry for
        the identity link).
    """

    alpha: float
    theta: np.ndarray
    d_coeffs: np.ndarray
    fpca: FpcaResult
    link: str
    dispersion: float
    std_errors: np.ndarray
    deviance_path: np.ndarray

    def __post_init__(self):
        for name in ("theta", "d_coeffs", "std_errors", "deviance_path"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def fit_flm(
    ds: FunctionalDataSet,
    covariates: np.ndarray | None,
    response: np.ndarray,
    n_components: int | None = None,
) -> RegressionFit:
    """Fit the identity-link truncated functional linear model.

    Parameters
    ----------
    ds : FunctionalDataSet
        Functional covariate sample.
    covariates : np.ndarray of shape (n, d) or None
        Optional scalar covariates.
    response : np.ndarray of shape (n,)
    n_components : int, optional
        Truncation order; defaults to the 95%-variance rule.

    Raises
    ------
    ValueError
        On dimension mismatches or too few observations.
    RankError
        If the design [1 | Z | scores] is collinear.
    """
    return fit_gflm(ds, covariates, response, n_components, link="identity")


def fit_gflm(
    ds: FunctionalDataSet,
    covariates: np.ndarray | None,
    response: np.ndarray,
    n_components: int | None = None,
    link: str = "identity",
) -> RegressionFit:
    """Fit the truncated model under an identity, log, or logit link.

    The identity link reduces to ordinary least squares (a single
    reweighted step with unit weights). Log expects nonnegative
    responses (Poisson-style variance), logit binary 0/1 responses.
    Non-identity links iterate reweighted least squares until the
    relative coefficient change drops below 1e-8, raising
    :class:`ConvergenceError` after 100 iterations (complete separation
    in logit surfaces this way).
    """
    if link not in LINKS:
        raise ValueError(f"link must be one of {LINKS}, got {link!r}")
    y = np.asarray(response, dtype=float)
    n = ds.n_curves
    if y.shape != (n,):
        raise ValueError(f"response must have shape ({n},), got {y.shape}")
    z = _check_covariates(covariates, n)
    if link == "logit" and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logit link requires a 0/1 response")
    if link == "log" and np.any(y < 0):
        raise ValueError("log link requires a nonnegative response")

    decomposition = fpca(ds, n_components)
    scores = decomposition.scores
    p = decomposition.n_components
    d = z.shape[1]
    if n <= 1 + d + p:
        raise ValueError(
            f"need more than 1 + {d} + {p} observations to fit, got {n}"
        )
    design = np.column_stack([np.ones(n), z, scores])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankError(
            "design [intercept | covariates | scores] is collinear; "
            "drop redundant covariates or reduce the truncation order"
        )

    if link == "identity":
        coefs, dispersion, std_errors = _fit_ols(design, y)
        mu = design @ coefs
        deviance_path = np.array([_deviance(y, mu, link)])
    else:
        coefs, std_errors, deviance_path = _fit_irls(design, y, link)
        dispersion = 1.0

    return RegressionFit(
        alpha=float(coefs[0]),
        theta=coefs[1 : 1 + d],
        d_coeffs=coefs[1 + d :],
        fpca=decomposition,
        link=link,
        dispersion=dispersion,
        std_errors=std_errors,
        deviance_path=deviance_path,
    )


def _check_covariates(covariates, n: int) -> np.ndarray:
    if covariates is None:
        return np.empty((n, 0))
    z = np.asarray(covariates, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.ndim != 2 or z.shape[0] != n:
        raise ValueError(f"covariates must have {n} rows, got shape {z.shape}")
    return z


def _fit_ols(design: np.ndarray, y: np.ndarray):
    coefs, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coefs
    dof = design.shape[0] - design.shape[1]
    dispersion = float(resid @ resid) / dof
    cov = dispersion * np.linalg.pinv(design.T @ design)
    return coefs, dispersion, np.sqrt(np.diag(cov))


def _link_funcs(link: str):
    # Returns (inverse link, variance function, d mu / d eta).
    if link == "identity":
        return (lambda eta: eta, lambda mu: np.ones_like(mu), lambda mu: np.ones_like(mu))
    if link == "log":
        return (np.exp, lambda mu: mu, lambda mu: mu)
    return (expit, lambda mu: mu * (1.0 - mu), lambda mu: mu * (1.0 - mu))


def _deviance(y: np.ndarray, mu: np.ndarray, link: str) -> float:
    if link == "identity":
        return float(np.sum((y - mu) ** 2))
    if link == "log":
        return float(2.0 * np.sum(xlogy(y, y / mu) - (y - mu)))
    return float(-2.0 * np.sum(xlogy(y, mu) + xlogy(1.0 - y, 1.0 - mu)))


def _clip_mu(mu: np.ndarray, link: str) -> np.ndarray:
    if link == "log":
        return np.clip(mu, _MU_EPS, None)
    if link == "logit":
        return np.clip(mu, _MU_EPS, 1.0 - _MU_EPS)
    return mu


def _fit_irls(design: np.ndarray, y: np.ndarray, link: str):
    inv_link, var_func, dmu_deta = _link_funcs(link)
    if link == "log":
        eta = np.log(np.clip(y, 0.5, None))
    else:
        eta = np.log((y + 0.25) / (1.25 - y))
    mu = _clip_mu(inv_link(eta), link)
    coefs = None
    deviance = _deviance(y, mu, link)
    path = []

    for _ in range(_IRLS_MAX_ITER):
        slope = dmu_deta(mu)
        weights = slope**2 / var_func(mu)
        working = eta + (y - mu) / slope
        sqrt_w = np.sqrt(weights)
        new_coefs, _, _, _ = np.linalg.lstsq(
            design * sqrt_w[:, None], working * sqrt_w, rcond=None
        )

        # Step-halve toward the previous iterate if the deviance went up;
        # the very first step has no previous iterate and is accepted as is.
        step = 1.0
        for _ in range(30):
            trial = new_coefs if coefs is None else coefs + step * (new_coefs - coefs)
            trial_mu = _clip_mu(inv_link(design @ trial), link)
            trial_dev = _deviance(y, trial_mu, link)
            if coefs is None or trial_dev <= deviance * (1.0 + 1e-12):
                break
            step *= 0.5
        else:
            raise ConvergenceError(
                f"reweighted least squares stalled (deviance {deviance:g})"
            )

        converged = coefs is not None and (
            np.linalg.norm(trial - coefs)
            <= _IRLS_TOL * (1.0 + np.linalg.norm(coefs))
        )
        coefs = trial
        eta = design @ coefs
        mu = _clip_mu(inv_link(eta), link)
        deviance = trial_dev
        path.append(deviance)
        if converged:
            break
    else:
        raise ConvergenceError(
            "iteratively reweighted least squares did not converge in "
            f"{_IRLS_MAX_ITER} iterations (last deviance {deviance:g}); "
            "for a logit link this usually means separated classes"
        )

    slope = dmu_deta(mu)
    weights = slope**2 / var_func(mu)
    fisher = design.T @ (design * weights[:, None])
    std_errors = np.sqrt(np.diag(np.linalg.pinv(fisher)))
    return coefs, std_errors, np.array(path)


def beta_function(fit: RegressionFit, grid: EvalGrid) -> np.ndarray:
    """Coefficient function of the functional covariate on a grid."""
    return fit.fpca.eigenfunctions(grid) @ fit.d_coeffs


def predict(
    fit: RegressionFit,
    new_curves: FunctionalDataSet,
    covariates: np.ndarray | None = None,
) -> np.ndarray:
    """Predicted responses for new curves (and scalar covariates).

    New curves must share the training basis; their scores are taken
    against the training mean and eigenfunctions.
    """
    if new_curves.basis != fit.fpca.basis:
        raise ValueError("new curves must use the same basis as the training data")
    n = new_curves.n_curves
    z = _check_covariates(covariates, n)
    if z.shape[1] != fit.theta.size:
        raise ValueError(
            f"fit used {fit.theta.size} scalar covariates, got {z.shape[1]}"
        )
    w = gram_matrix(fit.fpca.basis)
    centered = new_curves.coefficients - fit.fpca.mean.coefficients
    scores = centered @ w @ fit.fpca.eigen_coeffs
    eta = fit.alpha + z @ fit.theta + scores @ fit.d_coeffs
    inv_link, _, _ = _link_funcs(fit.link)
    return inv_link(eta)
