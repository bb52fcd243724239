"""Synthetic curve generation from a truncated orthonormal expansion.

Curves are drawn as mean plus independent standard-normal scores scaled
by the square roots of prescribed component variances, expanded over the
leading functions of an orthonormal Fourier system, plus optional white
observation noise. Because the component functions are orthonormal, the
prescribed variances are exactly the population principal component
variances, which makes the generator a convenient ground truth for
estimator checks.
"""

import numpy as np

from .basis import FOURIER, BasisSystem, EvalGrid, evaluate


def simulate_curves(
    basis: BasisSystem,
    mean_coeffs: np.ndarray,
    variances: np.ndarray,
    n_curves: int,
    grid: EvalGrid,
    noise_sd: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Draw n curves on a grid from the component model.

    Parameters
    ----------
    basis : BasisSystem
        Must be a Fourier system (its functions are orthonormal, which
        is what ties `variances` to the component structure).
    mean_coeffs : array of shape (n_basis,)
        Basis coefficients of the mean curve.
    variances : array of shape (J,)
        Component variances, nonincreasing and nonnegative, J <= n_basis.
        The j-th component function is the j-th basis function.
    n_curves : int
    grid : EvalGrid
        Observation times shared by all curves.
    noise_sd : float
        Standard deviation of additive i.i.d. observation noise.
    seed : int

    Returns
    -------
    np.ndarray of shape (n_curves, len(grid))
        One simulated curve per row; deterministic for a given seed.
    """
    if basis.kind != FOURIER:
        raise ValueError("the component functions are the orthonormal Fourier basis")
    lam = np.asarray(variances, dtype=float)
    if lam.ndim != 1 or lam.size < 1:
        raise ValueError("variances must be a nonempty 1-d sequence")
    if np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ValueError("variances must be nonincreasing and nonnegative")
    if lam.size > basis.n_basis:
        raise ValueError(
            f"{lam.size} components exceed the basis size {basis.n_basis}"
        )
    mu = np.asarray(mean_coeffs, dtype=float)
    if mu.shape != (basis.n_basis,):
        raise ValueError(
            f"mean_coeffs must have length {basis.n_basis}, got shape {mu.shape}"
        )
    if n_curves < 1:
        raise ValueError("n_curves must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")

    rng = np.random.default_rng(seed)
    scores = rng.standard_normal((n_curves, lam.size)) * np.sqrt(lam)
    phi = evaluate(basis, grid)
    values = mu @ phi.T + scores @ phi[:, : lam.size].T
    if noise_sd > 0:
        values = values + noise_sd * rng.standard_normal(values.shape)
    return values
