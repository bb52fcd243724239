"""Empirical first and second moments of a functional sample.

Everything here works in coefficient space: the sample mean is the column
mean of the coefficient matrix, and the covariance structure is carried
entirely by the centered matrix A together with the basis Gram matrix, so
the covariance surface and the covariance operator never need a dense
standalone representation. Divisors are 1/n throughout.
"""

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, EvalGrid, evaluate
from .smoothing import FunctionalDataSet


@dataclass(frozen=True)
class MeanFunction:
    """Sample mean curve, stored as coefficients in the source basis."""

    basis: BasisSystem
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float)
        if coeffs.shape != (self.basis.n_basis,):
            raise ValueError("mean coefficients must have one entry per basis function")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    def values(self, grid: EvalGrid) -> np.ndarray:
        """Mean curve evaluated on a grid."""
        return evaluate(self.basis, grid) @ self.coefficients


@dataclass(frozen=True)
class CenteredDataSet:
    """Centered coefficient rows plus the mean they were centered around."""

    basis: BasisSystem
    centered: np.ndarray
    mean: MeanFunction

    def __post_init__(self):
        a = np.array(self.centered, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.basis.n_basis:
            raise ValueError("centered matrix must be n x n_basis")
        a.flags.writeable = False
        object.__setattr__(self, "centered", a)

    @property
    def n_curves(self) -> int:
        return self.centered.shape[0]


def mean_function(ds: FunctionalDataSet) -> MeanFunction:
    """Empirical mean curve: coefficient-wise average over the sample."""
    return MeanFunction(basis=ds.basis, coefficients=ds.coefficients.mean(axis=0))


def center(ds: FunctionalDataSet) -> CenteredDataSet:
    """Subtract the sample mean from every coefficient row."""
    mean = mean_function(ds)
    return CenteredDataSet(
        basis=ds.basis,
        centered=ds.coefficients - mean.coefficients,
        mean=mean,
    )


def covariance_on_grid(
    cds: CenteredDataSet, s_grid: EvalGrid, t_grid: EvalGrid
) -> np.ndarray:
    """Empirical covariance surface on a pair of grids.

    Entry (l, m) is the covariance between curve values at ``t_grid[l]``
    and ``s_grid[m]``, computed as ``phi(t_l) (A' A / n) phi(s_m)'``. With
    equal grids the result is symmetric positive semi-definite.
    """
    phi_t = evaluate(cds.basis, t_grid)
    phi_s = evaluate(cds.basis, s_grid)
    a = cds.centered
    gram_a = (a.T @ a) / cds.n_curves
    return phi_t @ gram_a @ phi_s.T


def apply_cov_operator(cds: CenteredDataSet, w: np.ndarray, f_coeffs: np.ndarray) -> np.ndarray:
    """Apply the empirical covariance operator to a function.

    `f_coeffs` are the coefficients of the input function in the dataset
    basis; the result is the coefficient vector of the operator image,
    ``(A' A / n) W f``.
    """
    f = np.asarray(f_coeffs, dtype=float)
    k = cds.basis.n_basis
    if f.shape != (k,):
        raise ValueError(f"f_coeffs must have length {k}, got shape {f.shape}")
    w = np.asarray(w, dtype=float)
    if w.shape != (k, k):
        raise ValueError(f"Gram matrix must be {k} x {k}, got {w.shape}")
    a = cds.centered
    return (a.T @ (a @ (w @ f))) / cds.n_curves
