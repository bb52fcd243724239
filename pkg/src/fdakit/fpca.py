"""Functional principal component analysis in coefficient space.

The infinite-dimensional eigenproblem of the covariance operator reduces
to an ordinary symmetric K x K eigenproblem once curves are basis
expansions: whiten the centered coefficients with the Gram-matrix square
root, eigendecompose their scaled cross-product, and map eigenvectors
back through the inverse square root to obtain eigenfunction coefficients.
Scores follow as inner products of centered curves with eigenfunctions.
"""

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, EvalGrid, evaluate, gram_matrix, gram_sqrt
from .exceptions import DataError, NumericalError
from .moments import MeanFunction, center
from .smoothing import FunctionalDataSet

# Cumulative explained-variance threshold for the default component count.
DEFAULT_VARIANCE_TARGET = 0.95

_NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class FpcaResult:
    """Eigenstructure of the empirical covariance operator.

    Attributes
    ----------
    basis : BasisSystem
        Basis of the analyzed dataset.
    mean : MeanFunction
        Sample mean the curves were centered around.
    eigenvalues : np.ndarray, shape (n_components,)
        Nonincreasing, nonnegative.
    eigen_coeffs : np.ndarray, shape (n_basis, n_components)
        Column j holds the basis coefficients of eigenfunction j; columns
        are orthonormal in the Gram-matrix inner product.
    scores : np.ndarray, shape (n_curves, n_components)
        Projection of each centered curve on each eigenfunction.
    total_variance : float
        Sum of all min(n, K) eigenvalues, retained or not.
    """

    basis: BasisSystem
    mean: MeanFunction
    eigenvalues: np.ndarray
    eigen_coeffs: np.ndarray
    scores: np.ndarray
    total_variance: float

    def __post_init__(self):
        for name in ("eigenvalues", "eigen_coeffs", "scores"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size

    def eigenfunctions(self, grid: EvalGrid) -> np.ndarray:
        """Eigenfunction values on a grid, one column per component."""
        return evaluate(self.basis, grid) @ self.eigen_coeffs


def fpca(ds: FunctionalDataSet, n_components: int | None = None) -> FpcaResult:
    """Principal component decomposition of a functional dataset.

    Parameters
    ----------
    ds : FunctionalDataSet
    n_components : int, optional
        Number of components to retain, between 1 and min(n, K). When
        omitted, the smallest count whose cumulative explained variance
        reaches 95% is used (1 for an all-constant dataset).

    Returns
    -------
    FpcaResult
        Eigenvalues sorted nonincreasing; each eigenfunction is scaled so
        its largest-magnitude coefficient is positive, which pins the
        otherwise arbitrary sign.

    Raises
    ------
    ValueError
        If `n_components` is outside [1, min(n, K)].
    NumericalError
        If the whitened cross-product has a significantly negative
        eigenvalue (should not happen for well-formed inputs).
    """
    n, k = ds.coefficients.shape
    max_components = min(n, k)
    cds = center(ds)
    w = gram_matrix(ds.basis)
    w_half, w_inv_half = gram_sqrt(w)

    z = cds.centered @ w_half
    cross = (z.T @ z) / n
    eigvals, eigvecs = np.linalg.eigh(cross)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]

    lam1 = eigvals[0] if eigvals.size else 0.0
    too_negative = eigvals < -_NEG_EIG_TOL * max(lam1, 0.0)
    if np.any(too_negative):
        raise NumericalError(
            f"covariance eigenproblem produced eigenvalue {eigvals.min():g} "
            "far below zero"
        )
    eigvals = np.clip(eigvals, 0.0, None)
    total_variance = float(eigvals[:max_components].sum())

    if n_components is None:
        n_components = _default_component_count(eigvals[:max_components], total_variance)
    if not 1 <= n_components <= max_components:
        raise ValueError(
            f"n_components must be in [1, {max_components}], got {n_components}"
        )

    coeffs = w_inv_half @ eigvecs[:, :n_components]
    coeffs = _fix_signs(coeffs)
    scores = cds.centered @ w @ coeffs
    return FpcaResult(
        basis=ds.basis,
        mean=cds.mean,
        eigenvalues=eigvals[:n_components],
        eigen_coeffs=coeffs,
        scores=scores,
        total_variance=total_variance,
    )


def _default_component_count(eigvals: np.ndarray, total: float) -> int:
    if total <= 0.0:
        return 1
    cumulative = np.cumsum(eigvals) / total
    return int(np.searchsorted(cumulative, DEFAULT_VARIANCE_TARGET, side="left")) + 1


def _fix_signs(coeffs: np.ndarray) -> np.ndarray:
    # Flip each column so its largest-magnitude entry (first on ties) is
    # positive; keeps outputs reproducible across LAPACK builds.
    out = coeffs.copy()
    for j in range(out.shape[1]):
        pivot = np.argmax(np.abs(out[:, j]))
        if out[pivot, j] < 0:
            out[:, j] = -out[:, j]
    return out


def explained_variance(result: FpcaResult) -> np.ndarray:
    """Fraction of total variance carried by each retained component."""
    if result.total_variance <= 0.0:
        raise DataError("dataset has zero total variance; ratios are undefined")
    return result.eigenvalues / result.total_variance


def reconstruct(result: FpcaResult, n_use: int, grid: EvalGrid) -> np.ndarray:
    """Truncated expansion mean + sum of score-weighted eigenfunctions.

    Returns the reconstructed curve values, one row per curve, using the
    leading `n_use` components (1 <= n_use <= retained count).
    """
    if not 1 <= n_use <= result.n_components:
        raise ValueError(
            f"n_use must be in [1, {result.n_components}], got {n_use}"
        )
    mean_values = result.mean.values(grid)
    eigen_values = result.eigenfunctions(grid)[:, :n_use]
    return mean_values + result.scores[:, :n_use] @ eigen_values.T
