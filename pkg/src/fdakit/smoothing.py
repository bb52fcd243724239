"""Per-curve least-squares smoothing of raw discrete observations.

Each raw curve is a set of (time, value) pairs on its own grid. Fitting
projects the values onto the span of a basis by ordinary least squares
(optionally ridge-penalized), yielding one coefficient vector per curve.
Curves observed too sparsely for their basis are rejected rather than
imputed.
"""

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, EvalGrid, design_matrix, evaluate
from .exceptions import DataError, DomainError, RankError


@dataclass(frozen=True)
class RawCurve:
    """One discretely observed curve: values at (possibly irregular) times."""

    id: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 1:
            raise ValueError(f"curve {self.id!r}: times and values must be 1-d")
        if times.size != values.size:
            raise ValueError(
                f"curve {self.id!r}: {times.size} times but {values.size} values"
            )
        if times.size < 1:
            raise ValueError(f"curve {self.id!r}: needs at least one observation")
        for name, arr in (("times", times), ("values", values)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class FunctionalDataSet:
    """n curves represented as rows of coefficients in a shared basis."""

    basis: BasisSystem
    coefficients: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float)
        if coeffs.ndim != 2:
            raise ValueError("coefficients must be a 2-d matrix")
        if coeffs.shape[1] != self.basis.n_basis:
            raise ValueError(
                f"coefficient columns ({coeffs.shape[1]}) must match basis size "
                f"({self.basis.n_basis})"
            )
        if coeffs.shape[0] < 1:
            raise ValueError("a dataset needs at least one curve")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != coeffs.shape[0]:
            raise ValueError("one id per coefficient row required")
        if len(set(ids)) != len(ids):
            raise ValueError("curve ids must be unique")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "ids", ids)

    @property
    def n_curves(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_basis(self) -> int:
        return self.coefficients.shape[1]


def fit_coefficients(curve: RawCurve, basis: BasisSystem, ridge: float = 0.0) -> np.ndarray:
    """Least-squares coefficients of one curve in a basis.

    Minimizes ``sum_l (x_l - phi(t_l) a)^2 + ridge * ||a||^2`` via an
    SVD-based solve of the (optionally ridge-augmented) design.

    Raises
    ------
    RankError
        If ``ridge == 0`` and the design is rank deficient, e.g. fewer
        observations than basis functions.
    DomainError
        If any observation time lies outside the basis domain.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    try:
        design = design_matrix(basis, curve.times)
    except DomainError as exc:
        raise DomainError(f"curve {curve.id!r}: {exc}") from None
    rhs = curve.values
    if ridge > 0:
        k = basis.n_basis
        design = np.vstack([design, np.sqrt(ridge) * np.eye(k)])
        rhs = np.concatenate([rhs, np.zeros(k)])
    coeffs, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    if ridge == 0 and rank < basis.n_basis:
        raise RankError(
            f"curve {curve.id!r}: design has rank {rank} < {basis.n_basis}; "
            "too few or too clustered observation times for this basis "
            "(use a positive ridge or a smaller basis)"
        )
    return coeffs


def build_dataset(curves, basis: BasisSystem, ridge: float = 0.0) -> FunctionalDataSet:
    """Fit every curve and assemble the coefficient matrix, order preserved."""
    curves = list(curves)
    if not curves:
        raise DataError("cannot build a dataset from an empty curve list")
    rows = [fit_coefficients(c, basis, ridge) for c in curves]
    return FunctionalDataSet(
        basis=basis,
        coefficients=np.vstack(rows),
        ids=tuple(c.id for c in curves),
    )


def eval_curves(ds: FunctionalDataSet, grid: EvalGrid) -> np.ndarray:
    """Resample all fitted curves on a grid; entry (i, l) = phi(t_l) a_i."""
    phi = evaluate(ds.basis, grid)
    return ds.coefficients @ phi.T
