"""Finite function bases on a closed interval.

Two families are supported: an orthonormal Fourier system (constant plus
sine/cosine pairs, so the Gram matrix is the identity on a full period)
and clamped B-splines with arbitrary interior knots. A basis knows how to
evaluate itself on a point grid and how to produce its Gram matrix
``W[j, k] = integral of phi_j * phi_k`` over the domain, which realizes
the L2 geometry in coefficient space for every downstream routine.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline

from .exceptions import DomainError, NumericalError

FOURIER = "fourier"
BSPLINE = "bspline"

# Eigenvalues of a Gram matrix below this fraction of the largest one are
# treated as exact zeros when inverting (pseudo-inverse square root).
_GRAM_EIG_FLOOR = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BasisSystem:
    """A finite basis {phi_1, ..., phi_K} on a closed interval.

    Use the :func:`fourier_basis` and :func:`bspline_basis` constructors
    rather than instantiating directly.

    Attributes
    ----------
    kind : str
        Either ``"fourier"`` or ``"bspline"``.
    n_basis : int
        Number of basis functions.
    domain : tuple of float
        Closed interval ``(lo, hi)`` with ``lo < hi``.
    order : int
        B-spline order (4 = cubic). Ignored for Fourier.
    interior_knots : np.ndarray
        Strictly interior knots for B-splines; empty for Fourier.
    """

    kind: str
    n_basis: int
    domain: tuple[float, float]
    order: int = 4
    interior_knots: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        lo, hi = float(self.domain[0]), float(self.domain[1])
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got ({lo}, {hi})")
        object.__setattr__(self, "domain", (lo, hi))
        if self.n_basis < 1:
            raise ValueError("n_basis must be a positive integer")
        knots = _readonly(self.interior_knots)
        object.__setattr__(self, "interior_knots", knots)
        if self.kind == FOURIER:
            if self.n_basis % 2 == 0:
                raise ValueError(
                    "a Fourier basis needs an odd number of functions "
                    "(constant plus complete sine/cosine pairs), got "
                    f"{self.n_basis}"
                )
            if knots.size:
                raise ValueError("a Fourier basis takes no knots")
        elif self.kind == BSPLINE:
            if self.order < 1:
                raise ValueError("B-spline order must be >= 1")
            if self.n_basis != knots.size + self.order:
                raise ValueError(
                    f"need n_basis = interior knots + order, got "
                    f"{self.n_basis} != {knots.size} + {self.order}"
                )
            if np.any(np.diff(knots) < 0):
                raise ValueError("interior knots must be nondecreasing")
            if knots.size and (knots[0] <= lo or knots[-1] >= hi):
                raise ValueError("interior knots must lie strictly inside the domain")
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @property
    def width(self) -> float:
        lo, hi = self.domain
        return hi - lo

    def knot_vector(self) -> np.ndarray:
        """Full clamped knot vector (boundary knots repeated `order` times)."""
        if self.kind != BSPLINE:
            raise ValueError("knot vector is only defined for B-spline bases")
        lo, hi = self.domain
        return np.concatenate(
            [np.full(self.order, lo), self.interior_knots, np.full(self.order, hi)]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BasisSystem):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.n_basis == other.n_basis
            and self.domain == other.domain
            and (self.kind == FOURIER or self.order == other.order)
            and np.array_equal(self.interior_knots, other.interior_knots)
        )

    __hash__ = None


def fourier_basis(n_basis: int, domain: tuple[float, float]) -> BasisSystem:
    """Orthonormal Fourier basis: 1/sqrt(T), then sqrt(2/T) sin/cos pairs.

    `n_basis` must be odd. On its full period the basis is exactly
    orthonormal, so its Gram matrix is the identity.
    """
    return BasisSystem(kind=FOURIER, n_basis=n_basis, domain=domain, order=0)


def bspline_basis(
    n_basis: int,
    domain: tuple[float, float],
    order: int = 4,
    interior_knots=None,
) -> BasisSystem:
    """Clamped B-spline basis of a given order (4 = cubic).

    When `interior_knots` is omitted, `n_basis - order` knots are placed
    uniformly inside the domain. Custom knots must be nondecreasing and
    strictly interior; `n_basis` must equal their count plus the order.
    """
    if interior_knots is None:
        n_interior = n_basis - order
        if n_interior < 0:
            raise ValueError(
                f"n_basis must be >= order for B-splines, got {n_basis} < {order}"
            )
        lo, hi = domain
        interior_knots = lo + (hi - lo) * np.arange(1, n_interior + 1) / (n_interior + 1)
    return BasisSystem(
        kind=BSPLINE,
        n_basis=n_basis,
        domain=domain,
        order=order,
        interior_knots=np.asarray(interior_knots, dtype=float),
    )


@dataclass(frozen=True)
class EvalGrid:
    """A strictly increasing, nonempty sequence of evaluation points."""

    points: np.ndarray

    def __post_init__(self):
        pts = _readonly(np.atleast_1d(self.points))
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid must be a nonempty 1-d sequence")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size


def uniform_grid(domain: tuple[float, float], n_points: int) -> EvalGrid:
    """Equispaced grid spanning the closed interval `domain`."""
    lo, hi = domain
    return EvalGrid(np.linspace(lo, hi, n_points))


def _check_in_domain(basis: BasisSystem, points: np.ndarray) -> None:
    lo, hi = basis.domain
    if points.min() < lo or points.max() > hi:
        bad = points[(points < lo) | (points > hi)][0]
        raise DomainError(
            f"evaluation point {bad!r} outside basis domain [{lo}, {hi}]"
        )


def evaluate(basis: BasisSystem, grid: EvalGrid) -> np.ndarray:
    """Evaluate all basis functions on a grid.

    Parameters
    ----------
    basis : BasisSystem
    grid : EvalGrid
        Points inside the basis domain.

    Returns
    -------
    np.ndarray of shape (len(grid), n_basis)
        Row l holds (phi_1(t_l), ..., phi_K(t_l)).

    Raises
    ------
    DomainError
        If any grid point lies outside the domain.
    """
    return design_matrix(basis, grid.points)


def design_matrix(basis: BasisSystem, times) -> np.ndarray:
    """Basis values at arbitrary in-domain points (unsorted, repeats allowed).

    Like :func:`evaluate` but for raw observation-time vectors that need
    not satisfy the EvalGrid ordering invariants.
    """
    pts = np.asarray(times, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    _check_in_domain(basis, pts)
    if basis.kind == FOURIER:
        return _evaluate_fourier(basis, pts)
    return _evaluate_bspline(basis, pts)


def _evaluate_fourier(basis: BasisSystem, pts: np.ndarray) -> np.ndarray:
    lo, _ = basis.domain
    width = basis.width
    out = np.empty((pts.size, basis.n_basis))
    out[:, 0] = 1.0 / np.sqrt(width)
    amp = np.sqrt(2.0 / width)
    n_pairs = (basis.n_basis - 1) // 2
    u = pts - lo
    for j in range(1, n_pairs + 1):
        arg = 2.0 * np.pi * j * u / width
        out[:, 2 * j - 1] = amp * np.sin(arg)
        out[:, 2 * j] = amp * np.cos(arg)
    return out


def _evaluate_bspline(basis: BasisSystem, pts: np.ndarray) -> np.ndarray:
    knots = basis.knot_vector()
    design = BSpline.design_matrix(pts, knots, basis.order - 1, extrapolate=False)
    return design.toarray()


def gram_matrix(basis: BasisSystem) -> np.ndarray:
    """Gram matrix W of pairwise basis inner products over the domain.

    Fourier bases are orthonormal on a full period, so W is the identity.
    For B-splines W is assembled by Gauss-Legendre quadrature with `order`
    nodes per knot span, which integrates the degree-2(order-1) products
    exactly up to round-off.
    """
    if basis.kind == FOURIER:
        return np.eye(basis.n_basis)
    nodes, weights = leggauss(basis.order)
    lo, hi = basis.domain
    breaks = np.unique(np.concatenate([[lo], basis.interior_knots, [hi]]))
    w = np.zeros((basis.n_basis, basis.n_basis))
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        x = a + half * (nodes + 1.0)
        phi = evaluate(basis, EvalGrid(x))
        w += (phi.T * (half * weights)) @ phi
    return 0.5 * (w + w.T)


def gram_sqrt(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and pseudo-inverse square root of a PSD matrix.

    Eigenvalues below ``1e-10 * lambda_max`` are treated as zero, so the
    inverse factor is a pseudo-inverse on degenerate inputs. Eigenvalues
    more negative than that floor raise :class:`NumericalError`.

    Returns
    -------
    (w_half, w_inv_half) : pair of symmetric np.ndarray
        ``w_half @ w_half`` reconstructs `w`; ``w_inv_half`` inverts it on
        its range.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("gram_sqrt expects a square matrix")
    if not np.allclose(w, w.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(w).max())):
        raise ValueError("gram_sqrt expects a symmetric matrix")
    eigvals, eigvecs = np.linalg.eigh(0.5 * (w + w.T))
    lam_max = max(eigvals.max(initial=0.0), 0.0)
    scale = max(lam_max, float(np.abs(w).max(initial=0.0)))
    if eigvals.min(initial=0.0) < -_GRAM_EIG_FLOOR * scale:
        raise NumericalError(
            f"matrix is not positive semi-definite (min eigenvalue {eigvals.min():g})"
        )
    floor = _GRAM_EIG_FLOOR * lam_max
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    inv_root = np.zeros_like(root)
    keep = eigvals > floor
    inv_root[keep] = 1.0 / root[keep]
    w_half = (eigvecs * root) @ eigvecs.T
    w_inv_half = (eigvecs * inv_root) @ eigvecs.T
    return 0.5 * (w_half + w_half.T), 0.5 * (w_inv_half + w_inv_half.T)
