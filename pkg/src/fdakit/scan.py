"""Spatial hotspot detection for located curves.

Candidate clusters are circular windows: for every location taken as a
center, the nested sets of its nearest neighbors up to a maximum size.
Each window is scored by the largest absolute Welch two-sample t
statistic, over a time grid, between curve values inside and outside the
window, and the most extreme window is calibrated by Monte Carlo
permutation of the curve-to-location assignment.

The statistic is intentionally simple and fully specified here; it is a
pragmatic stand-in for published functional scan statistics, not a
reimplementation of any of them.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .basis import EvalGrid, uniform_grid
from .exceptions import DataError
from .smoothing import FunctionalDataSet, eval_curves

DEFAULT_GRID_POINTS = 101

_TIE_NUDGE = 1e-9

# A standard error this small relative to the squared data scale is
# round-off from exactly coincident values, not real variation; such grid
# points carry no evidence. (Rounding noise sits near 1e-31 of scale^2,
# real variation in double precision far above 1e-16 of it.)
_SE2_REL_FLOOR = 1e-24


@dataclass(frozen=True)
class SpatialFunctionalDataSet:
    """Curves with one planar coordinate pair each (projected units).

    Exactly duplicated coordinates are disambiguated on construction by
    deterministically nudging the x coordinate of later duplicates in
    steps of 1e-9 units, so nearest-neighbor orderings are well defined.
    """

    ds: FunctionalDataSet
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coords must be an n x 2 array")
        if coords.shape[0] != self.ds.n_curves:
            raise ValueError(
                f"{self.ds.n_curves} curves but {coords.shape[0]} coordinate pairs"
            )
        seen = set()
        for i in range(coords.shape[0]):
            while (coords[i, 0], coords[i, 1]) in seen:
                coords[i, 0] += _TIE_NUDGE
            seen.add((coords[i, 0], coords[i, 1]))
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n_locations(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class ScanResult:
    """Most-likely spatial window and its permutation calibration."""

    window: tuple[int, ...]
    center_index: int
    radius: float
    statistic: float
    p_value: float
    n_perm: int
    seed: int


def _neighbor_orders(coords: np.ndarray) -> np.ndarray:
    """Row i: all location indices sorted by distance to location i.

    Stable sort, so exact distance ties resolve toward the lower index.
    """
    diff = coords[:, None, :] - coords[None, :, :]
    d2 = (diff**2).sum(axis=2)
    return np.argsort(d2, axis=1, kind="stable")


def enumerate_windows(coords: np.ndarray, max_fraction: float) -> list[tuple[int, ...]]:
    """All nested nearest-neighbor windows up to ceil(max_fraction * n).

    Every location serves as a center; its windows are the sets of its
    1, 2, ..., max_size nearest locations (itself included). Duplicate
    sets are dropped, keeping the first occurrence in (center, size)
    order. No window ever covers all n locations.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    if n < 3:
        raise ValueError("need at least 3 locations to scan")
    if not 0.0 < max_fraction < 1.0:
        raise ValueError(f"max_fraction must be in (0, 1), got {max_fraction}")
    max_size = min(int(np.ceil(max_fraction * n)), n - 1)
    orders = _neighbor_orders(coords)
    windows = []
    seen = set()
    for center in range(n):
        for size in range(1, max_size + 1):
            members = tuple(sorted(orders[center, :size]))
            if members not in seen:
                seen.add(members)
                windows.append(members)
    return windows


def window_statistic(sds: SpatialFunctionalDataSet, window, grid: EvalGrid) -> float:
    """Largest |Welch t| over the grid between curves inside and outside.

    Both sides need at least two curves for a variance estimate. Grid
    points where both sides have zero variance carry no evidence and are
    skipped; if that happens everywhere the data are degenerate.
    """
    n = sds.n_locations
    members = np.asarray(sorted(set(int(i) for i in window)), dtype=int)
    if members.size < 1 or members.size > n - 1:
        raise ValueError(f"window size must be in [1, {n - 1}], got {members.size}")
    if np.any(members < 0) or np.any(members >= n):
        raise ValueError("window contains out-of-range location indices")
    if members.size < 2 or n - members.size < 2:
        raise DataError(
            "the statistic is undefined with fewer than two curves on "
            f"either side (inside {members.size}, outside {n - members.size})"
        )
    values = eval_curves(sds.ds, grid)
    inside = values[members]
    mask = np.ones(n, dtype=bool)
    mask[members] = False
    outside = values[mask]

    mean_in = inside.mean(axis=0)
    mean_out = outside.mean(axis=0)
    se2 = inside.var(axis=0, ddof=1) / inside.shape[0] + outside.var(
        axis=0, ddof=1
    ) / outside.shape[0]
    valid = se2 > _SE2_REL_FLOOR * (values**2).max(axis=0)
    if not np.any(valid):
        raise DataError("zero variance on both sides at every grid point")
    t = np.abs(mean_in[valid] - mean_out[valid]) / np.sqrt(se2[valid])
    return float(t.max())


@njit(cache=True)
def _max_stat_one(values, values_sq, tot1, tot2, se2_floor, orders_cut, sizes, row_map):
    """Max squared Welch statistic over all windows for one assignment.

    Walks each center's neighbor order once, growing the in-window sums
    incrementally, and scores every requested window size at every grid
    point. Cells whose standard error sits below the round-off floor
    carry no evidence and are skipped. Returns (best t^2 or -inf, center,
    size index); ties keep the first maximizer in (center, size, grid
    point) order.
    """
    n, n_points = values.shape
    n_centers, max_size = orders_cut.shape
    best = -np.inf
    best_center = -1
    best_size_idx = -1
    sum1 = np.empty(n_points)
    sum2 = np.empty(n_points)
    for c in range(n_centers):
        for l in range(n_points):
            sum1[l] = 0.0
            sum2[l] = 0.0
        size_idx = 0
        for j in range(max_size):
            row = row_map[orders_cut[c, j]]
            for l in range(n_points):
                sum1[l] += values[row, l]
                sum2[l] += values_sq[row, l]
            if size_idx < sizes.size and j + 1 == sizes[size_idx]:
                m = float(j + 1)
                mo = float(n - j - 1)
                for l in range(n_points):
                    out1 = tot1[l] - sum1[l]
                    diff = sum1[l] / m - out1 / mo
                    var_in = sum2[l] - sum1[l] * sum1[l] / m
                    var_out = (tot2[l] - sum2[l]) - out1 * out1 / mo
                    se2 = var_in / (m * (m - 1.0)) + var_out / (mo * (mo - 1.0))
                    if se2 > se2_floor[l]:
                        t_sq = diff * diff / se2
                        if t_sq > best:
                            best = t_sq
                            best_center = c
                            best_size_idx = size_idx
                size_idx += 1
    return best, best_center, best_size_idx


@njit(cache=True)
def _max_stats_batch(values, values_sq, tot1, tot2, se2_floor, orders_cut, sizes,
                     row_maps):
    """Max statistic (not squared) for each assignment in a batch."""
    out = np.empty(row_maps.shape[0])
    for r in range(row_maps.shape[0]):
        t_sq, _, _ = _max_stat_one(
            values, values_sq, tot1, tot2, se2_floor, orders_cut, sizes, row_maps[r]
        )
        out[r] = np.sqrt(t_sq) if t_sq >= 0.0 else -np.inf
    return out


def detect_cluster(
    sds: SpatialFunctionalDataSet,
    max_fraction: float,
    grid: EvalGrid | None = None,
    n_perm: int = 999,
    seed: int = 0,
) -> ScanResult:
    """Find the most extreme window and its Monte Carlo p-value.

    Scores every window of 2..ceil(max_fraction * n) nearest neighbors
    (capped so at least two curves stay outside), then recomputes the
    maximal statistic under `n_perm` random reassignments of curves to
    locations. The p-value is (1 + exceedances) / (1 + n_perm).
    Replicate permutations are drawn from independent streams spawned
    from the seed, so the result does not depend on evaluation order.
    """
    if n_perm < 19:
        raise ValueError(
            f"need at least 19 permutations for a p-value below 0.05, got {n_perm}"
        )
    if not 0.0 < max_fraction < 1.0:
        raise ValueError(f"max_fraction must be in (0, 1), got {max_fraction}")
    n = sds.n_locations
    if grid is None:
        grid = uniform_grid(sds.ds.basis.domain, DEFAULT_GRID_POINTS)
    max_size = min(int(np.ceil(max_fraction * n)), n - 1)
    if n < 4 or min(max_size, n - 2) < 2:
        raise DataError("too few locations for any window with 2 curves per side")
    sizes = np.arange(2, min(max_size, n - 2) + 1)

    values = eval_curves(sds.ds, grid)
    se2_floor = _SE2_REL_FLOOR * (values**2).max(axis=0)
    if np.all(values.var(axis=0) <= se2_floor):
        raise DataError("zero variance on both sides at every grid point")
    values = values - values.mean(axis=0)
    values_sq = values**2
    tot1 = values.sum(axis=0)
    tot2 = values_sq.sum(axis=0)

    orders_cut = _neighbor_orders(sds.coords)[:, : sizes[-1]]

    identity = np.arange(n)
    t_sq, center, size_idx = _max_stat_one(
        values, values_sq, tot1, tot2, se2_floor, orders_cut, sizes, identity
    )
    if t_sq < 0.0:
        raise DataError("no window produced a finite statistic")
    observed = float(np.sqrt(t_sq))
    size = int(sizes[size_idx])

    perms = np.vstack(
        [
            np.random.default_rng(child).permutation(n)
            for child in np.random.SeedSequence(seed).spawn(n_perm)
        ]
    )
    stats = _max_stats_batch(
        values, values_sq, tot1, tot2, se2_floor, orders_cut, sizes, perms
    )
    exceed = int((stats >= observed).sum())

    members = orders_cut[center, :size]
    radius = float(
        np.sqrt(((sds.coords[center] - sds.coords[members[-1]]) ** 2).sum())
    )
    return ScanResult(
        window=tuple(int(i) for i in np.sort(members)),
        center_index=center,
        radius=radius,
        statistic=observed,
        p_value=(1 + exceed) / (1 + n_perm),
        n_perm=n_perm,
        seed=seed,
    )
