import numpy as np
import pytest

import fdakit as fk
from fdakit.exceptions import DataError

BASIS = fk.fourier_basis(5, (0.0, 1.0))
GRID = fk.uniform_grid((0.0, 1.0), 31)


def make_spatial(n=40, shift_size=0, shift_by=10.0, seed=0, noise_sd=0.3):
    """Located noise curves, optionally shifting one spatial neighborhood."""
    rng = np.random.default_rng(seed)
    coords = rng.uniform(size=(n, 2))
    values = fk.simulate_curves(
        BASIS, np.zeros(5), np.array([1.0, 0.5]), n, GRID,
        noise_sd=noise_sd, seed=seed + 1,
    )
    true = np.empty(0, dtype=int)
    if shift_size:
        center = coords[int(rng.integers(n))]
        true = np.argsort(((coords - center) ** 2).sum(axis=1))[:shift_size]
        values = values.copy()
        values[true] += shift_by
    curves = [
        fk.RawCurve(id=f"s{i:02d}", times=GRID.points, values=values[i])
        for i in range(n)
    ]
    ds = fk.build_dataset(curves, BASIS)
    return fk.SpatialFunctionalDataSet(ds=ds, coords=coords), true


class TestSpatialDataset:
    def test_coordinate_count_must_match(self):
        sds, _ = make_spatial(n=10)
        with pytest.raises(ValueError, match="coordinate"):
            fk.SpatialFunctionalDataSet(ds=sds.ds, coords=sds.coords[:5])

    def test_duplicate_coordinates_get_deterministic_nudge(self):
        sds, _ = make_spatial(n=4)
        coords = sds.coords.copy()
        coords[2] = coords[0]
        a = fk.SpatialFunctionalDataSet(ds=sds.ds, coords=coords)
        b = fk.SpatialFunctionalDataSet(ds=sds.ds, coords=coords)
        assert len({tuple(row) for row in a.coords}) == 4
        assert a.coords[2, 0] == pytest.approx(coords[0, 0] + 1e-9, abs=0)
        assert np.array_equal(a.coords, b.coords)


class TestEnumerateWindows:
    def test_three_collinear_points_by_hand(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        windows = fk.enumerate_windows(coords, 0.5)
        assert set(windows) == {(0,), (1,), (2,), (0, 1), (1, 2)}

    def test_no_window_covers_everything(self):
        rng = np.random.default_rng(1)
        coords = rng.uniform(size=(12, 2))
        for frac in (0.3, 0.9, 0.999):
            windows = fk.enumerate_windows(coords, frac)
            assert max(len(w) for w in windows) <= 11

    def test_windows_are_unique(self):
        rng = np.random.default_rng(2)
        coords = rng.uniform(size=(15, 2))
        windows = fk.enumerate_windows(coords, 0.5)
        assert len(windows) == len(set(windows))

    def test_nested_around_each_center(self):
        rng = np.random.default_rng(3)
        coords = rng.uniform(size=(9, 2))
        windows = set(fk.enumerate_windows(coords, 0.5))
        # every location appears as its own singleton window
        for i in range(9):
            assert (i,) in windows

    def test_bad_fraction_rejected(self):
        coords = np.zeros((5, 2)) + np.arange(5)[:, None]
        for frac in (0.0, 1.0, -0.2, 2.0):
            with pytest.raises(ValueError, match="max_fraction"):
                fk.enumerate_windows(coords, frac)

    def test_needs_three_locations(self):
        with pytest.raises(ValueError, match="3 locations"):
            fk.enumerate_windows(np.array([[0.0, 0.0], [1.0, 1.0]]), 0.5)


class TestWindowStatistic:
    def test_complement_symmetry_is_exact(self):
        sds, _ = make_spatial(n=20, seed=4)
        window = (0, 3, 5, 11, 17)
        complement = tuple(i for i in range(20) if i not in window)
        a = fk.window_statistic(sds, window, GRID)
        b = fk.window_statistic(sds, complement, GRID)
        assert a == b

    def test_shifted_window_beats_its_permutation_distribution(self):
        sds, true = make_spatial(n=40, shift_size=10, seed=5)
        window = tuple(sorted(true.tolist()))
        observed = fk.window_statistic(sds, window, GRID)
        rng = np.random.default_rng(6)
        replicates = []
        for _ in range(200):
            perm = rng.permutation(40)
            shuffled = fk.SpatialFunctionalDataSet(
                ds=fk.FunctionalDataSet(
                    basis=sds.ds.basis,
                    coefficients=sds.ds.coefficients[perm],
                    ids=tuple(sds.ds.ids[i] for i in perm),
                ),
                coords=sds.coords,
            )
            replicates.append(fk.window_statistic(shuffled, window, GRID))
        assert observed > np.quantile(replicates, 0.99)

    def test_sides_need_two_curves(self):
        sds, _ = make_spatial(n=10, seed=7)
        with pytest.raises(DataError, match="fewer than two"):
            fk.window_statistic(sds, (0,), GRID)
        with pytest.raises(DataError, match="fewer than two"):
            fk.window_statistic(sds, tuple(range(9)), GRID)

    def test_identical_curves_are_degenerate(self):
        times = GRID.points
        curves = [
            fk.RawCurve(id=f"d{i}", times=times, values=np.sin(3 * times))
            for i in range(10)
        ]
        ds = fk.build_dataset(curves, BASIS)
        coords = np.column_stack([np.arange(10.0), np.zeros(10)])
        sds = fk.SpatialFunctionalDataSet(ds=ds, coords=coords)
        with pytest.raises(DataError, match="zero variance"):
            fk.window_statistic(sds, (0, 1, 2), GRID)

    def test_constant_shift_leaves_statistic_unchanged(self):
        sds, _ = make_spatial(n=16, seed=8)
        shifted_ds = fk.FunctionalDataSet(
            basis=sds.ds.basis,
            coefficients=sds.ds.coefficients + np.array([7.0, 0, 0, 0, 0]),
            ids=sds.ds.ids,
        )
        shifted = fk.SpatialFunctionalDataSet(ds=shifted_ds, coords=sds.coords)
        window = (1, 4, 6, 9)
        a = fk.window_statistic(sds, window, GRID)
        b = fk.window_statistic(shifted, window, GRID)
        assert b == pytest.approx(a, abs=1e-10)


class TestDetectCluster:
    def test_recovers_planted_cluster(self):
        sds, true = make_spatial(n=40, shift_size=10, seed=9)
        result = fk.detect_cluster(sds, 0.3, grid=GRID, n_perm=199, seed=10)
        assert result.p_value == pytest.approx(1 / 200)
        overlap = len(set(result.window) & set(true.tolist())) / 10
        assert overlap >= 0.8
        assert result.center_index in result.window

    def test_statistic_is_max_over_window_statistics(self):
        sds, _ = make_spatial(n=14, seed=11)
        result = fk.detect_cluster(sds, 0.45, grid=GRID, n_perm=19, seed=1)
        candidates = [
            w for w in fk.enumerate_windows(sds.coords, 0.45)
            if 2 <= len(w) <= 12
        ]
        stats = [fk.window_statistic(sds, w, GRID) for w in candidates]
        assert result.statistic == pytest.approx(max(stats), rel=1e-8)
        assert result.window in [tuple(sorted(w)) for w in candidates]

    def test_deterministic_given_seed(self):
        sds, _ = make_spatial(n=20, seed=12)
        a = fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=99, seed=3)
        b = fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=99, seed=3)
        assert a == b

    def test_p_value_bounds(self):
        sds, _ = make_spatial(n=15, seed=13)
        for seed in range(3):
            result = fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=39, seed=seed)
            assert 1 / 40 <= result.p_value <= 1.0

    def test_radius_covers_window(self):
        sds, _ = make_spatial(n=18, seed=14)
        result = fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=19, seed=4)
        center = sds.coords[result.center_index]
        dists = np.sqrt(((sds.coords[list(result.window)] - center) ** 2).sum(axis=1))
        assert dists.max() <= result.radius + 1e-12

    def test_too_few_permutations_rejected(self):
        sds, _ = make_spatial(n=12, seed=15)
        with pytest.raises(ValueError, match="19"):
            fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=10, seed=0)

    def test_degenerate_data_rejected(self):
        times = GRID.points
        curves = [
            fk.RawCurve(id=f"d{i}", times=times, values=np.cos(times))
            for i in range(12)
        ]
        ds = fk.build_dataset(curves, BASIS)
        coords = np.column_stack([np.arange(12.0), np.zeros(12)])
        sds = fk.SpatialFunctionalDataSet(ds=ds, coords=coords)
        with pytest.raises(DataError, match="zero variance"):
            fk.detect_cluster(sds, 0.4, grid=GRID, n_perm=99, seed=0)
