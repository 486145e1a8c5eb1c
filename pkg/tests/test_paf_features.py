import numpy as np
import pytest

from hrvkit.errors import InsufficientDataError
from hrvkit.features import (
    KdeConfig,
    bivariate_kde_features,
    difference_map,
    diffmap_covariance,
    kde_bivariate,
    kde_univariate,
    univariate_kde_features,
)
from hrvkit.features.paf import DifferenceMap, paf_features

from oracles import (
    covariance_oracle,
    diffmap_oracle,
    half_peak_sums_oracle,
    kde_bivariate_oracle,
    kde_univariate_oracle,
)


class TestDifferenceMap:
    def test_hand_example(self):
        dmap = difference_map([800.0, 810.0, 805.0, 820.0])
        assert np.array_equal(dmap.x, [10.0, -5.0])
        assert np.array_equal(dmap.y, [-5.0, 15.0])

    def test_constant(self):
        dmap = difference_map(np.full(10, 700.0))
        assert np.all(dmap.x == 0) and np.all(dmap.y == 0)

    def test_ramp(self):
        dmap = difference_map(700.0 + 3.0 * np.arange(10))
        assert np.allclose(dmap.x, 3.0) and np.allclose(dmap.y, 3.0)

    def test_count(self):
        rng = np.random.default_rng(50)
        rr = rng.uniform(600, 1000, 40)
        assert len(difference_map(rr)) == 38
        got = difference_map(rr)
        want = diffmap_oracle(rr)
        assert np.allclose(got.x, [p[0] for p in want])
        assert np.allclose(got.y, [p[1] for p in want])

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            difference_map([800.0, 810.0])


class TestCovariance:
    def test_identical_points(self):
        dmap = DifferenceMap(np.full(5, 2.0), np.full(5, -1.0))
        assert diffmap_covariance(dmap) == 0.0

    def test_positive_line(self):
        dmap = DifferenceMap(np.array([-1.0, 0.0, 1.0]), np.array([-1.0, 0.0, 1.0]))
        assert diffmap_covariance(dmap) == pytest.approx(2 / 3)

    def test_negative_line(self):
        dmap = DifferenceMap(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 0.0, -1.0]))
        assert diffmap_covariance(dmap) == pytest.approx(-2 / 3)

    def test_matches_oracle(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            rr = rng.uniform(500, 1000, 30)
            dmap = difference_map(rr)
            want = covariance_oracle(diffmap_oracle(rr))
            assert diffmap_covariance(dmap) == pytest.approx(want, rel=1e-9)

    def test_translation_invariance_and_scaling(self):
        rng = np.random.default_rng(52)
        rr = rng.uniform(500, 1000, 40)
        base = diffmap_covariance(difference_map(rr))
        shifted = diffmap_covariance(difference_map(rr + 250.0))
        scaled = diffmap_covariance(difference_map(3.0 * rr))
        assert shifted == pytest.approx(base, rel=1e-9)
        assert scaled == pytest.approx(9.0 * base, rel=1e-9)


class TestKde:
    def test_kernel_peak_single_sample(self):
        from hrvkit.features.paf import kde_density_at
        at_zero = kde_density_at(np.array([0.0]), 0.0, h=1.0)[0]
        assert at_zero == pytest.approx(1 / np.sqrt(2 * np.pi), abs=1e-12)

    def test_two_samples_midpoint(self):
        from hrvkit.features.paf import kde_density_at
        at_zero = kde_density_at(np.array([-1.0, 1.0]), 0.0, h=1.0)[0]
        phi1 = np.exp(-0.5) / np.sqrt(2 * np.pi)
        assert at_zero == pytest.approx(phi1, abs=1e-12)

    def test_integral_near_one(self):
        rng = np.random.default_rng(53)
        for _ in range(5):
            samples = rng.normal(0, 3.0, size=rng.integers(20, 200))
            grid = kde_univariate(samples)
            assert grid.integral() == pytest.approx(1.0, abs=0.02)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(54)
        samples = rng.normal(size=25)
        cfg = KdeConfig(bandwidth=0.7, grid_points=32)
        grid = kde_univariate(samples, cfg)
        want = kde_univariate_oracle(samples, grid.grid_x, 0.7)
        assert np.allclose(grid.density, want, rtol=1e-9)

    def test_bivariate_peak(self):
        from hrvkit.features.paf import kde_density_at_2d
        at_origin = kde_density_at_2d([0.0], [0.0], 0.0, 0.0, 1.0, 1.0)[0]
        assert at_origin == pytest.approx(1 / (2 * np.pi), abs=1e-12)

    def test_bivariate_integral(self):
        rng = np.random.default_rng(55)
        dmap = DifferenceMap(rng.normal(size=100), rng.normal(size=100))
        assert kde_bivariate(dmap).integral() == pytest.approx(1.0, abs=0.02)

    def test_bivariate_density_bound(self):
        rng = np.random.default_rng(56)
        dmap = DifferenceMap(rng.normal(size=40), rng.normal(size=40))
        cfg = KdeConfig(bandwidth=0.8)
        grid = kde_bivariate(dmap, cfg)
        assert grid.density.max() <= 1 / (2 * np.pi * 0.8 * 0.8) + 1e-12

    def test_bivariate_matches_loop_oracle(self):
        rng = np.random.default_rng(57)
        dmap = DifferenceMap(rng.normal(size=15), rng.normal(size=15))
        cfg = KdeConfig(bandwidth=0.9, grid_points=16)
        grid = kde_bivariate(dmap, cfg)
        want = kde_bivariate_oracle(list(zip(dmap.x, dmap.y)),
                                    grid.grid_x, grid.grid_y, 0.9, 0.9)
        assert np.allclose(grid.density, want, rtol=1e-9)

    def test_zero_variance_fallback(self):
        with pytest.warns(UserWarning, match="bandwidth"):
            grid = kde_univariate(np.full(10, 4.0))
        assert grid.integral() == pytest.approx(1.0, abs=0.02)


class TestKdeFeatures:
    def test_single_cell_density(self):
        from hrvkit.features.paf import DensityGrid
        density = np.zeros(64)
        density[10] = 3.0
        grid = DensityGrid(np.linspace(0, 1, 64), density)
        area, energy = univariate_kde_features(grid)
        assert area == 3.0 and energy == 3.0

    def test_fwhm_of_gaussian(self):
        rng = np.random.default_rng(58)
        samples = rng.normal(0, 1.0, size=10_000)
        grid = kde_univariate(samples)
        above = grid.grid_x[grid.density > 0.5 * grid.density.max()]
        h = 1.06 * samples.std() * samples.size ** -0.2
        half_width = np.sqrt(2 * np.log(2)) * np.sqrt(1 + h * h)
        assert above.min() == pytest.approx(-half_width, abs=0.1)
        assert above.max() == pytest.approx(half_width, abs=0.1)

    def test_dual_marginal_consistency(self):
        # y samples are the x samples shifted by one point; their KDE areas agree
        rng = np.random.default_rng(59)
        rr = np.cumsum(rng.normal(0, 10, 500)) + 800
        rr = np.maximum(rr, 300)
        dmap = difference_map(rr)
        area_y, _ = univariate_kde_features(kde_univariate(dmap.y))
        area_x, _ = univariate_kde_features(kde_univariate(dmap.x))
        assert area_y == pytest.approx(area_x, rel=0.05)

    def test_surface_extent(self):
        rng = np.random.default_rng(60)
        x = rng.uniform(-5.5, 5.5, 200)
        y = rng.uniform(-5.5, 5.5, 200)
        x[0], y[1] = -5.5, 5.5
        dmap = DifferenceMap(x, y)
        surf_min, surf_max, _, _ = bivariate_kde_features(kde_bivariate(dmap), dmap)
        assert surf_min == pytest.approx(-5.5, abs=0.01)
        assert surf_max == pytest.approx(5.5, abs=0.01)

    def test_all_zero_points(self):
        dmap = DifferenceMap(np.zeros(10), np.zeros(10))
        with pytest.warns(UserWarning):
            grid = kde_bivariate(dmap)
        surf_min, surf_max, volume, energy = bivariate_kde_features(grid, dmap)
        assert surf_min == 0.0 and surf_max == 0.0
        assert volume > 0 and energy > 0

    def test_half_peak_sums_match_oracle(self):
        rng = np.random.default_rng(61)
        dmap = DifferenceMap(rng.normal(size=80), rng.normal(size=80))
        grid = kde_bivariate(dmap)
        _, _, volume, energy = bivariate_kde_features(grid, dmap)
        want_vol, want_energy = half_peak_sums_oracle(grid.density)
        assert volume == pytest.approx(want_vol, rel=1e-9)
        assert energy == pytest.approx(want_energy, rel=1e-9)

    def test_surface_translation_equivariance(self):
        rng = np.random.default_rng(64)
        x, y = rng.normal(size=50), rng.normal(size=50)
        base = bivariate_kde_features(kde_bivariate(DifferenceMap(x, y)),
                                      DifferenceMap(x, y))
        shifted_map = DifferenceMap(x + 7.0, y + 7.0)
        shifted = bivariate_kde_features(kde_bivariate(shifted_map), shifted_map)
        assert shifted[0] == pytest.approx(base[0] + 7.0, rel=1e-12)
        assert shifted[1] == pytest.approx(base[1] + 7.0, rel=1e-12)

    def test_energy_cauchy_bound(self):
        rng = np.random.default_rng(62)
        samples = rng.normal(size=300)
        grid = kde_univariate(samples)
        area, energy = univariate_kde_features(grid)
        assert energy ** 2 <= area * grid.density.max() + 1e-12

    def test_seven_features(self):
        rng = np.random.default_rng(63)
        rr = rng.uniform(600, 900, 120)
        feats = paf_features(rr).as_dict()
        assert len(feats) == 7
        assert all(np.isfinite(v) for v in feats.values())
        assert feats["surf_min"] <= feats["surf_max"]
