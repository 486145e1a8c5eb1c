"""Difference-map and kernel-density features for atrial-fibrillation prediction.

The difference map plots successive R-R changes against the next change;
features are its covariance, the area/energy above the half-maximum of a
univariate Gaussian KDE of the second axis, the data extent (SurfMin /
SurfMax), and the volume/energy above the half-maximum plane of the
bivariate KDE. Area, volume and energy are plain sums of grid density
values, so the grid resolution is part of the feature definition and stays
frozen at 256 points per axis in the canonical configuration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class KdeConfig:
    """Bandwidth selection and evaluation-grid settings.

    ``bandwidth`` fixes h explicitly; otherwise Silverman's rule
    h = 1.06 * sd * n^(-1/5) applies per axis, falling back to 1.0 for
    zero-spread samples.
    """

    bandwidth: float | None = None
    grid_points: int = 256
    pad_bandwidths: float = 3.0

    def __post_init__(self):
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.grid_points < 16:
            raise ValueError("grid_points must be >= 16")


@dataclass(frozen=True)
class DifferenceMap:
    """Points (rr[i+1] - rr[i], rr[i+2] - rr[i+1]) in milliseconds."""

    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class DensityGrid:
    """Univariate (grid, density) or bivariate (x, y, density matrix) KDE."""

    grid_x: np.ndarray
    density: np.ndarray
    grid_y: np.ndarray | None = None

    @property
    def is_bivariate(self) -> bool:
        return self.grid_y is not None

    def integral(self) -> float:
        """Discrete integral of the density over the grid."""
        dx = self.grid_x[1] - self.grid_x[0]
        if not self.is_bivariate:
            return float(self.density.sum() * dx)
        dy = self.grid_y[1] - self.grid_y[0]
        return float(self.density.sum() * dx * dy)


@dataclass(frozen=True)
class PafFeatures:
    cov_xy: float
    area_y: float
    energy_y: float
    surf_min: float
    surf_max: float
    volume_xy: float
    energy_xy: float

    def as_dict(self) -> dict[str, float]:
        return {
            "diffmap_cov": self.cov_xy,
            "kde_area_y": self.area_y,
            "kde_energy_y": self.energy_y,
            "surf_min": self.surf_min,
            "surf_max": self.surf_max,
            "kde_volume_xy": self.volume_xy,
            "kde_energy_xy": self.energy_xy,
        }


def difference_map(rr) -> DifferenceMap:
    """Pairs of consecutive R-R interval changes; N intervals give N-2 points."""
    rr = np.asarray(rr, dtype=float)
    if rr.size < 3:
        raise InsufficientDataError("difference map needs at least 3 intervals")
    d = np.diff(rr)
    return DifferenceMap(d[:-1].copy(), d[1:].copy())


def diffmap_covariance(dmap: DifferenceMap) -> float:
    """Population covariance (1/n) of the two difference-map axes."""
    if len(dmap) < 2:
        raise InsufficientDataError("covariance needs at least 2 points")
    return float(np.mean((dmap.x - dmap.x.mean()) * (dmap.y - dmap.y.mean())))


def _silverman(samples: np.ndarray) -> float:
    sd = samples.std()
    if sd == 0:
        warnings.warn("zero-spread samples: falling back to bandwidth 1.0", stacklevel=3)
        return 1.0
    return float(1.06 * sd * samples.size ** (-0.2))


def _axis_grid(samples: np.ndarray, h: float, cfg: KdeConfig) -> np.ndarray:
    lo = samples.min() - cfg.pad_bandwidths * h
    hi = samples.max() + cfg.pad_bandwidths * h
    return np.linspace(lo, hi, cfg.grid_points)


def _kernel_matrix(grid: np.ndarray, samples: np.ndarray, h: float) -> np.ndarray:
    u = (grid[:, np.newaxis] - samples[np.newaxis, :]) / h
    return np.exp(-0.5 * u ** 2) / SQRT_2PI


def kde_density_at(samples, x, h: float) -> np.ndarray:
    """Univariate Gaussian KDE evaluated at arbitrary points."""
    samples = np.asarray(samples, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _kernel_matrix(x, samples, h).mean(axis=1) / h


def kde_density_at_2d(x_samples, y_samples, x, y, hx: float, hy: float) -> np.ndarray:
    """Product-kernel Gaussian KDE evaluated at arbitrary (x, y) points."""
    xs = np.asarray(x_samples, dtype=float)
    ys = np.asarray(y_samples, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    kx = _kernel_matrix(x, xs, hx)
    ky = _kernel_matrix(y, ys, hy)
    return (kx * ky).mean(axis=1) / (hx * hy)


def kde_univariate(samples, cfg: KdeConfig = KdeConfig()) -> DensityGrid:
    """Gaussian kernel density on a padded grid: mean of N(X_i, h^2) pdfs."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 1 or (samples.size < 2 and cfg.bandwidth is None):
        raise InsufficientDataError("univariate KDE needs >= 2 samples (1 with explicit h)")
    h = cfg.bandwidth if cfg.bandwidth is not None else _silverman(samples)
    grid = _axis_grid(samples, h, cfg)
    density = _kernel_matrix(grid, samples, h).mean(axis=1) / h
    return DensityGrid(grid, density)


def kde_bivariate(dmap: DifferenceMap, cfg: KdeConfig = KdeConfig()) -> DensityGrid:
    """Product-kernel Gaussian density of the difference map on a padded grid."""
    if len(dmap) < 2 and cfg.bandwidth is None:
        raise InsufficientDataError("bivariate KDE needs >= 2 points (1 with explicit h)")
    hx = cfg.bandwidth if cfg.bandwidth is not None else _silverman(dmap.x)
    hy = cfg.bandwidth if cfg.bandwidth is not None else _silverman(dmap.y)
    gx = _axis_grid(dmap.x, hx, cfg)
    gy = _axis_grid(dmap.y, hy, cfg)
    kx = _kernel_matrix(gx, dmap.x, hx)
    ky = _kernel_matrix(gy, dmap.y, hy)
    density = kx @ ky.T / (len(dmap) * hx * hy)
    return DensityGrid(gx, density, grid_y=gy)


def univariate_kde_features(grid: DensityGrid) -> tuple[float, float]:
    """Sum and root-sum-of-squares of density values above half the peak."""
    if grid.is_bivariate:
        raise ValueError("expected a univariate density grid")
    above = grid.density[grid.density > 0.5 * grid.density.max()]
    return float(above.sum()), float(np.sqrt(np.sum(above ** 2)))


def bivariate_kde_features(grid: DensityGrid, dmap: DifferenceMap) -> tuple[float, float, float, float]:
    """(surf_min, surf_max, volume, energy) of the bivariate density.

    The surface extent is read from the data points (both axes pooled);
    volume and energy sum the density cells above half the peak.
    """
    if not grid.is_bivariate:
        raise ValueError("expected a bivariate density grid")
    surf_min = float(min(dmap.x.min(), dmap.y.min()))
    surf_max = float(max(dmap.x.max(), dmap.y.max()))
    above = grid.density[grid.density > 0.5 * grid.density.max()]
    return surf_min, surf_max, float(above.sum()), float(np.sqrt(np.sum(above ** 2)))


def paf_features(rr, cfg: KdeConfig = KdeConfig()) -> PafFeatures:
    """The seven difference-map features of an R-R interval sequence (ms)."""
    dmap = difference_map(rr)
    uni = kde_univariate(dmap.y, cfg)
    area, energy = univariate_kde_features(uni)
    bi = kde_bivariate(dmap, cfg)
    surf_min, surf_max, volume, energy_xy = bivariate_kde_features(bi, dmap)
    return PafFeatures(
        cov_xy=diffmap_covariance(dmap),
        area_y=area,
        energy_y=energy,
        surf_min=surf_min,
        surf_max=surf_max,
        volume_xy=volume,
        energy_xy=energy_xy,
    )
