"""Third-order cumulant, bispectrum estimation and region features.

The estimator is the indirect method: the biased third-order cumulant over
lags [-L, L] squared up, then a 2-D Fourier transform evaluated on a G x G
grid of normalized frequency pairs in [0, 0.5)^2. Features are read from
four regions of the principal triangle: the LF-LF (LL), LF-HF (LH) and
HF-HF (HH) sub-bands plus the whole triangle (ROI). Physical band edges
(0.04 / 0.15 / 0.4 Hz) map to normalized frequency as f = Hz / rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InsufficientDataError

LF_HZ = (0.04, 0.15)
HF_HZ = (0.15, 0.4)

REGIONS = ("ll", "lh", "hh", "roi")
DIAGONAL_REGIONS = ("ll", "hh", "roi")

# Relative floor under |B| inside log sums, so regions with vanishing cells
# stay finite.
LOG_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class CumulantGrid:
    """Third-order cumulant R(m, n) over lags m, n in [-L, L]."""

    values: np.ndarray  # (2L+1, 2L+1), index [L + m, L + n]
    max_lag: int

    def at(self, m: int, n: int) -> float:
        return float(self.values[self.max_lag + m, self.max_lag + n])


@dataclass(frozen=True)
class BispectrumGrid:
    """Complex bispectrum samples on a square normalized-frequency grid."""

    values: np.ndarray  # (G, G) complex, axis 0 = f1
    freqs: np.ndarray   # (G,) normalized frequencies in [0, 0.5)

    @property
    def grid_step(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


@dataclass(frozen=True)
class BispectrumFeatures:
    """The 31 region features: 7 per region plus the 3 diagonal log sums."""

    m_avg: dict[str, float]
    p_avg: dict[str, float]
    e_nb: dict[str, float]
    e_snb: dict[str, float]
    l_m: dict[str, float]
    l_dm: dict[str, float]
    wcob_i: dict[str, float]
    wcob_j: dict[str, float]

    def as_dict(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for family in ("m_avg", "p_avg", "e_nb", "e_snb", "l_m"):
            for region in REGIONS:
                out[f"{family}_{region}"] = getattr(self, family)[region]
        for region in DIAGONAL_REGIONS:
            out[f"l_dm_{region}"] = self.l_dm[region]
        for family in ("wcob_i", "wcob_j"):
            for region in REGIONS:
                out[f"{family}_{region}"] = getattr(self, family)[region]
        return out


def third_order_cumulant(x, max_lag: int) -> CumulantGrid:
    """Biased estimate R(m, n) = mean_k x(k) x(k+m) x(k+n), zero-padded.

    The input is mean-removed first; the grid is symmetric in (m, n).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n <= 2 * max_lag:
        raise InsufficientDataError(
            f"cumulant with max lag {max_lag} needs more than {2 * max_lag} samples")
    x = x - x.mean()

    # S[l] = x shifted by lag l - max_lag, zero-padded to length n
    lags = np.arange(-max_lag, max_lag + 1)
    shifted = np.zeros((lags.size, n))
    for idx, lag in enumerate(lags):
        if lag >= 0:
            shifted[idx, : n - lag] = x[lag:]
        else:
            shifted[idx, -lag:] = x[:lag]
    # R(m, n) = (1/N) sum_k (x * shift_m)(k) * shift_n(k)
    prods = shifted * x[np.newaxis, :]
    grid = prods @ shifted.T / n
    # the summands are symmetric in (m, n); mirror the upper triangle so the
    # identity holds bitwise despite float summation order
    upper = np.triu(grid)
    grid = upper + np.triu(grid, 1).T
    return CumulantGrid(grid, max_lag)


def estimate_bispectrum(x, max_lag: int = 64, grid_size: int = 256) -> BispectrumGrid:
    """Indirect bispectrum: 2-D FFT of the uniform-windowed cumulant.

    Returns a grid_size x grid_size sampling of B(f1, f2) for normalized
    f = k / (2 * grid_size), k = 0 .. grid_size - 1.
    """
    if grid_size < 2 * max_lag + 1:
        raise ValueError("grid_size must be at least 2 * max_lag + 1")
    cum = third_order_cumulant(x, max_lag)
    m = 2 * grid_size
    padded = np.zeros((m, m))
    lags = np.arange(-max_lag, max_lag + 1)
    padded[np.ix_(lags % m, lags % m)] = cum.values
    full = np.fft.fft2(padded)
    freqs = np.arange(grid_size) / m
    return BispectrumGrid(full[:grid_size, :grid_size], freqs)


def region_masks(freqs: np.ndarray, rate_hz: float) -> dict[str, np.ndarray]:
    """Boolean masks over the (f1, f2) grid for LL, LH, HH and ROI.

    ROI is the principal triangle {0 <= f2 <= f1, f1 + f2 <= 0.5}; the
    sub-band masks intersect it with half-open physical-frequency boxes.
    """
    f1 = freqs[:, np.newaxis]
    f2 = freqs[np.newaxis, :]
    roi = (f2 <= f1) & (f1 + f2 <= 0.5)
    lf_lo, lf_hi = LF_HZ[0] / rate_hz, LF_HZ[1] / rate_hz
    hf_lo, hf_hi = HF_HZ[0] / rate_hz, HF_HZ[1] / rate_hz
    in_lf1 = (f1 >= lf_lo) & (f1 < lf_hi)
    in_lf2 = (f2 >= lf_lo) & (f2 < lf_hi)
    in_hf1 = (f1 >= hf_lo) & (f1 < hf_hi)
    in_hf2 = (f2 >= hf_lo) & (f2 < hf_hi)
    return {
        "ll": roi & in_lf1 & in_lf2,
        "lh": roi & in_hf1 & in_lf2,
        "hh": roi & in_hf1 & in_hf2,
        "roi": roi,
    }


def _entropy(weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        return 0.0
    p = weights / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def bispectral_features(grid: BispectrumGrid, rate_hz: float) -> BispectrumFeatures:
    """Evaluate the 31 region features of a bispectrum grid.

    Entropies use the Shannon form over |B| (and |B|^2) normalized within
    the region; log sums floor |B| at LOG_FLOOR_REL times the region
    maximum; the centre-of-mass coordinates are |B|-weighted normalized
    frequencies.
    """
    masks = region_masks(grid.freqs, rate_hz)
    mag = np.abs(grid.values)
    f1 = grid.freqs[:, np.newaxis] * np.ones_like(mag)
    f2 = grid.freqs[np.newaxis, :] * np.ones_like(mag)
    diag = np.zeros(mag.shape, dtype=bool)
    np.fill_diagonal(diag, True)

    m_avg, p_avg, e_nb, e_snb, l_m, l_dm, wcob_i, wcob_j = ({} for _ in range(8))
    for region in REGIONS:
        mask = masks[region]
        if not mask.any():
            raise DataError(f"bispectrum region {region.upper()} is empty "
                            f"at rate {rate_hz} Hz and grid step {grid.grid_step}")
        a = mag[mask]
        peak = a.max()
        m_avg[region] = float(a.mean())
        p_avg[region] = float(np.mean(a ** 2))
        e_nb[region] = _entropy(a)
        e_snb[region] = _entropy(a ** 2)
        if peak > 0:
            floor = LOG_FLOOR_REL * peak
            l_m[region] = float(np.sum(np.log(np.maximum(a, floor))))
            total = a.sum()
            wcob_i[region] = float(np.sum(f1[mask] * a) / total)
            wcob_j[region] = float(np.sum(f2[mask] * a) / total)
        else:
            l_m[region] = 0.0
            wcob_i[region] = float(f1[mask].mean())
            wcob_j[region] = float(f2[mask].mean())
        if region in DIAGONAL_REGIONS:
            dmask = mask & diag
            if not dmask.any():
                raise DataError(f"bispectrum region {region.upper()} has no diagonal cells")
            d = mag[dmask]
            dpeak = d.max()
            if dpeak > 0:
                l_dm[region] = float(np.sum(np.log(np.maximum(d, LOG_FLOOR_REL * dpeak))))
            else:
                l_dm[region] = 0.0
    return BispectrumFeatures(m_avg, p_avg, e_nb, e_snb, l_m, l_dm, wcob_i, wcob_j)
