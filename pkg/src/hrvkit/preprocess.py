"""Noise reduction and resampling of interval series.

Three named pipelines are exposed because the processing order differs
between record families:

* ``ch4``  - resample R-R at 16 Hz (monotone cubic), convert to IHR,
  median filter.
* ``ch5``  - sym8 wavelet approximation, median filter, convert to IHR,
  resample at 16 Hz.
* ``ch6``  - resample R-R at 7 Hz, convert to IHR, impulse rejection
  (tau=4, window 11), sym8 wavelet approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dataset import RriSeries
from .errors import DataError, InsufficientDataError

# Symlet-8 decomposition low-pass filter (16 taps, orthonormal,
# 8 vanishing moments).
SYM8_LO = np.array([
    -0.0033824159510061256, -0.0005421323317911481, 0.03169508781149298,
    0.007607487324917605, -0.1432942383508097, -0.061273359067658524,
    0.4813596512583722, 0.7771857517005235, 0.3644418948353314,
    -0.05194583810770904, -0.027219029917056003, 0.049137179673607506,
    0.003808752013890615, -0.01495225833704823, -0.0003029205147213668,
    0.0018899503327594609,
])


@dataclass(frozen=True)
class IhrSeries:
    """Instantaneous heart rate samples (beats/min) at known times (s).

    ``rate_hz`` is set only when the samples are uniformly spaced.
    """

    values: np.ndarray
    sample_times: np.ndarray
    rate_hz: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        times = np.asarray(self.sample_times, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_times", times)
        if values.shape != times.shape or values.ndim != 1:
            raise DataError("IhrSeries values and sample_times must be 1-D and equal length")
        if np.any(values <= 0):
            raise DataError("IHR values must be positive")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ImpulseRejectConfig:
    """Threshold and median-window length for impulse rejection."""

    tau: float = 4.0
    wm: int = 11

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.wm < 3 or self.wm % 2 == 0:
            raise ValueError("wm must be odd and >= 3")


def rri_to_ihr(series: RriSeries) -> IhrSeries:
    """Convert intervals (ms) to instantaneous heart rate: 60000 / rri (bpm).

    Sample i is timestamped at the end of interval i.
    """
    values = 60000.0 / series.values
    times = series.end_times_ms / 1000.0
    return IhrSeries(values, times)


def median_filter(x, order: int = 5) -> np.ndarray:
    """Running median with the window clipped to valid indices at the edges.

    Output length equals input length. Even-count edge windows use the mean
    of the two central order statistics.
    """
    if order % 2 == 0 or order < 3:
        raise ValueError("median filter order must be odd and >= 3")
    x = np.asarray(x, dtype=float)
    half = order // 2
    n = x.size
    if n < order:
        return np.array([np.median(x[max(0, i - half):min(n, i + half + 1)])
                         for i in range(n)])
    out = np.empty(n)
    windows = np.lib.stride_tricks.sliding_window_view(x, order)
    out[half:n - half] = np.median(windows, axis=1)
    for i in range(half):
        out[i] = np.median(x[:i + half + 1])
        out[n - 1 - i] = np.median(x[n - 1 - i - half:])
    return out


def _dwt_approx_coeffs(ext: np.ndarray, lo: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Approximation coefficients of a zero-padded signal, all shifts kept."""
    corr = np.convolve(ext, lo[::-1], mode="full")
    # coefficient k sits at t = 2k + len(lo) - 1
    start = (len(lo) - 1) % 2
    tsel = np.arange(start, corr.size, 2)
    return corr[tsel], tsel


def wavelet_denoise(x) -> np.ndarray:
    """Level-1 sym8 approximation: decompose, zero the details, reconstruct.

    Uses half-point symmetric boundary extension; output length equals
    input length.
    """
    x = np.asarray(x, dtype=float)
    fl = SYM8_LO.size
    if x.size < fl:
        raise InsufficientDataError(f"wavelet denoising needs >= {fl} samples, got {x.size}")
    ext = np.pad(x, (fl - 1, fl - 1), mode="symmetric")
    coeffs, tsel = _dwt_approx_coeffs(ext, SYM8_LO)
    up = np.zeros(ext.size + fl - 1)
    up[tsel] = coeffs
    rec = np.convolve(up, SYM8_LO, mode="full")
    # synthesis contribution to ext[i] lives at rec[i + fl - 1]; drop the pad
    return rec[2 * (fl - 1): 2 * (fl - 1) + x.size]


def impulse_reject(ihr: IhrSeries, cfg: ImpulseRejectConfig = ImpulseRejectConfig()) -> IhrSeries:
    """Replace outlier heart-rate samples by the local median.

    A sample is an outlier when its deviation from the running median,
    scaled by 1.483 times the median absolute deviation, reaches ``tau``.
    A zero scale makes the statistic 0 for zero deviations and infinite
    otherwise, so isolated spikes on flat signals are still rejected.
    """
    if len(ihr) <= cfg.wm:
        raise InsufficientDataError(f"impulse rejection needs more than {cfg.wm} samples")
    values = ihr.values
    local_med = median_filter(values, cfg.wm)
    residual = np.abs(values - local_med)
    scale = 1.483 * np.median(residual)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = residual / scale
    d = np.where(residual == 0, 0.0, d)  # 0/0 -> 0; nonzero/0 stays inf
    out = np.where(d >= cfg.tau, local_med, values)
    return IhrSeries(out, ihr.sample_times, ihr.rate_hz)


def _pchip_resample(times: np.ndarray, values: np.ndarray, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    if times.size < 4:
        raise InsufficientDataError("resampling needs at least 4 samples")
    if rate_hz <= 0:
        raise ValueError("rate_hz must be positive")
    interp = PchipInterpolator(times, values)
    n_out = int(np.floor((times[-1] - times[0]) * rate_hz)) + 1
    new_times = times[0] + np.arange(n_out) / rate_hz
    return new_times, interp(new_times)


def resample_uniform(ihr: IhrSeries, rate_hz: float) -> IhrSeries:
    """Resample onto a uniform grid with a shape-preserving cubic (PCHIP).

    Monotone interpolation keeps every output inside [min(values),
    max(values)]. The grid starts at the first sample time and steps by
    1/rate_hz up to the last sample time.
    """
    new_times, new_values = _pchip_resample(ihr.sample_times, ihr.values, rate_hz)
    return IhrSeries(new_values, new_times, rate_hz=rate_hz)


PRESET_RATES = {"ch4": 16.0, "ch5": 16.0, "ch6": 7.0}


def preprocess_ch4(series: RriSeries, median_order: int = 5) -> IhrSeries:
    """Resample R-R at 16 Hz, convert to IHR, median-filter ectopic beats."""
    times = series.end_times_ms / 1000.0
    new_times, rr = _pchip_resample(times, series.values, PRESET_RATES["ch4"])
    ihr = 60000.0 / rr
    return IhrSeries(median_filter(ihr, median_order), new_times, rate_hz=PRESET_RATES["ch4"])


def preprocess_ch5(series: RriSeries, median_order: int = 5) -> IhrSeries:
    """Wavelet-smooth and median-filter the R-R signal, then IHR at 16 Hz."""
    rr = wavelet_denoise(series.values)
    rr = median_filter(rr, median_order)
    if np.any(rr <= 0):
        raise DataError("denoised R-R signal has non-positive values")
    cleaned = RriSeries(rr, resolution_ms=series.resolution_ms)
    return resample_uniform(rri_to_ihr(cleaned), PRESET_RATES["ch5"])


def preprocess_ch6(series: RriSeries,
                   cfg: ImpulseRejectConfig = ImpulseRejectConfig()) -> IhrSeries:
    """Resample R-R at 7 Hz, convert to IHR, impulse-reject, wavelet-smooth."""
    times = series.end_times_ms / 1000.0
    new_times, rr = _pchip_resample(times, series.values, PRESET_RATES["ch6"])
    ihr = IhrSeries(60000.0 / rr, new_times, rate_hz=PRESET_RATES["ch6"])
    ihr = impulse_reject(ihr, cfg)
    smoothed = wavelet_denoise(ihr.values)
    if np.any(smoothed <= 0):
        raise DataError("denoised IHR signal has non-positive values")
    return IhrSeries(smoothed, new_times, rate_hz=PRESET_RATES["ch6"])


PRESETS = {"ch4": preprocess_ch4, "ch5": preprocess_ch5, "ch6": preprocess_ch6}


def preprocess(series: RriSeries, preset: str) -> IhrSeries:
    try:
        fn = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown preprocessing preset {preset!r}") from None
    return fn(series)
