"""Welch power spectral density and the VLF/LF/HF band powers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError

VLF_BAND = (0.0, 0.04)
LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.4)

# Fallback for LF/HF when the HF band carries no power at all.
RATIO_CAP = 1e6


@dataclass(frozen=True)
class PsdEstimate:
    freqs: np.ndarray
    power: np.ndarray
    rate_hz: float
    seg_len: int
    overlap: int
    window: str


@dataclass(frozen=True)
class FreqDomainFeatures:
    p_vlf: float
    p_lf: float
    p_hf: float
    lf_hf_ratio: float

    def as_dict(self) -> dict[str, float]:
        return {"p_vlf": self.p_vlf, "p_lf": self.p_lf,
                "p_hf": self.p_hf, "lf_hf_ratio": self.lf_hf_ratio}


def _taper(window: str, n: int) -> np.ndarray:
    if window == "hann":
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))
    if window == "boxcar":
        return np.ones(n)
    raise ValueError(f"unknown taper {window!r}")


def welch_psd(x, rate_hz: float, seg_len: int = 256, overlap_frac: float = 0.5,
              window: str = "hann") -> PsdEstimate:
    """One-sided Welch periodogram average, density-scaled.

    Segments are mean-removed and tapered; the density normalisation makes
    the integral of the PSD approximate the signal variance. Matches the
    common periodic-taper convention.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= overlap_frac < 1:
        raise ValueError("overlap_frac must be in [0, 1)")
    if x.size < seg_len:
        raise InsufficientDataError(f"Welch PSD needs >= {seg_len} samples, got {x.size}")

    noverlap = int(overlap_frac * seg_len)
    step = seg_len - noverlap
    taper = _taper(window, seg_len)
    norm = rate_hz * np.sum(taper ** 2)

    acc = np.zeros(seg_len // 2 + 1)
    n_segs = 0
    for start in range(0, x.size - seg_len + 1, step):
        seg = x[start:start + seg_len]
        seg = (seg - seg.mean()) * taper
        spec = np.abs(np.fft.rfft(seg)) ** 2 / norm
        spec[1:] *= 2.0
        if seg_len % 2 == 0:
            spec[-1] /= 2.0
        acc += spec
        n_segs += 1
    freqs = np.fft.rfftfreq(seg_len, d=1.0 / rate_hz)
    return PsdEstimate(freqs, acc / n_segs, rate_hz, seg_len, noverlap, window)


def _band_integral(freqs: np.ndarray, power: np.ndarray, lo: float, hi: float) -> float:
    """Trapezoidal integral over [lo, hi] with interpolated band edges."""
    inner = (freqs > lo) & (freqs < hi)
    xs = np.concatenate(([lo], freqs[inner], [hi]))
    ys = np.concatenate(([np.interp(lo, freqs, power)],
                         power[inner],
                         [np.interp(hi, freqs, power)]))
    return float(np.trapezoid(ys, xs))


def band_power_features(psd: PsdEstimate) -> FreqDomainFeatures:
    """Integrate the PSD over the VLF, LF and HF bands; guard the LF/HF ratio."""
    if psd.freqs[-1] < HF_BAND[1]:
        raise InsufficientDataError(
            f"PSD covers only {psd.freqs[-1]:.3f} Hz, need {HF_BAND[1]} Hz")
    p_vlf = _band_integral(psd.freqs, psd.power, *VLF_BAND)
    p_lf = _band_integral(psd.freqs, psd.power, *LF_BAND)
    p_hf = _band_integral(psd.freqs, psd.power, *HF_BAND)
    if p_hf > 0:
        ratio = p_lf / p_hf
    else:
        ratio = 0.0 if p_lf == 0 else RATIO_CAP
    return FreqDomainFeatures(p_vlf, p_lf, p_hf, ratio)
