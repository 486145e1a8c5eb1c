"""Poincare dispersion, sample entropy, histogram entropies and Hjorth parameters."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError


@dataclass(frozen=True)
class PoincareFeatures:
    sd1: float
    sd2: float
    ratio: float
    sdsd: float
    sdrr: float

    def as_dict(self) -> dict[str, float]:
        return {"sd1": self.sd1, "sd2": self.sd2, "sd1_sd2": self.ratio}


@dataclass(frozen=True)
class EntropyConfig:
    m: int = 2
    r_coeff: float = 0.2
    alpha: float = 2.0
    bins: int = 16

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("embedding length m must be >= 1")
        if self.r_coeff <= 0:
            raise ValueError("r_coeff must be positive")
        if self.alpha < 0 or self.alpha == 1:
            raise ValueError("alpha must be >= 0 and != 1")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")


@dataclass(frozen=True)
class HjorthFeatures:
    activity: float
    mobility: float
    complexity: float

    def as_dict(self) -> dict[str, float]:
        return {"hjorth_activity": self.activity,
                "hjorth_mobility": self.mobility,
                "hjorth_complexity": self.complexity}


def poincare_features(rr) -> PoincareFeatures:
    """Minor/major dispersion of the return map.

    sd1 = sqrt(sdsd^2 / 2), sd2 = sqrt(2 sdrr^2 - sdsd^2 / 2), where sdrr is
    the population SD of the values and sdsd the root mean square of
    successive differences. A negative sd2 radicand is clamped to zero with
    a warning; ratio falls back to 0 when sd2 is 0.
    """
    rr = np.asarray(rr, dtype=float)
    if rr.size < 3:
        raise InsufficientDataError("Poincare features need at least 3 samples")
    diffs = np.diff(rr)
    sdsd = float(np.sqrt(np.mean(diffs ** 2)))
    sdrr = float(rr.std())
    sd1 = float(np.sqrt(0.5 * sdsd ** 2))
    radicand = 2.0 * sdrr ** 2 - 0.5 * sdsd ** 2
    if radicand < 0:
        warnings.warn("sd2 radicand negative; clamped to 0", stacklevel=2)
        radicand = 0.0
    sd2 = float(np.sqrt(radicand))
    ratio = sd1 / sd2 if sd2 > 0 else 0.0
    return PoincareFeatures(sd1, sd2, ratio, sdsd, sdrr)


def _template_match_counts(x: np.ndarray, m: int, r: float) -> tuple[int, int]:
    """Ordered template pairs (i != j) within Chebyshev distance r.

    Both the length-m and length-(m+1) counts restrict templates to the
    n - m offsets where the longer template exists. Rows are processed in
    blocks to bound memory on long inputs.
    """
    n_templates = x.size - m
    a = b = 0
    block = max(1, (1 << 21) // max(n_templates, 1))
    for start in range(0, n_templates, block):
        stop = min(n_templates, start + block)
        dist_m = np.zeros((stop - start, n_templates))
        for offset in range(m):
            dist_m = np.maximum(
                dist_m,
                np.abs(x[start + offset:stop + offset, np.newaxis]
                       - x[np.newaxis, offset:offset + n_templates]))
        dist_m1 = np.maximum(
            dist_m,
            np.abs(x[start + m:stop + m, np.newaxis]
                   - x[np.newaxis, m:m + n_templates]))
        rows = np.arange(stop - start)
        dist_m[rows, rows + start] = np.inf  # exclude self-matches
        dist_m1[rows, rows + start] = np.inf
        a += int(np.sum(dist_m1 < r))
        b += int(np.sum(dist_m < r))
    return a, b


def sample_entropy(x, cfg: EntropyConfig = EntropyConfig()) -> float:
    """SampEn = -ln(A / B) with Chebyshev-distance template matching.

    The tolerance is r_coeff times the population SD. Degenerate cases keep
    the output finite: a constant signal scores 0, and when no length-(m+1)
    pair matches the result is capped at ln(number of possible pairs) with
    a warning.
    """
    x = np.asarray(x, dtype=float)
    if x.size < cfg.m + 2:
        raise InsufficientDataError(f"sample entropy needs >= {cfg.m + 2} samples")
    sd = x.std()
    if sd == 0:
        return 0.0
    a, b = _template_match_counts(x, cfg.m, cfg.r_coeff * sd)
    if a == 0 or b == 0:
        n_templates = x.size - cfg.m
        cap = float(np.log(n_templates * (n_templates - 1)))
        warnings.warn("sample entropy: no template matches; returning cap", stacklevel=2)
        return cap
    return float(-np.log(a / b))


def _histogram_probs(x: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.array([1.0])
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts / x.size
    return p[p > 0]


def distribution_entropies(x, cfg: EntropyConfig = EntropyConfig()) -> tuple[float, float]:
    """Renyi and Tsallis entropies of order alpha from an equal-width histogram.

    Probabilities come from ``cfg.bins`` bins over [min, max]; empty bins
    are dropped. A constant signal gives (0, 0).
    """
    x = np.asarray(x, dtype=float)
    if x.size < cfg.bins:
        raise InsufficientDataError(f"distribution entropies need >= {cfg.bins} samples")
    p = _histogram_probs(x, cfg.bins)
    s = float(np.sum(p ** cfg.alpha))
    renyi = np.log(s) / (1.0 - cfg.alpha)
    tsallis = (1.0 - s) / (cfg.alpha - 1.0)
    return float(renyi), float(tsallis)


def hjorth_parameters(x) -> HjorthFeatures:
    """Activity, mobility and complexity with first-difference derivatives.

    A zero-variance input returns (0, 0, 0) by convention.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("Hjorth parameters need at least 3 samples")
    var0 = x.var()
    if var0 == 0:
        return HjorthFeatures(0.0, 0.0, 0.0)
    d1 = np.diff(x)
    d2 = np.diff(d1)
    var1 = d1.var()
    mobility = float(np.sqrt(var1 / var0))
    if var1 == 0:
        return HjorthFeatures(float(var0), mobility, 0.0)
    mobility_d = float(np.sqrt(d2.var() / var1))
    return HjorthFeatures(float(var0), mobility, mobility_d / mobility)
