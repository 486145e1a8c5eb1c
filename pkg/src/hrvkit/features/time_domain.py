"""Classic time-domain variability measures.

All standard deviations in this package are population ones (divide by N).
Successive-difference statistics use the plain second moment about zero, so
RMSSD and SDSD coincide and the alternating-series closed forms hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError

# 1/128 s expressed in ms: the conventional histogram bin for the
# triangular index.
DEFAULT_BIN_WIDTH_MS = 7.8125


@dataclass(frozen=True)
class TimeDomainFeatures:
    mean_nn: float
    sdnn: float
    rmssd: float
    nn50: int
    pnn50: float
    hrv_tri: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mean_nn": self.mean_nn,
            "sdnn": self.sdnn,
            "rmssd": self.rmssd,
            "nn50": float(self.nn50),
            "pnn50": self.pnn50,
            "hrv_tri": self.hrv_tri,
        }


def time_domain_features(x, bin_width: float = DEFAULT_BIN_WIDTH_MS) -> TimeDomainFeatures:
    """Mean, SDNN, RMSSD, NN50, pNN50 and the triangular index.

    NN50 counts successive differences whose magnitude exceeds 50 (input
    units); pNN50 divides by the N-1 successive differences. The triangular
    index is N over the tallest histogram bin, bins of ``bin_width`` anchored
    at min(x).
    """
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("time-domain features need at least 2 samples")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")

    diffs = np.diff(x)
    nn50 = int(np.sum(np.abs(diffs) > 50.0))
    span = x.max() - x.min()
    n_bins = max(1, int(np.floor(span / bin_width)) + 1)
    counts, _ = np.histogram(x, bins=n_bins, range=(x.min(), x.min() + n_bins * bin_width))
    return TimeDomainFeatures(
        mean_nn=float(x.mean()),
        sdnn=float(x.std()),
        rmssd=float(np.sqrt(np.mean(diffs ** 2))),
        nn50=nn50,
        pnn50=nn50 / diffs.size,
        hrv_tri=x.size / int(counts.max()),
    )
