"""Feature ranking: Student's t prefilter, mutual-information mRMR, and the
first-local-maximum threshold rule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import DataError
from .matrix import FeatureMatrix

DEFAULT_ALPHA = 0.005
DEFAULT_MI_BINS = 8


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float


@dataclass(frozen=True)
class RankedFeatures:
    names: list[str]
    scores: list[float]
    method: str = "ttest+mrmr"

    def top(self, k: int) -> list[str]:
        return self.names[:k]


def students_t_test(a, b) -> TTestResult:
    """Two-sample pooled-variance t test, two-tailed p value.

    Zero pooled variance degenerates to (0, 1) for equal means and
    (+/-inf, 0) otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DataError("t test needs at least 2 samples per group")
    na, nb = a.size, b.size
    df = na + nb - 2
    pooled_var = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / df
    mean_gap = a.mean() - b.mean()
    if pooled_var == 0:
        if mean_gap == 0:
            return TTestResult(0.0, 1.0)
        return TTestResult(math.copysign(math.inf, mean_gap), 0.0)
    t = mean_gap / math.sqrt(pooled_var * (1.0 / na + 1.0 / nb))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(float(t), p)


def t_filter(matrix: FeatureMatrix, alpha: float = DEFAULT_ALPHA
             ) -> tuple[FeatureMatrix, dict[str, float]]:
    """Keep columns whose two-class p value is below alpha.

    Returns the filtered matrix and the removed columns with their p values.
    Removing everything is an error suggesting a larger alpha.
    """
    pos = matrix.labels == 1
    if not pos.any() or pos.all():
        raise DataError("t filter needs both classes present")
    kept, removed = [], {}
    for j, name in enumerate(matrix.feature_names):
        col = matrix.values[:, j]
        result = students_t_test(col[pos], col[~pos])
        # alpha >= 1 keeps everything, including p = 1 degenerate columns
        if alpha >= 1.0 or result.p < alpha:
            kept.append(name)
        else:
            removed[name] = result.p
    if not kept:
        raise DataError(f"t filter removed every feature at alpha={alpha}; relax alpha")
    return matrix.select_features(kept), removed


def _discretize(v: np.ndarray, bins: int) -> np.ndarray:
    """Integer codes: discrete inputs pass through, floats get equal-width bins."""
    v = np.asarray(v)
    if v.dtype.kind in "biu":
        _, codes = np.unique(v, return_inverse=True)
        return codes
    v = v.astype(float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros(v.size, dtype=int)
    codes = np.floor((v - lo) / (hi - lo) * bins).astype(int)
    return np.clip(codes, 0, bins - 1)


def mutual_information(x, y, bins: int = DEFAULT_MI_BINS) -> float:
    """Plug-in mutual information (nats) on a shared histogram discretisation.

    Continuous inputs are coded into equal-width bins; integer inputs are
    used as categories directly. Contributions are summed in sorted order so
    I(x, y) == I(y, x) bitwise.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.size != y.size:
        raise DataError("mutual information needs equal-length inputs")
    cx = _discretize(x, bins)
    cy = _discretize(y, bins)
    counts = np.zeros((cx.max() + 1, cy.max() + 1), dtype=np.int64)
    np.add.at(counts, (cx, cy), 1)
    n = x.size
    # marginals from integer counts, so a transposed input yields the exact
    # same term multiset; summing in sorted order then makes I symmetric bitwise
    joint = counts / n
    px = counts.sum(axis=1) / n
    py = counts.sum(axis=0) / n
    mask = counts > 0
    terms = joint[mask] * np.log(joint[mask] / np.outer(px, py)[mask])
    return float(np.sum(np.sort(terms)))


def mrmr_rank(matrix: FeatureMatrix, bins: int = DEFAULT_MI_BINS) -> RankedFeatures:
    """Greedy minimum-redundancy maximum-relevance ordering.

    The first pick maximises I(feature; class); every later pick maximises
    I(x; class) - mean over selected of I(x; x_selected). Ties resolve to
    the earlier column. Scores record the criterion value at selection time.
    """
    d = len(matrix.feature_names)
    if d < 2:
        raise DataError("mRMR needs at least 2 features")
    cols = [matrix.values[:, j] for j in range(d)]
    relevance = np.array([mutual_information(c, matrix.labels, bins) for c in cols])

    order: list[int] = []
    scores: list[float] = []
    remaining = list(range(d))
    red_sum = np.zeros(d)
    while remaining:
        if not order:
            crit = relevance[remaining]
        else:
            crit = np.array([relevance[j] - red_sum[j] / len(order) for j in remaining])
        pick = remaining[int(np.argmax(crit))]
        scores.append(float(crit[remaining.index(pick)]))
        order.append(pick)
        remaining.remove(pick)
        for j in remaining:
            red_sum[j] += mutual_information(cols[j], cols[pick], bins)
    return RankedFeatures([matrix.feature_names[j] for j in order], scores)


def first_local_max(curve) -> int:
    """1-based index of the first local maximum of an accuracy curve.

    A maximal run of equal values counts as one candidate and reports its
    first index; the ends of the curve behave as -infinity, so a curve that
    never falls returns the first index of its final (maximal) plateau.
    """
    curve = list(curve)
    if not curve:
        raise ValueError("empty accuracy curve")
    n = len(curve)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and curve[j + 1] == curve[i]:
            j += 1
        left = curve[i - 1] if i > 0 else -math.inf
        right = curve[j + 1] if j + 1 < n else -math.inf
        if curve[i] >= left and curve[i] > right:
            return i + 1
        i = j + 1
    return n  # unreachable: the global max run always qualifies


def threshold_determination(ranked: RankedFeatures, matrix: FeatureMatrix,
                            classifier_cfg, scheme, k_max: int | None = None
                            ) -> tuple[int, list[float]]:
    """Accuracy of the top-k prefix for k = 1..k_max, and the chosen k.

    Runs the configured cross-validation per prefix and applies the
    first-local-maximum rule to the pooled accuracy curve.
    """
    from .classify_eval import cross_validate  # local import to avoid a cycle

    if not ranked.names:
        raise DataError("empty ranking")
    k_max = len(ranked.names) if k_max is None else min(k_max, len(ranked.names))
    curve = []
    for k in range(1, k_max + 1):
        report = cross_validate(matrix.select_features(ranked.top(k)),
                                scheme, classifier_cfg)
        curve.append(report.accuracy)
    return first_local_max(curve), curve
