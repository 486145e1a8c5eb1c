"""Classifiers (k-NN, SMO soft-margin SVM, random forest), metrics, ROC/AUC
and patient-exclusive cross-validation.

Every classifier standardises features with statistics fitted on its own
training rows, predicts a binary label (1 = event) and emits a real-valued
score where higher means more event-like. All randomness flows from
explicit seeds, so identical inputs give identical models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .matrix import FeatureMatrix


# --------------------------------------------------------------------------
# standardisation

@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # per-feature SD; zero-SD columns pass through

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale = np.where(scale == 0, 1.0, scale)
        return cls(mean, scale)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale


# --------------------------------------------------------------------------
# k nearest neighbours

def minkowski_distance(a, b, p: float = math.inf) -> float:
    """Minkowski distance for p in {1, 2, inf} (inf = Chebyshev)."""
    gaps = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if p == math.inf:
        return float(gaps.max())
    if p in (1, 2):
        return float(np.sum(gaps ** p) ** (1.0 / p))
    raise ConfigError(f"unsupported Minkowski order {p}")


def _pairwise_distances(queries: np.ndarray, train: np.ndarray, p: float) -> np.ndarray:
    gaps = np.abs(queries[:, np.newaxis, :] - train[np.newaxis, :, :])
    if p == math.inf:
        return gaps.max(axis=2)
    return np.sum(gaps ** p, axis=2) ** (1.0 / p)


@dataclass(frozen=True)
class KnnModel:
    train_x: np.ndarray  # standardized
    train_y: np.ndarray
    k: int
    p: float
    standardizer: Standardizer

    def scores(self, queries: np.ndarray) -> np.ndarray:
        q = self.standardizer.transform(np.asarray(queries, dtype=float))
        dists = _pairwise_distances(q, self.train_x, self.p)
        # stable sort: distance ties resolve to the earlier training row
        nn = np.argsort(dists, axis=1, kind="stable")[:, :self.k]
        return self.train_y[nn].mean(axis=1)

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return (self.scores(queries) >= 0.5).astype(int)  # vote tie -> positive


def train_knn(x, y, k: int = 5, p: float = math.inf) -> KnnModel:
    if p not in (1, 2, math.inf):
        raise ConfigError(f"unsupported Minkowski order {p}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.shape[0] == 0:
        raise DataError("empty training set")
    if k > x.shape[0]:
        raise DataError(f"k={k} exceeds {x.shape[0]} training rows")
    std = Standardizer.fit(x)
    return KnnModel(std.transform(x), y, k, p, std)


def knn_predict(train_x, train_y, queries, k: int = 5, p: float = math.inf
                ) -> tuple[np.ndarray, np.ndarray]:
    """Labels and vote-fraction scores for query rows."""
    model = train_knn(train_x, train_y, k, p)
    scores = model.scores(np.asarray(queries, dtype=float))
    return (scores >= 0.5).astype(int), scores


# --------------------------------------------------------------------------
# support vector machine (sequential minimal optimization)

SMO_TOL = 1e-3
SMO_MAX_PASSES = 10 ** 5


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.6
    kernel: str = "linear"      # "linear" or "gaussian"
    kernel_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kernel not in ("linear", "gaussian"):
            raise ConfigError(f"unknown SVM kernel {self.kernel!r}")
        if self.c <= 0 or self.kernel_scale <= 0:
            raise ConfigError("C and kernel scale must be positive")


def _kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str) -> np.ndarray:
    if kernel == "linear":
        return a @ b.T
    sq = (np.sum(a ** 2, axis=1)[:, np.newaxis]
          + np.sum(b ** 2, axis=1)[np.newaxis, :] - 2.0 * (a @ b.T))
    return np.exp(-np.maximum(sq, 0.0))


@dataclass(frozen=True)
class SvmModel:
    support_x: np.ndarray  # standardized / kernel-scaled training rows
    support_coef: np.ndarray  # alpha_i * y_i (signed, y in {-1, +1})
    bias: float
    cfg: SvmConfig
    standardizer: Standardizer

    def scores(self, queries: np.ndarray) -> np.ndarray:
        q = self.standardizer.transform(np.asarray(queries, dtype=float))
        q = q / self.cfg.kernel_scale
        k = _kernel_matrix(q, self.support_x, self.cfg.kernel)
        return k @ self.support_coef + self.bias

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return (self.scores(queries) >= 0).astype(int)


def svm_train(x, y, cfg: SvmConfig = SvmConfig()) -> SvmModel:
    """Soft-margin dual via simplified SMO, run until a full sweep changes
    nothing (KKT satisfied within SMO_TOL) or the pass cap is hit."""
    x = np.asarray(x, dtype=float)
    y01 = np.asarray(y, dtype=int)
    if len(np.unique(y01)) < 2:
        raise DataError("SVM training needs both classes")
    std = Standardizer.fit(x)
    xs = std.transform(x) / cfg.kernel_scale
    ys = np.where(y01 == 1, 1.0, -1.0)
    n = xs.shape[0]
    gram = _kernel_matrix(xs, xs, cfg.kernel)

    rng = np.random.default_rng(cfg.seed)
    alphas = np.zeros(n)
    b = 0.0
    c = cfg.c

    def decision(i: int) -> float:
        return float(np.dot(alphas * ys, gram[:, i]) + b)

    def try_pair(i: int, j: int, err_i: float) -> bool:
        err_j = decision(j) - ys[j]
        ai_old, aj_old = alphas[i], alphas[j]
        if ys[i] == ys[j]:
            lo, hi = max(0.0, ai_old + aj_old - c), min(c, ai_old + aj_old)
        else:
            lo, hi = max(0.0, aj_old - ai_old), min(c, c + aj_old - ai_old)
        if hi - lo < 1e-12:
            return False
        eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
        if eta >= 0:
            return False
        aj = aj_old - ys[j] * (err_i - err_j) / eta
        aj = min(hi, max(lo, aj))
        if abs(aj - aj_old) < 1e-12:
            return False
        ai = ai_old + ys[i] * ys[j] * (aj_old - aj)
        alphas[i], alphas[j] = ai, aj
        nonlocal b
        b1 = b - err_i - ys[i] * (ai - ai_old) * gram[i, i] \
            - ys[j] * (aj - aj_old) * gram[i, j]
        b2 = b - err_j - ys[i] * (ai - ai_old) * gram[i, j] \
            - ys[j] * (aj - aj_old) * gram[j, j]
        if 0 < ai < c:
            b = b1
        elif 0 < aj < c:
            b = b2
        else:
            b = 0.5 * (b1 + b2)
        return True

    for _ in range(SMO_MAX_PASSES):
        changed = 0
        for i in range(n):
            err_i = decision(i) - ys[i]
            if not ((ys[i] * err_i < -SMO_TOL and alphas[i] < c)
                    or (ys[i] * err_i > SMO_TOL and alphas[i] > 0)):
                continue
            # scan partners in random order until one makes progress, so a
            # zero-change sweep certifies pairwise optimality within tol
            for j in rng.permutation(n):
                if j != i and try_pair(i, int(j), err_i):
                    changed += 1
                    break
        if changed == 0:
            break

    keep = alphas > 1e-10
    return SvmModel(xs[keep], (alphas * ys)[keep], b, cfg, std)


# --------------------------------------------------------------------------
# random forest

@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 64
    min_leaf: int = 4
    seed: int = 0


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self, label=None, feature=None, threshold=None, left=None, right=None):
        self.label = label
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


def _gini(y: np.ndarray) -> float:
    if y.size == 0:
        return 0.0
    p = y.mean()
    return 2.0 * p * (1.0 - p)


def _grow_tree(x: np.ndarray, y: np.ndarray, rng: np.random.Generator,
               min_leaf: int, n_candidates: int) -> _TreeNode:
    n = y.size
    majority = 1 if y.mean() >= 0.5 else 0  # leaf tie -> positive
    if n < 2 * min_leaf or np.all(y == y[0]):
        return _TreeNode(label=majority)
    best = None  # (impurity, feature, threshold)
    features = rng.choice(x.shape[1], size=min(n_candidates, x.shape[1]), replace=False)
    for f in features:
        col = x[:, f]
        levels = np.unique(col)
        if levels.size < 2:
            continue
        for threshold in (levels[:-1] + levels[1:]) / 2.0:
            left = col < threshold
            n_left = int(left.sum())
            if n_left < min_leaf or n - n_left < min_leaf:
                continue
            impurity = (n_left * _gini(y[left]) + (n - n_left) * _gini(y[~left])) / n
            if best is None or impurity < best[0]:
                best = (impurity, f, threshold)
    if best is None:
        return _TreeNode(label=majority)
    _, f, threshold = best
    mask = x[:, f] < threshold
    return _TreeNode(feature=int(f), threshold=float(threshold),
                     left=_grow_tree(x[mask], y[mask], rng, min_leaf, n_candidates),
                     right=_grow_tree(x[~mask], y[~mask], rng, min_leaf, n_candidates))


def _tree_predict(node: _TreeNode, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0], dtype=int)
    for i, row in enumerate(x):
        cur = node
        while cur.label is None:
            cur = cur.left if row[cur.feature] < cur.threshold else cur.right
        out[i] = cur.label
    return out


@dataclass(frozen=True)
class RfModel:
    trees: list
    standardizer: Standardizer
    cfg: RfConfig

    def scores(self, queries: np.ndarray) -> np.ndarray:
        q = self.standardizer.transform(np.asarray(queries, dtype=float))
        votes = np.stack([_tree_predict(t, q) for t in self.trees])
        return votes.mean(axis=0)

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return (self.scores(queries) >= 0.5).astype(int)


def rf_train(x, y, cfg: RfConfig = RfConfig()) -> RfModel:
    """Bagged Gini trees over sqrt(d) feature candidates per node.

    One seed sequence drives every bootstrap and candidate draw, so the
    forest is reproducible.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.shape[0] < 2 * cfg.min_leaf:
        raise DataError(f"random forest needs >= {2 * cfg.min_leaf} rows")
    std = Standardizer.fit(x)
    xs = std.transform(x)
    n_candidates = max(1, int(math.sqrt(x.shape[1])))
    trees = []
    for child_seed in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(child_seed)
        idx = rng.integers(0, xs.shape[0], xs.shape[0])
        trees.append(_grow_tree(xs[idx], y[idx], rng, cfg.min_leaf, n_candidates))
    return RfModel(trees, std, cfg)


# --------------------------------------------------------------------------
# classifier configuration shared by the CV driver and the CLI

@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    p: float = math.inf

    def train(self, x, y, seed: int = 0):
        return train_knn(x, y, self.k, self.p)

    def describe(self) -> dict:
        return {"classifier": "knn", "k": self.k,
                "p": "inf" if self.p == math.inf else self.p}


@dataclass(frozen=True)
class SvmTrainConfig:
    c: float = 1.6
    kernel: str = "linear"
    kernel_scale: float = 1.0

    def train(self, x, y, seed: int = 0):
        return svm_train(x, y, SvmConfig(self.c, self.kernel, self.kernel_scale, seed))

    def describe(self) -> dict:
        return {"classifier": f"svm-{self.kernel}", "C": self.c,
                "kernel_scale": self.kernel_scale}


@dataclass(frozen=True)
class RfTrainConfig:
    n_trees: int = 64
    min_leaf: int = 4

    def train(self, x, y, seed: int = 0):
        return rf_train(x, y, RfConfig(self.n_trees, self.min_leaf, seed))

    def describe(self) -> dict:
        return {"classifier": "rf", "n_trees": self.n_trees, "min_leaf": self.min_leaf}


# --------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @classmethod
    def from_predictions(cls, y_true: np.ndarray, y_pred: np.ndarray) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=int)
        y_pred = np.asarray(y_pred, dtype=int)
        return cls(tp=int(np.sum((y_true == 1) & (y_pred == 1))),
                   tn=int(np.sum((y_true == 0) & (y_pred == 0))),
                   fp=int(np.sum((y_true == 0) & (y_pred == 1))),
                   fn=int(np.sum((y_true == 1) & (y_pred == 0))))


def confusion_metrics(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """(sensitivity, specificity, accuracy); empty denominators score 0."""
    if cm.total == 0:
        raise DataError("empty confusion matrix")
    sn = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else 0.0
    sp = cm.tn / (cm.tn + cm.fp) if (cm.tn + cm.fp) > 0 else 0.0
    return sn, sp, (cm.tp + cm.tn) / cm.total


def roc_auc(scores, labels) -> tuple[list[tuple[float, float, float]], float]:
    """ROC points (fpr, tpr, threshold) over distinct scores, and the AUC.

    Tied scores collapse into one threshold; the AUC is the tie-averaged
    pair count (Mann-Whitney), which equals the trapezoid over these points.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs both classes present")

    points = [(0.0, 0.0, math.inf)]
    tp = fp = 0
    for threshold in np.unique(scores)[::-1]:
        at = scores == threshold
        tp += int(np.sum(at & (labels == 1)))
        fp += int(np.sum(at & (labels == 0)))
        points.append((fp / n_neg, tp / n_pos, float(threshold)))

    pos = np.sort(scores[labels == 1])
    wins = 0.0
    for s in scores[labels == 0]:
        wins += n_pos - np.searchsorted(pos, s, side="right")
        wins += 0.5 * (np.searchsorted(pos, s, side="right") - np.searchsorted(pos, s, side="left"))
    return points, float(wins / (n_pos * n_neg))


# --------------------------------------------------------------------------
# cross-validation

@dataclass(frozen=True)
class LeaveOnePatientOut:
    def fold_patients(self, patients: list[str], seed: int = 0) -> list[list[str]]:
        return [[p] for p in patients]

    def describe(self) -> str:
        return "lopo"


@dataclass(frozen=True)
class KFoldPatients:
    k: int
    seed: int = 0

    def fold_patients(self, patients: list[str], seed: int = 0) -> list[list[str]]:
        if self.k > len(patients):
            raise DataError(f"{self.k}-fold needs at least {self.k} patients")
        rng = np.random.default_rng(self.seed)
        order = [patients[i] for i in rng.permutation(len(patients))]
        base, extra = divmod(len(patients), self.k)
        folds, start = [], 0
        for i in range(self.k):
            size = base + (1 if i < extra else 0)
            folds.append(order[start:start + size])
            start += size
        return folds

    def describe(self) -> str:
        return f"kfold:{self.k}"


@dataclass
class EvalReport:
    """Pooled and per-fold evaluation results, JSON round-trippable."""

    scheme: str
    classifier: dict
    selected_features: list[str]
    pooled: ConfusionMatrix
    folds: list[dict]
    roc: list[tuple[float, float, float]]
    auc: float
    mean_fold_acc: float
    seed: int
    config: dict = field(default_factory=dict)

    @property
    def sensitivity(self) -> float:
        return confusion_metrics(self.pooled)[0]

    @property
    def specificity(self) -> float:
        return confusion_metrics(self.pooled)[1]

    @property
    def accuracy(self) -> float:
        return confusion_metrics(self.pooled)[2]

    def to_dict(self) -> dict:
        sn, sp, acc = confusion_metrics(self.pooled)
        # json cannot carry inf: the leading ROC threshold becomes "inf"
        roc = [[fpr, tpr, "inf" if math.isinf(thr) else thr]
               for fpr, tpr, thr in self.roc]
        return {
            "scheme": self.scheme,
            "classifier": self.classifier,
            "selected_features": self.selected_features,
            "pooled": {"tp": self.pooled.tp, "tn": self.pooled.tn,
                       "fp": self.pooled.fp, "fn": self.pooled.fn},
            "metrics": {"sn": sn, "sp": sp, "acc": acc, "auc": self.auc},
            "mean_fold_acc": self.mean_fold_acc,
            "folds": self.folds,
            "roc": roc,
            "seed": self.seed,
            "config": self.config,
        }

    def to_json(self, path: str | Path | None = None) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False)
        if path is not None:
            Path(path).write_text(payload + "\n", encoding="utf-8")
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        pooled = ConfusionMatrix(**data["pooled"])
        roc = [(float(a), float(b), math.inf if c == "inf" else float(c))
               for a, b, c in data["roc"]]
        return cls(scheme=data["scheme"], classifier=data["classifier"],
                   selected_features=data["selected_features"], pooled=pooled,
                   folds=data["folds"], roc=roc, auc=data["metrics"]["auc"],
                   mean_fold_acc=data["mean_fold_acc"], seed=data["seed"],
                   config=data.get("config", {}))

    @classmethod
    def from_json(cls, path: str | Path) -> "EvalReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def cross_validate(matrix: FeatureMatrix, scheme, classifier_cfg,
                   feature_subset: list[str] | None = None, seed: int = 0,
                   config_echo: dict | None = None) -> EvalReport:
    """Patient-exclusive cross-validation with per-fold standardisation.

    Folds are formed over patients, never records, so no patient appears in
    both sides of any fold. Confusion counts are pooled over folds; scores
    are pooled for a single ROC/AUC.
    """
    if feature_subset is not None:
        matrix = matrix.select_features(feature_subset)
    patients = sorted(set(matrix.patient_ids))
    folds = scheme.fold_patients(patients, seed)

    pooled = ConfusionMatrix()
    fold_rows = []
    fold_accs = []
    all_scores = np.zeros(matrix.n_records)
    all_predicted = np.zeros(matrix.n_records, dtype=int)
    for fold_patients in folds:
        test_mask = np.isin(matrix.patient_ids.astype(str), fold_patients)
        train = matrix.select_rows(~test_mask)
        model = classifier_cfg.train(train.values, train.labels, seed)
        scores = model.scores(matrix.values[test_mask])
        preds = model.predict(matrix.values[test_mask])
        all_scores[test_mask] = scores
        all_predicted[test_mask] = preds
        cm = ConfusionMatrix.from_predictions(matrix.labels[test_mask], preds)
        pooled = pooled + cm
        fold_accs.append((cm.tp + cm.tn) / cm.total)
        fold_rows.append({"patients": list(fold_patients), "tp": cm.tp,
                          "tn": cm.tn, "fp": cm.fp, "fn": cm.fn})

    roc, auc = roc_auc(all_scores, matrix.labels)
    return EvalReport(
        scheme=scheme.describe(),
        classifier=classifier_cfg.describe(),
        selected_features=list(matrix.feature_names),
        pooled=pooled,
        folds=fold_rows,
        roc=roc,
        auc=auc,
        mean_fold_acc=float(np.mean(fold_accs)),
        seed=seed,
        config=config_echo or {},
    )
