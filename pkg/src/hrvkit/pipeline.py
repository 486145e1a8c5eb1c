"""End-to-end feature extraction: window, preprocess, compute feature vectors.

The registry fixes the canonical column names and their order for the two
tasks: the 50-feature ventricular set (time, frequency, bispectrum,
nonlinear families) and the 36-feature atrial set (29 classic + 7
difference-map features).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import features as ft
from .dataset import DatasetManifest, RriSeries, extract_event_window
from .errors import ConfigError, DataError, HrvkitError
from .matrix import FeatureMatrix
from .preprocess import PRESET_RATES, preprocess

_BISPEC_REGION_NAMES = [
    f"{family}_{region}"
    for family in ("m_avg", "p_avg", "e_nb", "e_snb", "l_m")
    for region in ft.bispectrum.REGIONS
] + [f"l_dm_{region}" for region in ft.bispectrum.DIAGONAL_REGIONS] + [
    f"{family}_{region}"
    for family in ("wcob_i", "wcob_j")
    for region in ft.bispectrum.REGIONS
]

TIME_FEATURES = ("mean_nn", "sdnn", "rmssd", "nn50", "pnn50", "hrv_tri")
FREQ_FEATURES = ("p_vlf", "p_lf", "p_hf", "lf_hf_ratio")
BISPEC_FEATURES = tuple(_BISPEC_REGION_NAMES)
NONLINEAR_FEATURES = ("sd1", "sd2", "sd1_sd2", "sampen", "renyi", "tsallis",
                      "hjorth_activity", "hjorth_mobility", "hjorth_complexity")
PAF_NOVEL_FEATURES = ("diffmap_cov", "kde_area_y", "kde_energy_y",
                      "surf_min", "surf_max", "kde_volume_xy", "kde_energy_xy")

VTVF_FEATURES = TIME_FEATURES + FREQ_FEATURES + BISPEC_FEATURES + NONLINEAR_FEATURES

PAF_CLASSIC_FEATURES = (
    ("mean_nn", "sdnn", "nn50", "pnn50")
    + FREQ_FEATURES
    + tuple(f"m_avg_{r}" for r in ft.bispectrum.REGIONS)
    + tuple(f"p_avg_{r}" for r in ft.bispectrum.REGIONS)
    + tuple(f"l_m_{r}" for r in ft.bispectrum.REGIONS)
    + tuple(f"l_dm_{r}" for r in ft.bispectrum.DIAGONAL_REGIONS)
    + ("sd1", "sd2", "sd1_sd2", "sampen", "renyi", "tsallis")
)
PAF_FEATURES = PAF_CLASSIC_FEATURES + PAF_NOVEL_FEATURES

TASK_FEATURES = {"vtvf": VTVF_FEATURES, "paf": PAF_FEATURES}

FAMILIES = {
    "time": TIME_FEATURES,
    "frequency": FREQ_FEATURES,
    "bispectrum": BISPEC_FEATURES,
    "nonlinear": NONLINEAR_FEATURES,
    "paf": PAF_NOVEL_FEATURES,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; the seed is mandatory for reproducibility."""

    preset: str                      # ch4 | ch5 | ch6
    seed: int
    window_s: float = 300.0
    guard_s: float = 10.0
    bispectrum_max_lag: int = 64
    bispectrum_grid: int = 256
    families: tuple[str, ...] | None = None   # None = all for the task

    def __post_init__(self):
        if self.preset not in PRESET_RATES:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.window_s <= 0:
            raise ConfigError("window_s must be positive")

    @property
    def task(self) -> str:
        return "paf" if self.preset == "ch6" else "vtvf"

    @property
    def rate_hz(self) -> float:
        return PRESET_RATES[self.preset]

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = TASK_FEATURES[self.task]
        if self.families is None:
            return names
        allowed = set()
        for family in self.families:
            if family not in FAMILIES:
                raise ConfigError(f"unknown feature family {family!r}")
            allowed.update(FAMILIES[family])
        return tuple(n for n in names if n in allowed)

    def echo(self) -> dict:
        return {
            "preset": self.preset,
            "task": self.task,
            "window_s": self.window_s,
            "guard_s": self.guard_s,
            "rate_hz": self.rate_hz,
            "bispectrum_max_lag": self.bispectrum_max_lag,
            "bispectrum_grid": self.bispectrum_grid,
            "seed": self.seed,
            "families": list(self.families) if self.families else "all",
        }


def prepare_record(series: RriSeries, config: PipelineConfig):
    """Windowed and preprocessed series for a record."""
    window = extract_event_window(series, config.window_s, config.guard_s)
    return preprocess(window, config.preset)


def extract_record_features(series: RriSeries, config: PipelineConfig) -> dict[str, float]:
    """Feature vector of one record: window, preprocess, run the needed families."""
    ihr = prepare_record(series, config)
    x = ihr.values
    rate = config.rate_hz
    names = config.feature_names
    wanted = set(names)

    out: dict[str, float] = {}
    if wanted & set(TIME_FEATURES):
        out.update(ft.time_domain_features(x).as_dict())
    if wanted & set(FREQ_FEATURES):
        out.update(ft.band_power_features(ft.welch_psd(x, rate)).as_dict())
    if wanted & set(BISPEC_FEATURES):
        grid = ft.estimate_bispectrum(x, config.bispectrum_max_lag, config.bispectrum_grid)
        out.update(ft.bispectral_features(grid, rate).as_dict())
    if wanted & set(NONLINEAR_FEATURES):
        out.update(ft.poincare_features(x).as_dict())
        cfg = ft.EntropyConfig()
        out["sampen"] = ft.sample_entropy(x, cfg)
        out["renyi"], out["tsallis"] = ft.distribution_entropies(x, cfg)
        out.update(ft.hjorth_parameters(x).as_dict())
    if wanted & set(PAF_NOVEL_FEATURES):
        # difference-map features read the cleaned R-R signal in ms
        rr_clean = 60000.0 / x
        out.update(ft.paf.paf_features(rr_clean).as_dict())

    return {name: out[name] for name in names}


def _extract_one(args) -> tuple[str, dict[str, float] | None, str | None]:
    record, base_dir, config = args
    try:
        series = record.load_series(base_dir)
        return record.record_id, extract_record_features(series, config), None
    except HrvkitError as exc:
        return record.record_id, None, str(exc)


def extract_features(manifest: DatasetManifest, config: PipelineConfig,
                     jobs: int = 1) -> tuple[FeatureMatrix, dict[str, str]]:
    """Feature matrix over all manifest records, in manifest order.

    Records that fail (too short, unreadable) are skipped and reported in
    the returned mapping of record_id to reason.
    """
    tasks = [(rec, manifest.base_dir, config) for rec in manifest.records]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, tasks))
    else:
        results = [_extract_one(t) for t in tasks]

    by_id = {rid: (feats, err) for rid, feats, err in results}
    names = list(config.feature_names)
    rows, labels, label_names, patient_ids, record_ids = [], [], [], [], []
    skipped: dict[str, str] = {}
    for rec in manifest.records:
        feats, err = by_id[rec.record_id]
        if feats is None:
            skipped[rec.record_id] = err
            continue
        rows.append([feats[n] for n in names])
        labels.append(1 if rec.label.is_event else 0)
        label_names.append(rec.label.value)
        patient_ids.append(rec.patient_id)
        record_ids.append(rec.record_id)
    if not rows:
        raise DataError("no record produced features; "
                        + "; ".join(f"{k}: {v}" for k, v in skipped.items()))
    matrix = FeatureMatrix(names, np.asarray(rows), np.asarray(labels),
                           np.asarray(patient_ids, dtype=object),
                           np.asarray(record_ids, dtype=object),
                           np.asarray(label_names, dtype=object))
    return matrix, skipped


def with_window(config: PipelineConfig, window_s: float) -> PipelineConfig:
    return replace(config, window_s=window_s)
