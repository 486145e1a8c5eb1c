"""hrvkit: HRV feature extraction, selection and arrhythmia-prediction evaluation."""

from .dataset import (
    DatasetManifest,
    EventRecord,
    Label,
    RriSeries,
    Split,
    extract_event_window,
    load_manifest,
    parse_rri_csv,
    split_learning_evaluation,
)
from .matrix import FeatureMatrix
from .pipeline import PAF_FEATURES, VTVF_FEATURES, PipelineConfig, extract_features
from .preprocess import (
    IhrSeries,
    ImpulseRejectConfig,
    impulse_reject,
    median_filter,
    preprocess,
    resample_uniform,
    rri_to_ihr,
    wavelet_denoise,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetManifest", "EventRecord", "Label", "RriSeries", "Split",
    "extract_event_window", "load_manifest", "parse_rri_csv",
    "split_learning_evaluation", "FeatureMatrix", "PipelineConfig",
    "extract_features", "VTVF_FEATURES", "PAF_FEATURES",
    "IhrSeries", "ImpulseRejectConfig", "impulse_reject", "median_filter",
    "preprocess", "resample_uniform", "rri_to_ihr", "wavelet_denoise",
    "__version__",
]
