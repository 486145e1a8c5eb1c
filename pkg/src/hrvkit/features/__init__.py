from .time_domain import TimeDomainFeatures, time_domain_features
from .frequency import FreqDomainFeatures, PsdEstimate, band_power_features, welch_psd
from .bispectrum import (
    BispectrumFeatures,
    BispectrumGrid,
    CumulantGrid,
    bispectral_features,
    estimate_bispectrum,
    region_masks,
    third_order_cumulant,
)
from .nonlinear import (
    EntropyConfig,
    HjorthFeatures,
    PoincareFeatures,
    distribution_entropies,
    hjorth_parameters,
    poincare_features,
    sample_entropy,
)
from .paf import (
    DensityGrid,
    DifferenceMap,
    KdeConfig,
    PafFeatures,
    bivariate_kde_features,
    difference_map,
    diffmap_covariance,
    kde_bivariate,
    kde_univariate,
    univariate_kde_features,
)

__all__ = [
    "TimeDomainFeatures", "time_domain_features",
    "FreqDomainFeatures", "PsdEstimate", "band_power_features", "welch_psd",
    "BispectrumFeatures", "BispectrumGrid", "CumulantGrid",
    "bispectral_features", "estimate_bispectrum", "region_masks", "third_order_cumulant",
    "EntropyConfig", "HjorthFeatures", "PoincareFeatures",
    "distribution_entropies", "hjorth_parameters", "poincare_features", "sample_entropy",
    "DensityGrid", "DifferenceMap", "KdeConfig", "PafFeatures",
    "bivariate_kde_features", "difference_map", "diffmap_covariance",
    "kde_bivariate", "kde_univariate", "univariate_kde_features",
]
