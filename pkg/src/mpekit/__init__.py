"""Mixture-proportion estimation toolkit.

Estimates the weight of a known component inside a mixture from samples of
both, including the subsampling meta-estimator that restores identifiability
when the background is not irreducible.
"""

from .core import (
    AcceptanceFn,
    DiscreteDist,
    Histogram,
    LabeledExample,
    MpeEstimate,
    SampleSet,
    make_mixture,
    residual_component,
)
from .errors import MpeError
from .estimators import (
    BaseEstimatorSpec,
    ClassifierParams,
    HistogramParams,
    estimate_kappa_max,
    rempe2_empirical,
    sumpe,
)
from .harness import TrialReport, aggregate, emit, run_experiment
from .learner import ClassifierModel, TrainConfig, gradient_check, predict_proba, train
from .population import (
    kappa_max,
    lsp_recover,
    posterior,
    rempe1_population,
    rempe2_population,
    subsample_density,
    theorem2_recover,
)
from .sampling import (
    GaussianMixtureSpec,
    RngStream,
    SpectrumSpec,
    rejection_sample,
    sample_discrete,
    sample_gaussian_mixture,
    simulate_spectrum,
)
from .scenarios import constant_alpha, cspl_alpha, reporting_alpha, unfolding_alpha

__version__ = "0.1.0"

__all__ = [
    "AcceptanceFn",
    "BaseEstimatorSpec",
    "ClassifierModel",
    "ClassifierParams",
    "DiscreteDist",
    "GaussianMixtureSpec",
    "Histogram",
    "HistogramParams",
    "LabeledExample",
    "MpeError",
    "MpeEstimate",
    "RngStream",
    "SampleSet",
    "SpectrumSpec",
    "TrainConfig",
    "TrialReport",
    "aggregate",
    "constant_alpha",
    "cspl_alpha",
    "emit",
    "estimate_kappa_max",
    "gradient_check",
    "kappa_max",
    "lsp_recover",
    "make_mixture",
    "posterior",
    "predict_proba",
    "rejection_sample",
    "rempe1_population",
    "rempe2_empirical",
    "rempe2_population",
    "reporting_alpha",
    "residual_component",
    "run_experiment",
    "sample_discrete",
    "sample_gaussian_mixture",
    "simulate_spectrum",
    "subsample_density",
    "sumpe",
    "theorem2_recover",
    "train",
    "unfolding_alpha",
]
