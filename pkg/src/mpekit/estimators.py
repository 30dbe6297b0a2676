"""Empirical proportion estimators and the subsampling meta-algorithm.

Two base estimators of the maximal proportion of a known component inside a
mixture: a histogram ratio infimum and a classifier-based density-ratio
aggregate.  On top of either base, ``sumpe`` applies acceptance-weighted
rejection sampling and rescales, and ``rempe2_empirical`` applies the
regrouping baseline that moves low-ratio mixture points into the component
sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np

from .core import AcceptanceFn, Histogram, MpeEstimate, SampleSet, labeled_from_arrays
from .errors import DimensionError, DomainError, InsufficientDataError
from .learner import ClassifierModel, TrainConfig, predict_proba, train
from .sampling import RngStream, rejection_sample

RATIO_PROBA_CLAMP = 1e-6

Samples = Union[SampleSet, Histogram]


@dataclass(frozen=True)
class HistogramParams:
    bins: int = 32
    edges: Optional[tuple] = None  # overrides bins when given
    tau: int = 5  # min component-sample count for a bin to enter the infimum
    delta: float = 0.05
    corrected: bool = True

    def __post_init__(self):
        if self.bins < 2:
            raise DomainError("need at least 2 bins")
        if self.tau < 1:
            raise DomainError("tau must be at least 1 count")
        if not (0.0 < self.delta < 1.0):
            raise DomainError("delta must lie in (0, 1)")
        if self.edges is not None:
            e = tuple(float(v) for v in self.edges)
            if len(e) < 3 or any(b <= a for a, b in zip(e, e[1:])):
                raise DomainError("edges must be strictly increasing, length >= 3")
            object.__setattr__(self, "edges", e)


@dataclass(frozen=True)
class ClassifierParams:
    train: TrainConfig = field(default_factory=TrainConfig)
    aggregation: str = "quantile"  # "min", "quantile" or "mean" (harmonic)
    q: float = 0.05

    def __post_init__(self):
        if self.aggregation not in ("min", "quantile", "mean"):
            raise DomainError("aggregation must be 'min', 'quantile' or 'mean'")
        if not (0.0 < self.q < 1.0):
            raise DomainError("q must lie in (0, 1)")


@dataclass(frozen=True)
class BaseEstimatorSpec:
    """Which base estimator to run and with what knobs."""

    kind: str = "histogram_ratio"
    histogram: HistogramParams = field(default_factory=HistogramParams)
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    tag: str = ""

    def __post_init__(self):
        if self.kind not in ("histogram_ratio", "classifier_ratio"):
            raise DomainError("kind must be 'histogram_ratio' or 'classifier_ratio'")
        if not self.tag:
            object.__setattr__(self, "tag", self.kind.split("_")[0])


def _as_sample(x: Samples) -> SampleSet:
    return x.as_points() if isinstance(x, Histogram) else x


def _shared_edges(x_f: SampleSet, x_h: SampleSet, params: HistogramParams) -> np.ndarray:
    if params.edges is not None:
        return np.asarray(params.edges, dtype=float)
    pooled = np.concatenate([x_f.values_1d(), x_h.values_1d()])
    lo, hi = float(pooled.min()), float(pooled.max())
    if hi <= lo:
        hi = lo + 1.0
    # widen a hair so max values fall inside the last bin
    span = hi - lo
    return np.linspace(lo - 1e-9 * span, hi + 1e-9 * span, params.bins + 1)


def _histogram_kappa(
    x_f: Samples, x_h: Samples, params: HistogramParams
) -> Tuple[float, int]:
    if isinstance(x_f, Histogram) and isinstance(x_h, Histogram) and params.edges is None:
        if not np.array_equal(x_f.edges, x_h.edges):
            raise DimensionError("histogram inputs must share edges")
        hist_f, hist_h = x_f, x_h
    else:
        sf, sh = _as_sample(x_f), _as_sample(x_h)
        if sf.d != 1 or sh.d != 1:
            raise DimensionError("histogram estimator handles 1-d data only")
        edges = _shared_edges(sf, sh, params)
        hist_f = Histogram.from_sample(sf, edges)
        hist_h = Histogram.from_sample(sh, edges)
    n, m = hist_f.total, hist_h.total
    f_hat = hist_f.counts / n
    h_hat = hist_h.counts / m
    valid = hist_h.counts >= params.tau
    if not np.any(valid):
        raise InsufficientDataError(
            f"no bin has at least tau={params.tau} component counts"
        )
    if params.corrected:
        eps_f = np.sqrt(np.log(2.0 / params.delta) / (2.0 * n))
        eps_h = np.sqrt(np.log(2.0 / params.delta) / (2.0 * m))
        ratios = (f_hat + eps_f) / np.maximum(h_hat - eps_h, 1e-12)
    else:
        ratios = np.divide(
            f_hat, h_hat, out=np.full_like(f_hat, np.inf), where=h_hat > 0
        )
    ratios = np.where(valid, ratios, np.inf)
    witness = int(np.argmin(ratios))
    return min(1.0, float(ratios[witness])), witness


def _ratio_model(
    x_f: SampleSet, x_h: SampleSet, params: ClassifierParams, rng: RngStream
) -> ClassifierModel:
    """Discriminator between the component sample (label 1) and the mixture."""
    X = np.vstack([x_h.points, x_f.points])
    y = np.concatenate([np.ones(x_h.n), np.zeros(x_f.n)])
    return train(labeled_from_arrays(X, y), params.train, rng)


def _pointwise_ratio(
    model: ClassifierModel, points: np.ndarray, n_f: int, n_h: int
) -> np.ndarray:
    g = np.clip(
        np.asarray(predict_proba(model, points)),
        RATIO_PROBA_CLAMP,
        1.0 - RATIO_PROBA_CLAMP,
    )
    return (n_h / n_f) * (1.0 - g) / g


def _classifier_kappa(
    x_f: SampleSet, x_h: SampleSet, params: ClassifierParams, rng: RngStream
) -> float:
    model = _ratio_model(x_f, x_h, params, rng)
    r = _pointwise_ratio(model, x_h.points, x_f.n, x_h.n)
    if params.aggregation == "min":
        kappa = float(np.min(r))
    elif params.aggregation == "quantile":
        kappa = float(np.quantile(r, params.q))
    else:
        kappa = float(r.size / np.sum(1.0 / r))
    return min(1.0, max(0.0, kappa))


def estimate_kappa_max(
    x_f: Samples, x_h: Samples, spec: BaseEstimatorSpec, rng: Optional[RngStream] = None
) -> MpeEstimate:
    """Plug-in estimate of the largest weight of the component inside the mixture.

    ``x_f`` is the mixture sample and ``x_h`` the component sample; either may
    be a pre-binned histogram.  Multidimensional data requires the
    classifier-based estimator.
    """
    sf, sh = _as_sample(x_f), _as_sample(x_h)
    if sf.n == 0 or sh.n == 0:
        raise InsufficientDataError("both samples must be non-empty")
    if sf.d != sh.d:
        raise DimensionError("mixture and component samples must share dimension")
    if spec.kind == "histogram_ratio":
        kappa, witness = _histogram_kappa(x_f, x_h, spec.histogram)
        return MpeEstimate(kappa, 1.0, witness, method_tag=spec.tag)
    if rng is None:
        rng = RngStream(spec.classifier.train.seed)
    kappa = _classifier_kappa(sf, sh, spec.classifier, rng)
    return MpeEstimate(kappa, 1.0, None, method_tag=spec.tag)


def sumpe(
    x_f: Samples,
    x_h: Samples,
    alpha: AcceptanceFn,
    base: BaseEstimatorSpec,
    rng: RngStream,
) -> MpeEstimate:
    """Subsampling meta-estimator: thin the mixture sample with the acceptance
    function, estimate on the retained part, and rescale by the kept fraction.
    """
    sf = _as_sample(x_f)
    if sf.n == 0:
        raise InsufficientDataError("mixture sample must be non-empty")
    kept = rejection_sample(sf, alpha, rng.split(0))
    c_hat = kept.n / sf.n
    base_est = estimate_kappa_max(kept, x_h, base, rng.split(1))
    kappa = min(1.0, max(0.0, c_hat * base_est.kappa_hat))
    return MpeEstimate(kappa, c_hat, base_est.argmin_witness, method_tag=base.tag)


def rempe2_empirical(
    x_f: Samples,
    x_h: Samples,
    base: BaseEstimatorSpec,
    p: float = 0.1,
    rng: Optional[RngStream] = None,
) -> MpeEstimate:
    """Regrouping meta-estimator: the fraction p of mixture points with the
    smallest estimated mixture/component density ratio is copied into the
    component sample before running the base estimator.
    """
    if not (0.0 <= p <= 0.5):
        raise DomainError("p must lie in [0, 0.5]")
    sf, sh = _as_sample(x_f), _as_sample(x_h)
    if rng is None:
        rng = RngStream(0)
    k = int(np.floor(p * sf.n))
    if k == 0:
        return estimate_kappa_max(sf, sh, base, rng.split(1))
    if base.kind == "histogram_ratio":
        edges = _shared_edges(sf, sh, base.histogram)
        hist_f = Histogram.from_sample(sf, edges)
        hist_h = Histogram.from_sample(sh, edges)
        bin_ratio = np.divide(
            hist_f.counts / hist_f.total,
            hist_h.counts / hist_h.total,
            out=np.full(hist_f.n_bins, np.inf),
            where=hist_h.counts > 0,
        )
        idx = np.clip(
            np.searchsorted(edges, sf.values_1d(), side="right") - 1,
            0,
            hist_f.n_bins - 1,
        )
        scores = bin_ratio[idx]
    else:
        model = _ratio_model(sf, sh, base.classifier, rng.split(0))
        scores = _pointwise_ratio(model, sf.points, sf.n, sh.n)
    moved = sf.points[np.argsort(scores, kind="stable")[:k]]
    augmented = SampleSet(np.vstack([sh.points, moved]))
    est = estimate_kappa_max(sf, augmented, base, rng.split(1))
    return replace(est, method_tag=base.tag)
