"""Acceptance-function constructors for the practical settings.

Each constructor returns an ``AcceptanceFn`` equal to 1 outside a region A
and to a posterior-style retention probability inside it: a user-supplied
constant, a peak-baseline subtraction ratio on a spectrum, a source-domain
posterior classifier, or a reporting-propensity classifier.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .core import AcceptanceFn, Histogram, LabeledExample
from .errors import AnchorError, DomainError
from .learner import TrainConfig, predict_proba, train
from .sampling import RngStream


def constant_alpha(A: Callable[[np.ndarray], np.ndarray], s: float) -> AcceptanceFn:
    """Retention s on the region A, 1 elsewhere."""
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")

    def fn(pts: np.ndarray) -> np.ndarray:
        mask = np.asarray(A(pts), dtype=bool).reshape(-1)
        return np.where(mask, s, 1.0)

    return AcceptanceFn(fn, region=A, label=f"constant(s={s:g})")


def unfolding_alpha(
    hist_f: Histogram,
    peak_region: Tuple[int, int],
    anchor_width: int = 1,
) -> AcceptanceFn:
    """Baseline-subtraction acceptance over a spectral peak region.

    The background level under the peak is taken as the straight line between
    the mixture density just below and just above the region (each side
    averaged over ``anchor_width`` bins); inside the region the acceptance is
    1 minus baseline over observed density, clamped, and 1 elsewhere.
    """
    lo, hi = int(peak_region[0]), int(peak_region[1])
    if not (0 < lo <= hi < hist_f.n_bins - 1):
        raise DomainError("peak region must lie strictly inside the histogram")
    if anchor_width < 1 or lo - anchor_width < 0 or hi + anchor_width >= hist_f.n_bins:
        raise DomainError("anchor bins fall outside the histogram")
    dens = hist_f.densities()
    centers = hist_f.centers()
    left_bins = slice(lo - anchor_width, lo)
    right_bins = slice(hi + 1, hi + 1 + anchor_width)
    if hist_f.counts[left_bins].sum() == 0 and hist_f.counts[right_bins].sum() == 0:
        raise AnchorError("both interpolation anchors carry zero counts")
    x_left = float(np.mean(centers[left_bins]))
    x_right = float(np.mean(centers[right_bins]))
    y_left = float(np.mean(dens[left_bins]))
    y_right = float(np.mean(dens[right_bins]))
    slope = (y_right - y_left) / (x_right - x_left)

    edges = np.asarray(hist_f.edges)
    in_a = np.zeros(hist_f.n_bins, dtype=bool)
    in_a[lo : hi + 1] = True
    rho = np.clip(y_left + slope * (centers - x_left), 0.0, None)
    alpha_bins = np.ones(hist_f.n_bins)
    pos = in_a & (dens > 0)
    alpha_bins[pos] = np.clip(1.0 - rho[pos] / dens[pos], 0.0, 1.0)

    def bin_of(pts: np.ndarray) -> np.ndarray:
        v = pts[:, 0]
        return np.clip(np.searchsorted(edges, v, side="right") - 1, 0, hist_f.n_bins - 1)

    def fn(pts: np.ndarray) -> np.ndarray:
        return alpha_bins[bin_of(pts)]

    def region(pts: np.ndarray) -> np.ndarray:
        return in_a[bin_of(pts)]

    return AcceptanceFn(fn, region=region, label=f"unfolding[{lo},{hi}]")


def _posterior_alpha(
    examples: Sequence[LabeledExample],
    config: TrainConfig,
    threshold: float,
    rng: Optional[RngStream],
    region: Optional[Callable[[np.ndarray], np.ndarray]],
    label: str,
) -> AcceptanceFn:
    model = train(examples, config, rng)

    if region is not None:
        def in_region(pts: np.ndarray) -> np.ndarray:
            return np.asarray(region(pts), dtype=bool).reshape(-1)
    else:
        def in_region(pts: np.ndarray) -> np.ndarray:
            return np.asarray(predict_proba(model, pts)) > threshold

    def fn(pts: np.ndarray) -> np.ndarray:
        p = np.asarray(predict_proba(model, pts))
        return np.where(in_region(pts), p, 1.0)

    return AcceptanceFn(fn, region=in_region, label=label)


def cspl_alpha(
    source_data: Sequence[LabeledExample],
    config: TrainConfig,
    threshold: float = 0.5,
    rng: Optional[RngStream] = None,
    region: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> AcceptanceFn:
    """Acceptance from a source-domain posterior classifier.

    Fits g(x) ~ P(Y=1|X=x) on the labeled source sample; the acceptance is
    g(x) where the classifier exceeds the threshold (or on an explicit region
    when one is supplied) and 1 elsewhere.
    """
    if not (0.0 <= threshold <= 1.0):
        raise DomainError("threshold must lie in [0, 1]")
    return _posterior_alpha(source_data, config, threshold, rng, region, "cspl")


def reporting_alpha(
    report_data: Sequence[LabeledExample],
    config: TrainConfig,
    threshold: float = 0.6,
    rng: Optional[RngStream] = None,
) -> AcceptanceFn:
    """Acceptance from an estimated reporting propensity.

    ``report_data`` holds (x, y) pairs drawn from the true-condition
    population, y indicating whether the case was reported; the fitted
    propensity e(x) is used as the acceptance where it exceeds the threshold.
    """
    if not (0.0 <= threshold <= 1.0):
        raise DomainError("threshold must lie in [0, 1]")
    for ex in report_data:
        if ex.z is not None and ex.z != 1:
            raise DomainError("report data must come from the true-condition class")
    return _posterior_alpha(report_data, config, threshold, rng, None, "reporting")
