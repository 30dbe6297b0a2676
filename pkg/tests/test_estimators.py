import numpy as np
import pytest

from mpekit.core import AcceptanceFn, DiscreteDist, Histogram, SampleSet, make_mixture
from mpekit.errors import DimensionError, DomainError, InsufficientDataError
from mpekit.estimators import (
    BaseEstimatorSpec,
    ClassifierParams,
    HistogramParams,
    estimate_kappa_max,
    rempe2_empirical,
    sumpe,
)
from mpekit.learner import TrainConfig
from mpekit.population import rempe2_population
from mpekit.sampling import RngStream, sample_discrete

G3 = DiscreteDist([0.2, 0.3, 0.5])
H3 = DiscreteDist([0.5, 0.5, 0.0])
F3 = make_mixture(G3, H3, 0.5)

PLAIN = BaseEstimatorSpec(
    "histogram_ratio", histogram=HistogramParams(tau=1, corrected=False)
)
FAST_CLF = BaseEstimatorSpec(
    "classifier_ratio",
    classifier=ClassifierParams(train=TrainConfig(epochs=60, learning_rate=0.05, optimizer="adam")),
)


def exact_histograms(scale=1000):
    edges = [-0.5, 0.5, 1.5, 2.5]
    hf = Histogram(edges, (F3.mass * 20 * scale).round().astype(int))
    hh = Histogram(edges, (H3.mass * 20 * scale).round().astype(int))
    return hf, hh


class TestSpecs:
    def test_param_validation(self):
        with pytest.raises(DomainError):
            HistogramParams(tau=0)
        with pytest.raises(DomainError):
            HistogramParams(delta=1.0)
        with pytest.raises(DomainError):
            HistogramParams(edges=(1.0, 1.0, 2.0))
        with pytest.raises(DomainError):
            ClassifierParams(aggregation="median")
        with pytest.raises(DomainError):
            ClassifierParams(q=0.0)
        with pytest.raises(DomainError):
            BaseEstimatorSpec("kernel")

    def test_default_tag(self):
        assert BaseEstimatorSpec("histogram_ratio").tag == "histogram"


class TestHistogramEstimator:
    def test_exact_counts_worked_value(self):
        hf, hh = exact_histograms()
        est = estimate_kappa_max(hf, hh, PLAIN)
        assert est.kappa_hat == pytest.approx(0.7, abs=1e-12)
        assert est.argmin_witness == 0

    def test_corrected_at_least_plain(self):
        hf, hh = exact_histograms()
        for tau in (1, 5):
            plain = BaseEstimatorSpec(
                "histogram_ratio", histogram=HistogramParams(tau=tau, corrected=False)
            )
            corrected = BaseEstimatorSpec(
                "histogram_ratio", histogram=HistogramParams(tau=tau, corrected=True)
            )
            assert (
                estimate_kappa_max(hf, hh, corrected).kappa_hat
                >= estimate_kappa_max(hf, hh, plain).kappa_hat
            )

    def test_all_bins_below_tau(self):
        hf, hh = exact_histograms(scale=1)  # counts of 10 per occupied bin
        spec = BaseEstimatorSpec(
            "histogram_ratio", histogram=HistogramParams(tau=100, corrected=False)
        )
        with pytest.raises(InsufficientDataError):
            estimate_kappa_max(hf, hh, spec)

    def test_histograms_must_share_edges(self):
        hf, _ = exact_histograms()
        other = Histogram([0, 1, 2, 3], hf.counts)
        with pytest.raises(DimensionError):
            estimate_kappa_max(hf, other, PLAIN)

    def test_multidimensional_requires_classifier(self):
        s = SampleSet(np.zeros((10, 2)))
        with pytest.raises(DimensionError):
            estimate_kappa_max(s, s, PLAIN)

    def test_empty_sample_rejected(self):
        s = SampleSet(np.zeros((0, 1)))
        hf, _ = exact_histograms()
        with pytest.raises(InsufficientDataError):
            estimate_kappa_max(s, hf, PLAIN)


class TestClassifierEstimator:
    def test_identical_samples_estimate_near_one(self):
        gen = RngStream(0).generator()
        x = gen.normal(size=5000)
        spec = BaseEstimatorSpec(
            "classifier_ratio",
            classifier=ClassifierParams(
                train=TrainConfig(epochs=100, learning_rate=0.05, optimizer="adam"),
                aggregation="quantile",
                q=0.5,
            ),
        )
        est = estimate_kappa_max(SampleSet(x), SampleSet(x), spec, RngStream(1))
        assert est.kappa_hat == pytest.approx(1.0, abs=0.1)

    def test_deterministic_given_stream(self):
        gen = RngStream(0).generator()
        xf = SampleSet(gen.normal(size=500))
        xh = SampleSet(gen.normal(size=500))
        a = estimate_kappa_max(xf, xh, FAST_CLF, RngStream(2))
        b = estimate_kappa_max(xf, xh, FAST_CLF, RngStream(2))
        assert a.kappa_hat == b.kappa_hat


class TestSumpe:
    def test_alpha_one_identity(self):
        rng = RngStream(5)
        xf = sample_discrete(F3, 2000, rng.split(7))
        xh = sample_discrete(H3, 2000, rng.split(8))
        ones = AcceptanceFn(lambda p: np.ones(len(p)))
        meta = sumpe(xf, xh, ones, PLAIN, rng)
        base = estimate_kappa_max(xf, xh, PLAIN, rng.split(1))
        assert meta.kappa_hat == base.kappa_hat
        assert meta.c_hat == 1.0

    def test_alpha_one_identity_classifier(self):
        rng = RngStream(6)
        gen = rng.split(9).generator()
        xf = SampleSet(gen.normal(size=300))
        xh = SampleSet(gen.normal(1.0, 1.0, size=300))
        ones = AcceptanceFn(lambda p: np.ones(len(p)))
        meta = sumpe(xf, xh, ones, FAST_CLF, rng)
        base = estimate_kappa_max(xf, xh, FAST_CLF, rng.split(1))
        assert meta.kappa_hat == base.kappa_hat

    def test_records_kept_fraction(self):
        rng = RngStream(7)
        xf = sample_discrete(F3, 10_000, rng.split(0))
        xh = sample_discrete(H3, 10_000, rng.split(1))
        half = AcceptanceFn(lambda p: np.full(len(p), 0.5))
        est = sumpe(xf, xh, half, PLAIN, rng.split(2))
        assert est.c_hat == pytest.approx(0.5, abs=0.02)


class TestRempe2Empirical:
    def test_p_zero_equals_base(self):
        rng = RngStream(8)
        xf = sample_discrete(F3, 2000, rng.split(0))
        xh = sample_discrete(H3, 2000, rng.split(1))
        re = rempe2_empirical(xf, xh, PLAIN, p=0.0, rng=rng.split(2))
        base = estimate_kappa_max(xf, xh, PLAIN, rng.split(2).split(1))
        assert re.kappa_hat == base.kappa_hat

    def test_matches_population_regrouping_at_scale(self):
        rng = RngStream(9)
        xf = sample_discrete(F3, 200_000, rng.split(0))
        xh = sample_discrete(H3, 200_000, rng.split(1))
        base = estimate_kappa_max(xf, xh, PLAIN)
        # regroup exactly the mass of the minimizing bin (bin 0 has f = 0.35)
        re = rempe2_empirical(xf, xh, PLAIN, p=0.35, rng=rng.split(2))
        _, pop_value = rempe2_population(F3, H3)
        assert re.kappa_hat < base.kappa_hat
        assert re.kappa_hat == pytest.approx(pop_value, abs=0.02)

    def test_p_validation(self):
        xf = sample_discrete(F3, 100, RngStream(0))
        with pytest.raises(DomainError):
            rempe2_empirical(xf, xf, PLAIN, p=0.9)
