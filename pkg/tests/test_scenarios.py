import numpy as np
import pytest

from mpekit.core import DiscreteDist, Histogram, labeled_from_arrays, make_mixture
from mpekit.errors import AnchorError, DomainError
from mpekit.experiments import SYNTH_G, SYNTH_H, build_synthetic_trial
from mpekit.learner import TrainConfig
from mpekit.population import theorem2_recover
from mpekit.sampling import RngStream
from mpekit.scenarios import (
    constant_alpha,
    cspl_alpha,
    reporting_alpha,
    unfolding_alpha,
)

FAST = TrainConfig(epochs=150, learning_rate=0.02, optimizer="adam")


class TestConstantAlpha:
    def test_s_one_is_identity(self):
        alpha = constant_alpha(lambda p: np.ones(len(p), dtype=bool), 1.0)
        assert np.all(alpha(np.zeros((5, 1))) == 1.0)

    def test_everywhere_half_scales_recovery(self):
        f = DiscreteDist([0.35, 0.4, 0.25])
        h = DiscreteDist([0.5, 0.5, 0.0])
        alpha = constant_alpha(lambda p: np.ones(len(p), dtype=bool), 0.5)
        vec = alpha(np.arange(3, dtype=float))
        assert theorem2_recover(f, h, vec) == pytest.approx(0.5 * 0.7, abs=1e-12)

    def test_tight_constant_recovers_worked_value(self):
        f = DiscreteDist([0.35, 0.4, 0.25])
        h = DiscreteDist([0.5, 0.5, 0.0])
        alpha = constant_alpha(lambda p: p[:, 0] == 0, 0.5 / 0.7)
        vec = alpha(np.arange(3, dtype=float))
        assert theorem2_recover(f, h, vec) == pytest.approx(0.5, abs=1e-12)

    def test_s_validation(self):
        with pytest.raises(DomainError):
            constant_alpha(lambda p: np.ones(len(p), dtype=bool), 0.0)


class TestUnfoldingAlpha:
    def test_flat_spectrum_with_doubling_peak(self):
        # flat level 10, peak region [4, 6] at exactly twice the level
        counts = [10, 10, 10, 10, 20, 20, 20, 10, 10, 10]
        hist = Histogram(np.arange(11, dtype=float), counts)
        alpha = unfolding_alpha(hist, (4, 6))
        pts = np.array([[4.5], [6.5], [7.5], [0.5]])
        vals = alpha(pts)
        assert vals[:2] == pytest.approx([0.5, 0.5], abs=1e-12)
        assert vals[2] == 1.0 and vals[3] == 1.0
        assert alpha.in_region(pts).tolist() == [True, True, False, False]

    def test_no_peak_gives_zero_inside_region(self):
        hist = Histogram(np.arange(11, dtype=float), [10] * 10)
        alpha = unfolding_alpha(hist, (4, 6))
        assert np.all(alpha(np.array([[4.5], [5.5]])) == 0.0)

    def test_zero_anchors_raise(self):
        counts = [0, 0, 0, 0, 20, 20, 20, 0, 0, 1]
        hist = Histogram(np.arange(11, dtype=float), counts)
        with pytest.raises(AnchorError):
            unfolding_alpha(hist, (4, 6))

    def test_region_must_be_interior(self):
        hist = Histogram(np.arange(11, dtype=float), [10] * 10)
        with pytest.raises(DomainError):
            unfolding_alpha(hist, (0, 3))
        with pytest.raises(DomainError):
            unfolding_alpha(hist, (4, 9))

    def test_shrinking_peak_drives_alpha_down(self):
        prev = 1.0
        for peak in (40, 30, 20, 10):
            counts = [10, 10, 10, 10, peak, 10, 10]
            hist = Histogram(np.arange(8, dtype=float), counts)
            alpha = unfolding_alpha(hist, (4, 4))
            val = float(alpha(np.array([[4.5]]))[0])
            assert val < prev
            prev = val


class TestCsplAlpha:
    def test_threshold_one_gives_identity(self):
        gen = RngStream(0).generator()
        X = gen.normal(size=200)
        y = (X > 0).astype(int)
        alpha = cspl_alpha(labeled_from_arrays(X, y), FAST, threshold=1.0, rng=RngStream(1))
        pts = np.linspace(-3, 3, 50).reshape(-1, 1)
        assert np.all(alpha(pts) == 1.0)

    def test_follows_classifier_inside_region(self):
        gen = RngStream(0).generator()
        X = np.concatenate([gen.normal(-2, 1, 400), gen.normal(2, 1, 400)])
        y = np.concatenate([np.ones(400), np.zeros(400)])
        alpha = cspl_alpha(labeled_from_arrays(X, y), FAST, rng=RngStream(1))
        left = alpha(np.array([[-3.0]]))[0]
        right = alpha(np.array([[3.0]]))[0]
        assert left > 0.9  # confident posterior, inside A
        assert right == 1.0  # below threshold, acceptance reverts to 1

    def test_explicit_region_override(self):
        gen = RngStream(0).generator()
        X = gen.normal(size=300)
        y = (gen.random(300) < 0.5).astype(int)
        alpha = cspl_alpha(
            labeled_from_arrays(X, y),
            FAST,
            rng=RngStream(1),
            region=lambda p: p[:, 0] <= 0,
        )
        pts = np.array([[-1.0], [1.0]])
        vals = alpha(pts)
        assert vals[1] == 1.0
        assert vals[0] < 1.0


class TestReportingAlpha:
    def test_fits_constant_propensity(self):
        gen = RngStream(3).generator()
        X = gen.normal(size=2000)
        y = (gen.random(2000) < 0.7).astype(int)
        alpha = reporting_alpha(
            labeled_from_arrays(X, y, z=np.ones(2000)), FAST, rng=RngStream(4)
        )
        vals = alpha(np.linspace(-1.5, 1.5, 9).reshape(-1, 1))
        assert np.all(np.abs(vals - 0.7) < 0.1)

    def test_rejects_non_condition_rows(self):
        bad = labeled_from_arrays([[0.0]], [1], z=[0])
        with pytest.raises(DomainError):
            reporting_alpha(bad, FAST)

    def test_threshold_cuts_low_propensity_region(self):
        gen = RngStream(5).generator()
        X = np.linspace(-3, 3, 3000)
        prop = np.where(X < 0, 0.9, 0.2)
        y = (gen.random(3000) < prop).astype(int)
        alpha = reporting_alpha(labeled_from_arrays(X, y), FAST, rng=RngStream(6))
        assert alpha(np.array([[2.5]]))[0] == 1.0  # propensity below 0.6
        assert 0.7 < alpha(np.array([[-2.5]]))[0] < 1.0


class TestPosteriorGuardrail:
    def test_plugin_acceptance_rarely_undercuts_posterior(self):
        # statistical guardrail: the estimated acceptance should sit above the
        # true posterior minus 0.1 on at least 95 percent of evaluation points
        kappa = 0.25
        trial = build_synthetic_trial(
            kappa, 1000, 1000, "plugin", RngStream(11).split(0)
        )
        pts = trial.x_f.points
        hv = SYNTH_H.pdf(pts[:, 0])
        fv = (1 - kappa) * SYNTH_G.pdf(pts[:, 0]) + kappa * hv
        post = kappa * hv / fv
        frac = np.mean(trial.alpha(pts) >= post - 0.1)
        assert frac >= 0.95
