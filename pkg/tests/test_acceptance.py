"""End-to-end acceptance gate.

Each test prints exactly one [PASS]/[FAIL] line per numbered criterion before
asserting, so a ``pytest -s`` run reads as a checklist.  Criteria 1-7 are
exact identities on finite distributions, 8-10 are statistical properties of
the samplers and the learner, 11-14 reproduce the expected error patterns of
the shipped experiment configs, and 15 is byte-level determinism of the
harness artifacts.
"""

import functools
import json

import numpy as np
import scipy.stats

from mpekit.checks import run_population_checks
from mpekit.cli import shipped_config
from mpekit.core import AcceptanceFn, DiscreteDist, labeled_from_arrays, make_mixture
from mpekit.estimators import BaseEstimatorSpec, HistogramParams, sumpe
from mpekit.harness import aggregate, emit, run_experiment
from mpekit.learner import TrainConfig, gradient_check, train
from mpekit.sampling import RngStream, rejection_sample, sample_discrete


def two_blob_data(n=200, d=1, seed=0):
    gen = RngStream(seed).generator()
    x0 = gen.normal(-1.0, 1.0, size=(n, d))
    x1 = gen.normal(1.0, 1.0, size=(n, d))
    X = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n), np.ones(n)])
    return labeled_from_arrays(X, y)


def _check(num: int, desc: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] criterion {num:02d}: {desc}{suffix}")
    assert ok, f"criterion {num:02d}: {desc}{suffix}"


@functools.lru_cache(maxsize=None)
def _population_results():
    return {r.name: r for r in run_population_checks(seed=0, n_triples=1000)}


@functools.lru_cache(maxsize=None)
def _run_shipped(name: str, overrides: str = "{}"):
    cfg = dict(shipped_config(name))
    cfg.update(json.loads(overrides))
    reports = run_experiment(cfg)
    failures = [r for r in reports if r.error]
    assert not failures, failures[:3]
    return aggregate(reports)


def _rows(summary, variant, estimator=None):
    return {
        row["kappa_star"]: row
        for row in summary
        if row["variant"] == variant
        and (estimator is None or row["estimator"] == estimator)
    }


class TestExactIdentities:
    def _single(self, num, desc, check_name):
        r = _population_results()[check_name]
        _check(num, desc, r.passed, r.detail)

    def test_criterion_01_decomposition(self):
        self._single(
            1, "mixture decomposition identity within 1e-10 on 1000 random triples",
            "mixture decomposition identity",
        )

    def test_criterion_02_posterior_product(self):
        self._single(
            2, "max posterior times ratio infimum recovers the true weight",
            "posterior-supremum product identity",
        )

    def test_criterion_03_subset_recovery(self):
        self._single(
            3, "subset recovery identity on 10 random subsets per triple",
            "subset recovery identity",
        )

    def test_criterion_04_tilted_recovery_and_sandwich(self):
        a = _population_results()["tilted recovery identity"]
        b = _population_results()["dominating acceptance sandwich"]
        _check(
            4, "tilted recovery exact for tight acceptance, sandwiched when dominating",
            a.passed and b.passed, a.detail,
        )

    def test_criterion_05_mixture_regrouping(self):
        self._single(
            5, "regrouped ratio infimum never larger, strictly smaller off full support",
            "mixture regrouping bound",
        )

    def test_criterion_06_latent_regrouping(self):
        self._single(
            6, "latent regrouping strictly between truth and plain infimum, exact when tight",
            "latent regrouping sandwich",
        )

    def test_criterion_07_bias_reduction_predicate(self):
        self._single(
            7, "strict bias reduction predicate on worked partition, false for zero overlap",
            "bias reduction predicate",
        )


G3 = DiscreteDist([0.2, 0.3, 0.5])
H3 = DiscreteDist([0.5, 0.5, 0.0])
F3 = make_mixture(G3, H3, 0.5)
PLAIN3 = BaseEstimatorSpec(
    "histogram_ratio",
    histogram=HistogramParams(edges=(-0.5, 0.5, 1.5, 2.5), tau=1, corrected=False),
)


def _alpha_from_vector(vec):
    table = np.asarray(vec, dtype=float)

    def fn(points):
        idx = np.asarray(points, dtype=float).reshape(len(points), -1)[:, 0]
        return table[idx.astype(int)]

    return AcceptanceFn(fn)


class TestSamplingAndLearner:
    def test_criterion_08_rejection_fidelity(self):
        n = 100_000
        gen = RngStream(42, 3).generator()
        worst_p = 1.0
        worst_z = 0.0
        for trial in range(5):
            k = int(gen.integers(4, 17))
            f = DiscreteDist(gen.dirichlet(np.ones(k)))
            alpha_vec = gen.uniform(0.2, 1.0, size=k)
            c = float(np.sum(alpha_vec * f.mass))
            target = DiscreteDist(alpha_vec * f.mass / c)
            x_f = sample_discrete(f, n, RngStream(100 + trial))
            kept = rejection_sample(
                x_f, _alpha_from_vector(alpha_vec), RngStream(200 + trial)
            )
            z = abs(kept.n - n * c) / np.sqrt(n * c * (1 - c))
            worst_z = max(worst_z, z)
            observed = np.bincount(kept.values_1d().astype(int), minlength=k)
            expected = kept.n * target.mass
            p_value = scipy.stats.chisquare(observed, expected).pvalue
            worst_p = min(worst_p, p_value)
        ok = worst_z <= 3.0 and worst_p >= 1e-3
        _check(
            8, "rejection sampling reproduces the tilted target and kept fraction",
            ok, f"worst |z| {worst_z:.2f}, worst chi2 p {worst_p:.4f}",
        )

    def test_criterion_09_meta_estimator_exact_at_scale(self):
        # tight acceptance on the ratio-minimizing bin: 0.5 * 0.5 / 0.35
        alpha = _alpha_from_vector([0.5 * 0.5 / 0.35, 1.0, 1.0])
        worst = 0.0
        for seed in range(10):
            rng = RngStream(seed)
            x_f = sample_discrete(F3, 100_000, rng.split(0))
            x_h = sample_discrete(H3, 100_000, rng.split(1))
            est = sumpe(x_f, x_h, alpha, PLAIN3, rng.split(2))
            worst = max(worst, abs(est.kappa_hat - 0.5))
        _check(
            9, "subsampled histogram estimate within 0.02 of truth on all 10 seeds",
            worst <= 0.02, f"worst abs error {worst:.4f}",
        )

    def test_criterion_10_gradient_check(self):
        gen = RngStream(17).generator()
        worst = 0.0
        for i in range(20):
            if i % 2 == 0:
                cfg = TrainConfig(
                    epochs=3, hidden=int(gen.integers(2, 9)), seed=i,
                )
            else:
                cfg = TrainConfig(
                    epochs=3, architecture="logistic",
                    degree=int(gen.integers(1, 4)), seed=i,
                )
            d = int(gen.integers(1, 4))
            model = train(two_blob_data(n=15, d=d, seed=i), cfg)
            dev = gradient_check(model, two_blob_data(n=8, d=d, seed=100 + i))
            worst = max(worst, dev)
        _check(
            10, "analytic gradients match finite differences on 20 random learners",
            worst <= 1e-4, f"worst relative deviation {worst:.2e}",
        )


class TestShippedScenarios:
    def test_criterion_11_synthetic_bias_pattern(self):
        plugin = _run_shipped("synthetic")
        oracle = _run_shipped("synthetic", json.dumps({"alpha_mode": "oracle"}))
        ok = True
        details = []
        for mode_name, summary in (("plugin", plugin), ("oracle", oracle)):
            base = _rows(summary, "base")
            meta = _rows(summary, "sumpe")
            for kappa in sorted(base):
                ok = ok and base[kappa]["bias"] > 0
                ok = ok and meta[kappa]["mae"] < base[kappa]["mae"]
                details.append(
                    f"{mode_name} k={kappa}: base {base[kappa]['bias']:+.3f}, "
                    f"mae {meta[kappa]['mae']:.3f}<{base[kappa]['mae']:.3f}"
                )
        oracle_meta = _rows(oracle, "sumpe")
        worst_oracle = max(row["mae"] for row in oracle_meta.values())
        ok = ok and worst_oracle <= 0.05
        _check(
            11, "overlapping-components scenario: base overestimates, subsampling wins",
            ok, f"oracle max mae {worst_oracle:.4f}; " + "; ".join(details[:3]),
        )

    def test_criterion_12_gamma_ordering(self):
        summary = _run_shipped("gamma")
        avg = {
            variant: float(np.mean([r["mae"] for r in _rows(summary, variant).values()]))
            for variant in ("base", "rempe2", "sumpe")
        }
        ok = avg["sumpe"] < avg["base"] and avg["sumpe"] < avg["rempe2"]
        _check(
            12, "spectrum scenario: subsampling beats both plain and regrouped baselines",
            ok, f"avg mae base {avg['base']:.4f}, rempe2 {avg['rempe2']:.4f}, "
                f"sumpe {avg['sumpe']:.4f}",
        )

    def test_criterion_13_irreducible_safety(self):
        summary = _run_shipped("irreducible")
        base = _rows(summary, "base")
        meta = _rows(summary, "sumpe")
        re2 = _rows(summary, "rempe2")
        re_bias = re2[0.75]["bias"]
        ok = re_bias < 0 and abs(re_bias) > 0.03
        gaps = []
        for kappa in sorted(base):
            gap = abs(meta[kappa]["bias"]) - abs(base[kappa]["bias"])
            gaps.append(gap)
            ok = ok and gap <= 0.02
        _check(
            13, "well-separated scenario: regrouping underestimates, subsampling stays safe",
            ok, f"rempe2 bias at 0.75 {re_bias:+.4f}, worst sumpe gap {max(gaps):+.4f}",
        )

    def test_criterion_14_error_shrinks_with_sample_size(self):
        small = _run_shipped("trend")
        large = _run_shipped("trend", json.dumps({"m": 4000, "n": 4000}))
        mae_small = float(np.mean([r["mae"] for r in _rows(small, "sumpe").values()]))
        mae_large = float(np.mean([r["mae"] for r in _rows(large, "sumpe").values()]))
        _check(
            14, "subsampled estimate improves strictly from 500 to 4000 samples",
            mae_large < mae_small, f"mae {mae_small:.4f} -> {mae_large:.4f}",
        )

    def test_criterion_15_byte_determinism(self, tmp_path):
        cfg = dict(shipped_config("gamma"), seeds=3)
        blobs = []
        for label in ("a", "b"):
            reports = run_experiment(cfg)
            paths = emit(reports, aggregate(reports), str(tmp_path / label), config=cfg)
            blobs.append(open(paths["trials"], "rb").read())
        _check(
            15, "two runs of the same config emit byte-identical trial tables",
            blobs[0] == blobs[1], f"{len(blobs[0])} bytes",
        )
