"""Per-scenario trial builders: data generation plus acceptance construction.

Each builder returns a ``TrialData`` bundle for one (proportion, seed) cell.
Data generation and acceptance construction consume disjoint child streams of
the cell stream, so the raw samples are identical across acceptance modes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .core import AcceptanceFn, Histogram, SampleSet, labeled_from_arrays
from .errors import DomainError
from .learner import TrainConfig
from .sampling import (
    GaussianMixtureSpec,
    RngStream,
    SpectrumSpec,
    mixture_of,
    sample_gaussian_mixture,
    simulate_spectrum,
)
from .scenarios import constant_alpha, cspl_alpha, reporting_alpha, unfolding_alpha

SCENARIOS = ("synthetic", "gamma", "irreducible", "reporting", "csv")
ALPHA_MODES = ("oracle", "plugin", "one")

# Synthetic setting: component N(0,1) inside a two-part latent background.
SYNTH_H = GaussianMixtureSpec((1.0,), (0.0,), (1.0,))
SYNTH_G = GaussianMixtureSpec((0.8, 0.2), (3.0, 4.0), (2.0, 1.0))
# Source-domain background for the plug-in posterior: far component shifted
# away from the evaluation region so the source posterior dominates.
SYNTH_G_SOURCE = GaussianMixtureSpec((0.8, 0.2), (3.0, 5.0), (2.0, 1.0))
SYNTH_CUTOFF = 2.0

IRRED_H = GaussianMixtureSpec((1.0,), (0.0,), (1.0,))
IRRED_G = GaussianMixtureSpec((1.0,), (2.0,), (1.0,))

REPORT_P1 = GaussianMixtureSpec((1.0,), (0.0,), (1.0,))
REPORT_P0 = GaussianMixtureSpec((1.0,), (3.0,), (1.0,))
REPORT_PROPENSITY = 0.7

N_ALPHA_LABELED = 2000
N_SOURCE_LABELED = 4000

_MLP = TrainConfig(epochs=400, learning_rate=0.5, architecture="mlp", hidden=16)


@dataclass(frozen=True)
class TrialData:
    """Inputs for one trial: mixture sample, component sample, acceptance."""

    x_f: object  # SampleSet or Histogram
    x_h: object
    alpha: AcceptanceFn
    kappa_star: float


def _alpha_one() -> AcceptanceFn:
    return AcceptanceFn(lambda pts: np.ones(pts.shape[0]), label="one")


def _posterior_fn(
    h: GaussianMixtureSpec, g: GaussianMixtureSpec, kappa_star: float
) -> Callable[[np.ndarray], np.ndarray]:
    def post(pts: np.ndarray) -> np.ndarray:
        x = pts[:, 0]
        hv = h.pdf(x)
        fv = (1.0 - kappa_star) * g.pdf(x) + kappa_star * hv
        out = np.zeros_like(x)
        pos = fv > 0
        out[pos] = kappa_star * hv[pos] / fv[pos]
        return np.clip(out, 0.0, 1.0)

    return post


def _sample_mixture_with_labels(
    h: GaussianMixtureSpec,
    g: GaussianMixtureSpec,
    kappa_star: float,
    n: int,
    stream: RngStream,
):
    """Draw n mixture points, returning the latent component labels too."""
    gen = stream.split(0).generator()
    y = (gen.random(n) < kappa_star).astype(int)
    x_h = sample_gaussian_mixture(h, int(y.sum()), stream.split(1)).values_1d()
    x_g = sample_gaussian_mixture(g, int(n - y.sum()), stream.split(2)).values_1d()
    x = np.empty(n)
    x[y == 1] = x_h
    x[y == 0] = x_g
    return SampleSet.from_1d(x), y


def build_synthetic_trial(
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    train_config: TrainConfig = _MLP,
) -> TrialData:
    """Gaussian mixture with a reducible background and a left-tail region."""
    x_f = sample_gaussian_mixture(
        mixture_of(SYNTH_H, SYNTH_G, kappa_star), n, stream.split(0)
    )
    x_h = sample_gaussian_mixture(SYNTH_H, m, stream.split(1))
    region = lambda pts: pts[:, 0] <= SYNTH_CUTOFF
    if alpha_mode == "one":
        alpha = _alpha_one()
    elif alpha_mode == "oracle":
        post = _posterior_fn(SYNTH_H, SYNTH_G, kappa_star)
        alpha = AcceptanceFn(
            lambda pts: np.where(region(pts), post(pts), 1.0),
            region=region,
            label="oracle",
        )
    else:
        src_x, src_y = _sample_mixture_with_labels(
            SYNTH_H, SYNTH_G_SOURCE, kappa_star, N_SOURCE_LABELED, stream.split(2)
        )
        keep = src_x.values_1d() <= SYNTH_CUTOFF
        examples = labeled_from_arrays(src_x.values_1d()[keep], src_y[keep])
        alpha = cspl_alpha(
            examples, train_config, rng=stream.split(3), region=region
        )
    return TrialData(x_f, x_h, alpha, kappa_star)


def build_gamma_trial(
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    spec: SpectrumSpec = SpectrumSpec(),
) -> TrialData:
    """Simulated spectrum: mixed measurement vs pure-source measurement."""
    hist_f, hist_h, _ = simulate_spectrum(
        spec, kappa_star, stream.split(0), counts_f=n, counts_h=m
    )
    if alpha_mode == "one":
        alpha = _alpha_one()
    else:
        # oracle and plug-in coincide: the baseline under the peak is always
        # interpolated from the measured mixture itself
        alpha = unfolding_alpha(hist_f, spec.peak_window())
    return TrialData(hist_f, hist_h, alpha, kappa_star)


def build_irreducible_trial(
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    train_config: TrainConfig = _MLP,
    threshold: float = 0.6,
) -> TrialData:
    """Well-separated Gaussians where the background is already irreducible."""
    x_f = sample_gaussian_mixture(
        mixture_of(IRRED_H, IRRED_G, kappa_star), n, stream.split(0)
    )
    x_h = sample_gaussian_mixture(IRRED_H, m, stream.split(1))
    if alpha_mode == "one":
        alpha = _alpha_one()
    elif alpha_mode == "oracle":
        post = _posterior_fn(IRRED_H, IRRED_G, kappa_star)
        region = lambda pts: post(pts) > threshold
        alpha = AcceptanceFn(
            lambda pts: np.where(region(pts), post(pts), 1.0),
            region=region,
            label="oracle",
        )
    else:
        lab_x, lab_y = _sample_mixture_with_labels(
            IRRED_H, IRRED_G, kappa_star, N_ALPHA_LABELED, stream.split(2)
        )
        examples = labeled_from_arrays(lab_x.values_1d(), lab_y)
        alpha = cspl_alpha(
            examples, train_config, threshold=threshold, rng=stream.split(3)
        )
    return TrialData(x_f, x_h, alpha, kappa_star)


def build_reporting_trial(
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    train_config: TrainConfig = _MLP,
    threshold: float = 0.6,
    propensity: float = REPORT_PROPENSITY,
) -> TrialData:
    """Underreported positives: only a fraction of true cases are labeled.

    The true-condition prevalence is kappa_star / propensity, so the target
    proportion of reported cases inside the mixture equals kappa_star.
    """
    nu = kappa_star / propensity
    if nu > 1.0:
        raise DomainError("kappa_star exceeds the reporting propensity")
    x_f, _ = _sample_mixture_with_labels(REPORT_P1, REPORT_P0, nu, n, stream.split(0))
    x_h = sample_gaussian_mixture(REPORT_P1, m, stream.split(1))
    if alpha_mode == "one":
        alpha = _alpha_one()
    elif alpha_mode == "oracle":
        region = lambda pts: pts[:, 0] <= 0.0
        alpha = constant_alpha(region, propensity)
    else:
        gen = stream.split(2).generator()
        rep_x = sample_gaussian_mixture(
            REPORT_P1, N_ALPHA_LABELED, stream.split(4)
        ).values_1d()
        rep_y = (gen.random(N_ALPHA_LABELED) < propensity).astype(int)
        examples = labeled_from_arrays(rep_x, rep_y, z=np.ones(N_ALPHA_LABELED))
        alpha = reporting_alpha(
            examples, train_config, threshold=threshold, rng=stream.split(3)
        )
    return TrialData(x_f, x_h, alpha, kappa_star)


def load_labeled_csv(path: str):
    """Read a UTF-8 CSV with a header row, numeric feature columns, a binary
    label column named ``y`` and an optional binary column ``z``.

    Returns (X, y, z) arrays with z possibly None.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or "y" not in header:
            raise DomainError(f"{path}: need a header row containing a 'y' column")
        rows = [row for row in reader if row]
    yi = header.index("y")
    zi = header.index("z") if "z" in header else None
    feat_idx = [i for i in range(len(header)) if i not in (yi, zi)]
    if not feat_idx:
        raise DomainError(f"{path}: no feature columns")
    try:
        X = np.array([[float(r[i]) for i in feat_idx] for r in rows])
        y = np.array([int(float(r[yi])) for r in rows])
        z = None if zi is None else np.array([int(float(r[zi])) for r in rows])
    except (ValueError, IndexError) as exc:
        raise DomainError(f"{path}: non-numeric or ragged row ({exc})") from exc
    if not set(y.tolist()) <= {0, 1}:
        raise DomainError(f"{path}: 'y' must be binary")
    return X, y, z


def build_csv_trial(
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    path: str = "",
    train_config: TrainConfig = _MLP,
    threshold: float = 0.6,
) -> TrialData:
    """Benchmark-style construction from a user dataset: the positive class
    plays the known component and the mixture is resampled at kappa_star."""
    if not path:
        raise DomainError("csv scenario requires a dataset path")
    X, y, _ = load_labeled_csv(path)
    pos, neg = X[y == 1], X[y == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise DomainError(f"{path}: need both classes present")
    gen = stream.split(0).generator()
    x_h = SampleSet(pos[gen.integers(0, len(pos), size=m)])
    lab = (gen.random(n + N_ALPHA_LABELED) < kappa_star).astype(int)
    pools = {1: pos, 0: neg}
    draw = lambda labels: np.stack(
        [pools[int(l)][gen.integers(0, len(pools[int(l)]))] for l in labels]
    )
    mix = draw(lab)
    x_f = SampleSet(mix[:n])
    if alpha_mode == "one":
        alpha = _alpha_one()
    else:
        examples = labeled_from_arrays(mix[n:], lab[n:])
        alpha = cspl_alpha(
            examples, train_config, threshold=threshold, rng=stream.split(3)
        )
    return TrialData(x_f, x_h, alpha, kappa_star)


_BUILDERS: Dict[str, Callable[..., TrialData]] = {
    "synthetic": build_synthetic_trial,
    "gamma": build_gamma_trial,
    "irreducible": build_irreducible_trial,
    "reporting": build_reporting_trial,
    "csv": build_csv_trial,
}


def build_trial(
    scenario: str,
    kappa_star: float,
    m: int,
    n: int,
    alpha_mode: str,
    stream: RngStream,
    params: Optional[dict] = None,
) -> TrialData:
    """Dispatch to the scenario-specific builder."""
    if scenario not in _BUILDERS:
        raise DomainError(f"unknown scenario {scenario!r}")
    if alpha_mode not in ALPHA_MODES:
        raise DomainError(f"unknown alpha mode {alpha_mode!r}")
    return _BUILDERS[scenario](kappa_star, m, n, alpha_mode, stream, **(params or {}))
