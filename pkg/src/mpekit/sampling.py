"""Seeded random generation: discrete and Gaussian-mixture samplers, the
rejection-sampling primitive, and a parametric gamma-spectrum simulator.

Streams are built on numpy's Philox counter-based generator keyed by
``(seed, stream_id)``; identical keys give bitwise-identical output for a
fixed numpy version.  Gaussian draws use ``Generator.normal`` (numpy's
ziggurat implementation), which is likewise pinned by the numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import AcceptanceFn, DiscreteDist, Histogram, SampleSet
from .errors import DomainError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, splittable random stream.

    Distinct ``stream_id`` values are statistically independent and may be
    consumed concurrently; a single stream value is never mutated (each
    ``generator()`` call starts a fresh generator at the stream origin).
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, k: int) -> "RngStream":
        """Derive the k-th child stream (k < 2**20, nesting depth < 3)."""
        return RngStream(self.seed, ((self.stream_id << 20) + k + 1) & _MASK64)


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Weights, means and standard deviations of a 1-d Gaussian mixture."""

    weights: tuple
    means: tuple
    stddevs: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.means, dtype=float)
        sd = np.asarray(self.stddevs, dtype=float)
        if not (w.size == mu.size == sd.size) or w.size == 0:
            raise DomainError("weights, means, stddevs must have equal length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise DomainError("weights must be non-negative and sum to 1")
        if np.any(sd <= 0):
            raise DomainError("stddevs must be positive")
        object.__setattr__(self, "weights", tuple(w))
        object.__setattr__(self, "means", tuple(mu))
        object.__setattr__(self, "stddevs", tuple(sd))

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, mu, sd in zip(self.weights, self.means, self.stddevs):
            out += w * np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * np.sqrt(2 * np.pi))
        return out

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))


def mixture_of(h: GaussianMixtureSpec, g: GaussianMixtureSpec, kappa_star: float) -> GaussianMixtureSpec:
    """The marginal mixture (1 - kappa*) g + kappa* h as a single spec."""
    if not (0.0 <= kappa_star <= 1.0):
        raise DomainError("kappa_star must lie in [0, 1]")
    weights = tuple(kappa_star * w for w in h.weights) + tuple(
        (1.0 - kappa_star) * w for w in g.weights
    )
    return GaussianMixtureSpec(weights, h.means + g.means, h.stddevs + g.stddevs)


def sample_discrete(dist: DiscreteDist, n: int, rng: RngStream) -> SampleSet:
    """n draws from a pmf, encoded as 1-d points equal to bin indices."""
    if n < 0:
        raise DomainError("n must be non-negative")
    gen = rng.generator()
    idx = gen.choice(dist.support_size, size=n, p=dist.mass)
    return SampleSet.from_1d(idx.astype(float))


def sample_gaussian_mixture(spec: GaussianMixtureSpec, n: int, rng: RngStream) -> SampleSet:
    if n < 0:
        raise DomainError("n must be non-negative")
    gen = rng.generator()
    comp = gen.choice(len(spec.weights), size=n, p=np.asarray(spec.weights))
    mu = np.asarray(spec.means)[comp]
    sd = np.asarray(spec.stddevs)[comp]
    return SampleSet.from_1d(gen.normal(mu, sd))


def rejection_sample(sample: SampleSet, alpha: AcceptanceFn, rng: RngStream) -> SampleSet:
    """Keep each point independently with probability alpha(x), preserving order."""
    gen = rng.generator()
    a = alpha(sample)
    v = gen.random(sample.n)
    return SampleSet(sample.points[v <= a])


@dataclass(frozen=True)
class SpectrumSpec:
    """Parametric stand-in for a measured gamma-ray energy spectrum.

    The source is a Gaussian photopeak (truncated at ``peak_extent`` sigma)
    plus a flat shelf over low-energy bins; the background is an exponential
    continuum over all bins plus an optional secondary peak above the source
    peak.  By construction the source support is strictly inside the
    background support, so the latent component is never irreducible.
    """

    n_bins: int = 128
    peak_center: float = 85.0
    peak_width: float = 3.0
    peak_fraction: float = 0.7
    peak_extent: float = 3.0
    shelf_gap: float = 8.0  # shelf ends this many widths below the peak center
    decay_rate: float = 2.0
    secondary_center: Optional[float] = 112.0
    secondary_width: float = 3.0
    secondary_fraction: float = 0.1
    counts: int = 50_000

    def __post_init__(self):
        if self.n_bins < 8:
            raise DomainError("need at least 8 bins")
        if self.counts <= 0:
            raise DomainError("counts must be positive")
        if not (0.0 < self.peak_fraction <= 1.0):
            raise DomainError("peak_fraction must lie in (0, 1]")
        hi = self.peak_center + self.peak_extent * self.peak_width
        if hi >= self.n_bins - 1:
            raise DomainError("source peak must end strictly below the top bin")

    def peak_window(self) -> Tuple[int, int]:
        """Inclusive bin range covered by the photopeak."""
        lo = int(np.ceil(self.peak_center - self.peak_extent * self.peak_width))
        hi = int(np.floor(self.peak_center + self.peak_extent * self.peak_width))
        return max(lo, 0), min(hi, self.n_bins - 1)

    def source_pmf(self) -> DiscreteDist:
        bins = np.arange(self.n_bins, dtype=float)
        lo, hi = self.peak_window()
        peak = np.exp(-0.5 * ((bins - self.peak_center) / self.peak_width) ** 2)
        peak[(bins < lo) | (bins > hi)] = 0.0
        peak /= peak.sum()
        shelf_end = int(self.peak_center - self.shelf_gap * self.peak_width)
        shelf = np.zeros(self.n_bins)
        shelf[:max(shelf_end, 1)] = 1.0
        shelf /= shelf.sum()
        return DiscreteDist(self.peak_fraction * peak + (1.0 - self.peak_fraction) * shelf)

    def background_pmf(self) -> DiscreteDist:
        bins = np.arange(self.n_bins, dtype=float)
        cont = np.exp(-self.decay_rate * bins / self.n_bins)
        cont /= cont.sum()
        if self.secondary_center is None or self.secondary_fraction <= 0:
            return DiscreteDist(cont)
        sec = np.exp(-0.5 * ((bins - self.secondary_center) / self.secondary_width) ** 2)
        sec /= sec.sum()
        return DiscreteDist(
            (1.0 - self.secondary_fraction) * cont + self.secondary_fraction * sec
        )

    def edges(self) -> np.ndarray:
        return np.arange(self.n_bins + 1, dtype=float)


def simulate_spectrum(
    spec: SpectrumSpec,
    kappa_star: float,
    rng: RngStream,
    counts_f: Optional[int] = None,
    counts_h: Optional[int] = None,
) -> Tuple[Histogram, Histogram, DiscreteDist]:
    """Draw mixed and source-only spectra; also return the true background pmf.

    The mixed histogram has ``counts_f`` draws from
    (1 - kappa*) background + kappa* source, and the source histogram has
    ``counts_h`` draws from the source alone; both default to ``spec.counts``.
    """
    if not (0.0 <= kappa_star <= 1.0):
        raise DomainError("kappa_star must lie in [0, 1]")
    counts_f = spec.counts if counts_f is None else counts_f
    counts_h = spec.counts if counts_h is None else counts_h
    if counts_f <= 0 or counts_h <= 0:
        raise DomainError("counts must be positive")
    src = spec.source_pmf()
    bg = spec.background_pmf()
    assert np.all(bg.mass[src.mass > 0] > 0) and np.any(
        (bg.mass > 0) & (src.mass == 0)
    ), "source support must be strictly inside background support"
    f = (1.0 - kappa_star) * bg.mass + kappa_star * src.mass
    gen_f = rng.split(0).generator()
    gen_h = rng.split(1).generator()
    edges = spec.edges()
    hist_f = Histogram(edges, gen_f.multinomial(counts_f, f))
    hist_h = Histogram(edges, gen_h.multinomial(counts_h, src.mass))
    return hist_f, hist_h, bg
