"""Shared domain types: finite distributions, samples, histograms, estimates.

All types are immutable after construction and safe to share between
concurrent tasks; every operation in this module is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    DimensionError,
    DomainError,
    InfeasibleError,
)

# Mass vectors whose sum deviates from 1 by more than this are rejected;
# smaller deviations are silently renormalized.
SUM_REJECT_TOL = 1e-6
SUM_CHECK_TOL = 1e-12
RESIDUAL_CLAMP_TOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DiscreteDist:
    """Exact probability mass function on an indexed finite support.

    Entries must be non-negative and sum to 1.  A sum within
    ``SUM_REJECT_TOL`` of 1 is renormalized; anything further off is
    rejected as a likely logic error upstream.
    """

    mass: np.ndarray

    def __init__(self, mass: Sequence[float]):
        arr = np.asarray(mass, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError("mass must be a non-empty 1-d vector")
        if np.any(arr < 0):
            raise DomainError("mass entries must be non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_REJECT_TOL:
            raise DomainError(f"mass sums to {total!r}, expected 1")
        if abs(total - 1.0) > SUM_CHECK_TOL:
            arr = arr / total
        object.__setattr__(self, "mass", _frozen_array(arr))

    @property
    def support_size(self) -> int:
        return int(self.mass.size)

    def __len__(self) -> int:
        return self.support_size

    def __getitem__(self, i):
        return self.mass[i]


@dataclass(frozen=True)
class SampleSet:
    """Ordered i.i.d. draws as an (n, d) array of dense feature vectors.

    Order carries no meaning beyond reproducibility of seeded generation.
    """

    points: np.ndarray

    def __init__(self, points):
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise DimensionError("points must be an (n, d) array")
        object.__setattr__(self, "points", _frozen_array(arr))

    @classmethod
    def from_1d(cls, values) -> "SampleSet":
        return cls(np.asarray(values, dtype=float).reshape(-1, 1))

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    def values_1d(self) -> np.ndarray:
        if self.d != 1:
            raise DimensionError("sample is not 1-dimensional")
        return self.points[:, 0]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class Histogram:
    """Binned counts over strictly increasing bin edges."""

    edges: np.ndarray
    counts: np.ndarray

    def __init__(self, edges, counts):
        e = np.asarray(edges, dtype=float)
        c = np.asarray(counts)
        if e.ndim != 1 or c.ndim != 1 or e.size != c.size + 1:
            raise DimensionError("need len(edges) == len(counts) + 1")
        if np.any(np.diff(e) <= 0):
            raise DomainError("edges must be strictly increasing")
        if np.any(c < 0) or not np.all(c == np.floor(c)):
            raise DomainError("counts must be non-negative integers")
        c = c.astype(np.int64)
        if c.sum() <= 0:
            raise DomainError("histogram must contain at least one count")
        object.__setattr__(self, "edges", _frozen_array(e))
        object.__setattr__(self, "counts", _frozen_array(c, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def densities(self) -> np.ndarray:
        """Per-bin probability density (mass divided by bin width)."""
        widths = np.diff(self.edges)
        return self.counts / (self.total * widths)

    def as_points(self) -> SampleSet:
        """Expand counts into a 1-d sample of bin-center values, bin order."""
        return SampleSet.from_1d(np.repeat(self.centers(), self.counts))

    @classmethod
    def from_sample(cls, sample: SampleSet, edges) -> "Histogram":
        counts, _ = np.histogram(sample.values_1d(), bins=np.asarray(edges, dtype=float))
        return cls(edges, counts)


@dataclass(frozen=True)
class AcceptanceFn:
    """Pointwise retention probability x -> [0, 1] used in rejection sampling.

    ``fn`` maps an (n, d) array of points to per-point values; outputs are
    clamped into [0, 1].  ``region`` optionally marks the set where the
    function differs from 1, for diagnostics only.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    region: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "alpha"

    def __call__(self, points) -> np.ndarray:
        if isinstance(points, SampleSet):
            points = points.points
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        vals = np.asarray(self.fn(pts), dtype=float).reshape(-1)
        if vals.size != pts.shape[0]:
            raise DimensionError("acceptance function returned wrong length")
        return np.clip(vals, 0.0, 1.0)

    def in_region(self, points) -> np.ndarray:
        if isinstance(points, SampleSet):
            points = points.points
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if self.region is None:
            return np.zeros(pts.shape[0], dtype=bool)
        return np.asarray(self.region(pts), dtype=bool).reshape(-1)


@dataclass(frozen=True)
class MpeEstimate:
    """An estimated proportion plus diagnostics."""

    kappa_hat: float
    c_hat: float = 1.0
    argmin_witness: Optional[int] = None
    method_tag: str = ""

    def __post_init__(self):
        if not (0.0 <= self.kappa_hat <= 1.0):
            raise DomainError("kappa_hat must lie in [0, 1]")
        if not (0.0 <= self.c_hat <= 1.0):
            raise DomainError("c_hat must lie in [0, 1]")


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector with a binary label and optional true-condition flag."""

    x: np.ndarray
    y: int
    z: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(np.atleast_1d(self.x)))
        if self.y not in (0, 1):
            raise DomainError("y must be 0 or 1")
        if self.z is not None and self.z not in (0, 1):
            raise DomainError("z must be 0 or 1 when present")


def labeled_from_arrays(X, y, z=None) -> list[LabeledExample]:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y).astype(int)
    if z is None:
        return [LabeledExample(X[i], int(y[i])) for i in range(len(y))]
    z = np.asarray(z).astype(int)
    return [LabeledExample(X[i], int(y[i]), int(z[i])) for i in range(len(y))]


def labeled_to_arrays(examples: Sequence[LabeledExample]):
    if not examples:
        raise DomainError("no labeled examples")
    X = np.stack([ex.x for ex in examples])
    y = np.array([ex.y for ex in examples], dtype=float)
    return X, y


def make_mixture(g: DiscreteDist, h: DiscreteDist, kappa_star: float) -> DiscreteDist:
    """Convex combination (1 - kappa*) g + kappa* h on a shared support."""
    if g.support_size != h.support_size:
        raise DimensionError("g and h must share a support")
    if not (0.0 <= kappa_star <= 1.0):
        raise DomainError("kappa_star must lie in [0, 1]")
    return DiscreteDist((1.0 - kappa_star) * g.mass + kappa_star * h.mass)


def residual_component(f: DiscreteDist, h: DiscreteDist, kappa_star: float) -> DiscreteDist:
    """Invert ``make_mixture``: recover g from f, h and the weight of h.

    Small negative residuals (above -1e-9) are clamped to zero before
    renormalizing; larger ones mean kappa_star is too large for this pair.
    """
    if f.support_size != h.support_size:
        raise DimensionError("f and h must share a support")
    if not (0.0 <= kappa_star < 1.0):
        raise DomainError("kappa_star must lie in [0, 1)")
    resid = f.mass - kappa_star * h.mass
    if np.any(resid < -RESIDUAL_CLAMP_TOL):
        worst = int(np.argmin(resid))
        raise InfeasibleError(
            f"kappa_star={kappa_star} infeasible: residual {resid[worst]:.3e} at bin {worst}"
        )
    resid = np.clip(resid, 0.0, None) / (1.0 - kappa_star)
    total = resid.sum()
    if total <= 0:
        raise InfeasibleError("residual component has no mass")
    return DiscreteDist(resid / total)
