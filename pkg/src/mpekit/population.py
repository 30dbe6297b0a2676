"""Exact, sampling-free identities on finite discrete distributions.

This module is the oracle layer: every quantity here is computed by direct
vector arithmetic on probability mass functions, and the empirical layer is
validated against it.  Bins where the known component h has zero mass are
excluded from every infimum, and 0/0 is taken to be 0 for posteriors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .core import DiscreteDist, make_mixture
from .errors import (
    ConsistencyError,
    DegenerateAcceptanceError,
    DomainError,
    InconsistentMixtureError,
)

ARGMIN_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SubsampleResult:
    """Tilted distribution alpha * f / c together with its mass c."""

    f_tilde: DiscreteDist
    c: float


def kappa_max(f: DiscreteDist, h: DiscreteDist) -> Tuple[float, int]:
    """Largest weight of h that fits inside f, with its witness bin.

    Returns ``(kappa, witness)`` where kappa is the minimum of f/h over the
    support of h, capped at 1, and witness is the smallest bin index
    achieving the minimum.
    """
    if f.support_size != h.support_size:
        raise DomainError("f and h must share a support")
    pos = h.mass > 0
    if not np.any(pos):
        raise DomainError("h has no positive mass")
    ratios = np.full(h.support_size, np.inf)
    ratios[pos] = f.mass[pos] / h.mass[pos]
    witness = int(np.argmin(ratios))
    return min(1.0, float(ratios[witness])), witness


def _argmin_set(numer: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """Bins minimizing numer/denom over denom > 0, with relative-tolerance ties."""
    pos = denom > 0
    ratios = np.full(denom.size, np.inf)
    ratios[pos] = numer[pos] / denom[pos]
    best = ratios.min()
    if best == 0.0:
        tie = ratios <= 1e-12
    else:
        tie = ratios <= best * (1.0 + ARGMIN_TIE_RTOL)
    return np.flatnonzero(tie & pos)


def posterior(f: DiscreteDist, h: DiscreteDist, kappa_star: float) -> np.ndarray:
    """Per-bin probability that a draw from f came from the h component."""
    if f.support_size != h.support_size:
        raise DomainError("f and h must share a support")
    if not (0.0 <= kappa_star <= 1.0):
        raise DomainError("kappa_star must lie in [0, 1]")
    out = np.zeros(f.support_size)
    pos = f.mass > 0
    out[pos] = kappa_star * h.mass[pos] / f.mass[pos]
    if np.any(out > 1.0 + 1e-9):
        raise InconsistentMixtureError(
            "f is not a valid mixture containing kappa_star * h"
        )
    return np.clip(out, 0.0, 1.0)


def lsp_recover(f: DiscreteDist, h: DiscreteDist, A: Iterable[int], s: float) -> float:
    """Recover the true weight from a local ratio infimum and its posterior cap.

    Given a subset A of the support of h and the supremum s of the posterior
    over A, the true weight equals s times the minimum of f/h over A.
    """
    idx = np.asarray(sorted(set(int(i) for i in A)), dtype=int)
    if idx.size == 0:
        raise DomainError("A must be non-empty")
    if not (0.0 < s <= 1.0):
        raise DomainError("s must lie in (0, 1]")
    if np.any(idx < 0) or np.any(idx >= h.support_size):
        raise DomainError("A contains out-of-range bins")
    if np.any(h.mass[idx] <= 0):
        raise DomainError("A must lie inside the support of h")
    return s * float(np.min(f.mass[idx] / h.mass[idx]))


def subsample_density(f: DiscreteDist, alpha) -> SubsampleResult:
    """Tilt f by a per-bin acceptance vector and renormalize."""
    a = np.asarray(alpha, dtype=float)
    if a.shape != (f.support_size,):
        raise DomainError("alpha must match the support of f")
    if np.any((a < 0) | (a > 1)):
        raise DomainError("alpha entries must lie in [0, 1]")
    c = float(np.dot(a, f.mass))
    if c <= 0:
        raise DegenerateAcceptanceError("acceptance kills all mass of f")
    return SubsampleResult(DiscreteDist(a * f.mass / c), c)


def theorem2_recover(f: DiscreteDist, h: DiscreteDist, alpha) -> float:
    """c * kappa_max of the tilted mixture; equals the true weight for a
    posterior-tight acceptance, and lies between it and kappa_max(f, h)
    for any pointwise posterior upper bound."""
    sub = subsample_density(f, alpha)
    kappa, _ = kappa_max(sub.f_tilde, h)
    return sub.c * kappa


def rempe2_population(
    f: DiscreteDist, h: DiscreteDist
) -> Tuple[DiscreteDist, float]:
    """Regrouping baseline that moves the minimizing slice of f into h.

    B is the argmin set of f/h over the support of h; the regrouped
    component is (f restricted to B + h) / (1 + f(B)).  The restriction is
    left unnormalized (mass f(B)) so the regrouped component sums to 1.
    Returns the new component and kappa_max of f against it.
    """
    if not np.any(h.mass > 0):
        raise DomainError("h has no positive mass")
    B = _argmin_set(f.mass, h.mass)
    f_B = np.where(np.isin(np.arange(f.support_size), B), f.mass, 0.0)
    h_prime = DiscreteDist((f_B + h.mass) / (1.0 + f_B.sum()))
    kappa, _ = kappa_max(f, h_prime)
    return h_prime, kappa


def rempe1_population(
    g: DiscreteDist, h: DiscreteDist, kappa_star: float
) -> Tuple[DiscreteDist, float]:
    """Regrouping on the latent component: fold the minimizing slice of g
    into h and report kappa_max of the mixture against the new component.

    When g is irreducible with respect to h the slice carries no mass, the
    component is unchanged and the result equals kappa_star exactly.
    """
    if not (0.0 <= kappa_star < 1.0):
        raise DomainError("kappa_star must lie in [0, 1)")
    f = make_mixture(g, h, kappa_star)
    B = _argmin_set(g.mass, h.mass)
    g_B = np.where(np.isin(np.arange(g.support_size), B), g.mass, 0.0)
    gamma = float(g_B.sum())
    kappa_prime = kappa_star + (1.0 - kappa_star) * gamma
    if kappa_prime <= 0:
        # kappa_star = 0 and nothing to regroup: component unchanged.
        h_prime = h
    else:
        h_prime = DiscreteDist(
            ((1.0 - kappa_star) * g_B + kappa_star * h.mass) / kappa_prime
        )
    kappa, _ = kappa_max(f, h_prime)
    return h_prime, kappa


def bias_reduction_holds(
    g: DiscreteDist,
    h: DiscreteDist,
    partition: Tuple[float, DiscreteDist, DiscreteDist],
) -> bool:
    """Whether dropping the gamma-weighted part g1 of g strictly shrinks
    the maximal proportion of h inside the remainder."""
    gamma, g1, g2 = partition
    if not (0.0 <= gamma <= 1.0):
        raise DomainError("gamma must lie in [0, 1]")
    recon = gamma * g1.mass + (1.0 - gamma) * g2.mass
    if np.max(np.abs(recon - g.mass)) > 1e-9:
        raise ConsistencyError("partition does not reconstruct g")
    kappa_g, _ = kappa_max(g, h)
    kappa_g2, _ = kappa_max(g2, h)
    return (1.0 - gamma) * kappa_g2 < kappa_g
