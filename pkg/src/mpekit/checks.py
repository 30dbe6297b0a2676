"""Exact-identity verification suite over random finite distributions.

Runs the sampling-free calculus against itself on randomized triples
(g, h, kappa_star) and fixed worked instances; every check is an algebraic
identity or inequality that must hold to near machine precision.  Used by the
CLI's check subcommand and by the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .core import DiscreteDist, make_mixture
from .population import (
    _argmin_set,
    bias_reduction_holds,
    kappa_max,
    lsp_recover,
    posterior,
    rempe1_population,
    rempe2_population,
    theorem2_recover,
)
from .sampling import RngStream

IDENTITY_TOL = 1e-10

WORKED_G = (0.2, 0.3, 0.5)
WORKED_H = (0.5, 0.5, 0.0)
WORKED_KAPPA = 0.5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _random_triple(gen: np.random.Generator, full_support_h: bool = False):
    k = int(gen.integers(2, 65))
    g = gen.dirichlet(np.ones(k))
    h = gen.dirichlet(np.ones(k))
    if not full_support_h and k > 2 and gen.random() < 0.5:
        # exercise a strictly smaller component support
        drop = gen.choice(k, size=max(1, k // 4), replace=False)
        h[drop] = 0.0
        h /= h.sum()
    kappa = float(gen.uniform(0.02, 0.98))
    return DiscreteDist(g), DiscreteDist(h), kappa


def run_population_checks(seed: int = 0, n_triples: int = 1000) -> List[CheckResult]:
    gen = RngStream(seed, 7).generator()
    triples = [_random_triple(gen) for _ in range(n_triples)]

    results: List[CheckResult] = []

    def record(name: str, worst: float, tol: float = IDENTITY_TOL):
        results.append(
            CheckResult(name, worst <= tol, f"worst deviation {worst:.3e} (tol {tol:g})")
        )

    def record_bool(name: str, ok: bool, detail: str = ""):
        results.append(CheckResult(name, ok, detail))

    # decomposition identity: mixing then measuring recovers the affine law
    worst = 0.0
    for g, h, kappa in triples:
        f = make_mixture(g, h, kappa)
        lhs, _ = kappa_max(f, h)
        rhs = kappa + (1.0 - kappa) * kappa_max(g, h)[0]
        worst = max(worst, abs(lhs - rhs))
    record("mixture decomposition identity", worst)

    # max posterior times the ratio infimum recovers the true weight
    worst = 0.0
    for g, h, kappa in triples:
        f = make_mixture(g, h, kappa)
        s = float(posterior(f, h, kappa).max())
        worst = max(worst, abs(s * kappa_max(f, h)[0] - kappa))
    record("posterior-supremum product identity", worst)

    # local recovery on random subsets of the component support
    worst = 0.0
    for g, h, kappa in triples:
        f = make_mixture(g, h, kappa)
        post = posterior(f, h, kappa)
        supp = np.flatnonzero(h.mass > 0)
        for _ in range(10):
            size = int(gen.integers(1, supp.size + 1))
            A = gen.choice(supp, size=size, replace=False)
            s = float(post[A].max())
            worst = max(worst, abs(lsp_recover(f, h, A, s) - kappa))
    record("subset recovery identity", worst)

    # tilted recovery with the tight acceptance, and the dominating sandwich
    worst = 0.0
    sandwich_ok = True
    for g, h, kappa in triples:
        f = make_mixture(g, h, kappa)
        post = posterior(f, h, kappa)
        supp = np.flatnonzero(h.mass > 0)
        kappa_fh, _ = kappa_max(f, h)
        size = int(gen.integers(1, supp.size + 1))
        A = gen.choice(supp, size=size, replace=False)
        alpha = np.ones(f.support_size)
        alpha[A] = post[A]
        worst = max(worst, abs(theorem2_recover(f, h, alpha) - kappa))
        for _ in range(10):
            t = gen.random(f.support_size)
            dom = post + t * (1.0 - post)
            val = theorem2_recover(f, h, dom)
            if not (kappa - IDENTITY_TOL <= val <= kappa_fh + IDENTITY_TOL):
                sandwich_ok = False
    record("tilted recovery identity", worst)
    record_bool("dominating acceptance sandwich", sandwich_ok)

    # regrouping the mixture never increases the ratio infimum
    ok = True
    detail = ""
    for g, h, kappa in triples:
        f = make_mixture(g, h, kappa)
        kappa_fh, _ = kappa_max(f, h)
        _, kappa_re = rempe2_population(f, h)
        if kappa_re > kappa_fh + IDENTITY_TOL:
            ok = False
            detail = f"regrouped {kappa_re} above {kappa_fh}"
        B = _argmin_set(f.mass, h.mass)
        if float(h.mass[B].sum()) < 1.0 - 1e-12 and not (kappa_re < kappa_fh):
            ok = False
            detail = "expected strict decrease"
    f0 = DiscreteDist(
        (1 - WORKED_KAPPA) * np.array(WORKED_G) + WORKED_KAPPA * np.array(WORKED_H)
    )
    _, worked = rempe2_population(f0, DiscreteDist(WORKED_H))
    if abs(worked - 0.35 * 1.35 / 0.85) > IDENTITY_TOL or not worked < 0.7:
        ok = False
        detail = f"worked value {worked}"
    record_bool("mixture regrouping bound", ok, detail)

    # latent regrouping sandwich, plus exactness in the irreducible case
    ok = True
    detail = ""
    for _ in range(200):
        g, h, kappa = _random_triple(gen, full_support_h=True)
        if np.any(g.mass <= 0):
            continue
        f = make_mixture(g, h, kappa)
        kappa_fh, _ = kappa_max(f, h)
        _, kappa_re = rempe1_population(g, h, kappa)
        if not (kappa < kappa_re < kappa_fh):
            ok = False
            detail = f"{kappa} < {kappa_re} < {kappa_fh} violated"
    worst = 0.0
    for _ in range(200):
        g, h, kappa = _random_triple(gen, full_support_h=True)
        gm = g.mass.copy()
        drop = int(np.argmax(h.mass))
        gm[drop] = 0.0
        g_irr = DiscreteDist(gm / gm.sum())
        _, kappa_re = rempe1_population(g_irr, h, kappa)
        worst = max(worst, abs(kappa_re - kappa))
    record_bool(
        "latent regrouping sandwich", ok and worst <= IDENTITY_TOL,
        detail or f"irreducible worst deviation {worst:.3e}",
    )

    # strict-bias-reduction predicate on the worked partition
    g0, h0 = DiscreteDist(WORKED_G), DiscreteDist(WORKED_H)
    part = (0.2, DiscreteDist([1.0, 0.0, 0.0]), DiscreteDist([0.0, 0.375, 0.625]))
    ok = bias_reduction_holds(g0, h0, part) and not bias_reduction_holds(
        g0, h0, (0.0, g0, g0)
    )
    record_bool("bias reduction predicate", ok)

    return results
