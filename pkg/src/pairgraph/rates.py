"""Closed-form n-fold count-rate estimates for three sampling schemes.

* ``rate_aa``: n heralded pairs from n sources, ``p**n``.
* ``rate_scattershot``: m heralded sources, any n of which fire.
* ``rate_path_identity``: m*m crystals between two sets of m paths; each
  2n-path subset is reachable through n! indistinguishable crystal
  combinations whose random phases add like a 2D random walk.

``p`` is the per-source pair probability (p ~ g**2).  Binomials go through
log-gamma so that m up to ~1e3 stays finite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graph import add_crystal, graph_with_paths
from .matchings import DetectionPattern, enumerate_matchings


@dataclass(frozen=True)
class RateQuery:
    m: int
    n: int
    p: float

    def __post_init__(self):
        if not 0 <= self.n <= self.m:
            raise ValueError(f"need 0 <= n <= m, got m={self.m}, n={self.n}")
        if not 0 < self.p < 1:
            raise ValueError(f"need 0 < p < 1, got {self.p}")


def log_binom(m: int, n: int) -> float:
    return math.lgamma(m + 1) - math.lgamma(n + 1) - math.lgamma(m - n + 1)


def rate_aa(q: RateQuery) -> float:
    return q.p**q.n


def rate_scattershot(q: RateQuery) -> float:
    return math.exp(log_binom(q.m, q.n) + q.n * math.log(q.p) + (q.m - q.n) * math.log1p(-q.p))


def rate_path_identity(q: RateQuery) -> float:
    return math.exp(
        2 * log_binom(q.m, q.n)
        + math.lgamma(q.n + 1)
        + q.n * math.log(q.p)
        + (q.m * q.m - q.n) * math.log1p(-q.p)
    )


def ratio_pi_ss(q: RateQuery) -> float:
    return math.exp(log_binom(q.m, q.n) + math.lgamma(q.n + 1) + q.m * (q.m - 1) * math.log1p(-q.p))


@dataclass(frozen=True)
class CombinatorialCounts:
    m: int
    n: int
    subsets: int
    matchings_per_subset: tuple[int, ...]
    expected_subsets: int
    expected_matchings: int

    @property
    def consistent(self) -> bool:
        return self.subsets == self.expected_subsets and all(
            k == self.expected_matchings for k in self.matchings_per_subset
        )


def complete_bipartite(m: int):
    left = [f"l{i}" for i in range(m)]
    right = [f"r{i}" for i in range(m)]
    g = graph_with_paths(left + right)
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            g = add_crystal(g, a, 0, b, 0, 1.0, f"x{i}{j}")
    return g


def combinatorial_check(m: int, n: int) -> CombinatorialCounts:
    """Count 2n-path subsets of K_{m,m} with a perfect matching, and matchings per subset."""
    g = complete_bipartite(m)
    counts = []
    for subset in itertools.combinations(g.paths, 2 * n):
        k = len(enumerate_matchings(g, DetectionPattern.one_per_path(subset)))
        if k:
            counts.append(k)
    return CombinatorialCounts(m, n, len(counts), tuple(counts), math.comb(m, n) ** 2, math.factorial(n))


def random_walk_intensity(n: int, samples: int = 100_000, seed: int = 1234) -> tuple[float, float]:
    """Mean and standard error of |sum of n! unit phasors|^2 over uniform phases."""
    rng = np.random.default_rng(seed)
    k = math.factorial(n)
    theta = rng.uniform(0, 2 * np.pi, size=(samples, k))
    vals = np.abs(np.exp(1j * theta).sum(axis=1)) ** 2
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def rate_table(rows: list[tuple[int, int, float]]) -> list[dict]:
    out = []
    for m, n, p in rows:
        q = RateQuery(m, n, p)
        out.append(
            {
                "m": m,
                "n": n,
                "p": p,
                "R_BS": rate_aa(q),
                "R_SS": rate_scattershot(q),
                "R_PI": rate_path_identity(q),
                "ratio": ratio_pi_ss(q),
            }
        )
    return out
