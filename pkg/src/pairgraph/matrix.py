"""Permanent and Hafnian of complex matrices, plus brute-force oracles.

``permanent_ryser`` and ``hafnian`` dispatch to the compiled kernels when
available (see :mod:`pairgraph._backend`).  The ``*_naive`` functions sum
over all permutations / pairings directly and exist to check them.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from . import _backend
from .graph import ExperimentGraph, adjacency_matrix, induced_subgraph

SYMMETRY_TOL = 1e-12
NAIVE_PERMANENT_MAX = 10
NAIVE_HAFNIAN_MAX = 12


class MatrixError(ValueError):
    pass


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {a.shape}")
    return a


def _symmetrized(m) -> np.ndarray:
    a = _square(m)
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise MatrixError("Hafnian input is not symmetric")
    a = (a + a.T) / 2
    np.fill_diagonal(a, 0)
    return a


def permanent_ryser(m, backend: str | None = None) -> complex:
    """Exact Permanent via Ryser's formula with Gray-code subset order."""
    k = _backend.kernels if backend is None else _backend.load(backend)
    return k.permanent_ryser(_square(m))


def permanent_naive(m) -> complex:
    a = _square(m)
    n = a.shape[0]
    if n > NAIVE_PERMANENT_MAX:
        raise MatrixError(f"naive permanent limited to n <= {NAIVE_PERMANENT_MAX}")
    rows = range(n)
    return complex(sum(np.prod(a[rows, list(p)]) for p in itertools.permutations(rows)))


def hafnian(m, backend: str | None = None) -> complex:
    """Exact Hafnian (diagonal ignored) via the power-trace method.

    Odd dimension gives 0; the empty matrix gives 1.
    """
    a = _symmetrized(m)
    if a.shape[0] % 2:
        return 0j
    k = _backend.kernels if backend is None else _backend.load(backend)
    return k.hafnian_power_trace(a)


def hafnian_inclusion_exclusion(m, backend: str | None = None) -> complex:
    """O(n 2^n) baseline.  Accurate for small n only (cancellation)."""
    a = _symmetrized(m)
    k = _backend.kernels if backend is None else _backend.load(backend)
    return k.hafnian_inclusion_exclusion(a)


def _pairings_sum(a: np.ndarray, idx: tuple[int, ...]) -> complex:
    if not idx:
        return 1 + 0j
    first, rest = idx[0], idx[1:]
    total = 0j
    for k, j in enumerate(rest):
        total += a[first, j] * _pairings_sum(a, rest[:k] + rest[k + 1 :])
    return total


def hafnian_naive(m) -> complex:
    a = _square(m)
    n = a.shape[0]
    if n > NAIVE_HAFNIAN_MAX:
        raise MatrixError(f"naive hafnian limited to n <= {NAIVE_HAFNIAN_MAX}")
    if n % 2:
        return 0j
    return _pairings_sum(a, tuple(range(n)))


def bipartite_embedding(b) -> np.ndarray:
    """[[0, B], [B^T, 0]], whose Hafnian is Perm(B)."""
    b = _square(b)
    n = b.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = b
    out[n:, :n] = b.T
    return out


def coincidence_probability(g: ExperimentGraph, subset: Sequence[str]) -> float:
    """Unnormalized |Haf|^2 of the adjacency matrix restricted to ``subset``."""
    if len(subset) % 2:
        raise MatrixError(f"subset {tuple(subset)} has odd size")
    sub = induced_subgraph(g, subset)
    return abs(hafnian(adjacency_matrix(sub, list(subset)))) ** 2


def coincidence_distribution(g: ExperimentGraph, k: int) -> dict[tuple[str, ...], float]:
    """|Haf|^2 over every k-path subset, normalized to sum to 1."""
    subsets = list(itertools.combinations(g.paths, k))
    raw = {s: coincidence_probability(g, s) for s in subsets}
    total = sum(raw.values())
    if total == 0:
        return raw
    return {s: v / total for s, v in raw.items()}
