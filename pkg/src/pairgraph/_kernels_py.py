"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

The Gray-code / subset loops are vectorized in blocks so that desk-scale
sizes (n ~ 20) stay usable without a compiler.
"""

from __future__ import annotations

import math

import numpy as np

_LOW_BITS = 12


def _subset_bits(k: int) -> np.ndarray:
    ids = np.arange(1 << k, dtype=np.int64)
    return ((ids[:, None] >> np.arange(k)) & 1).astype(np.int8)


def permanent_ryser(a) -> complex:
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    k = min(n, _LOW_BITS)
    bits = _subset_bits(k)
    low = bits @ a[:, :k].T  # (2^k, n) row sums over low columns
    low_sign = np.where(bits.sum(axis=1) % 2, -1.0, 1.0)
    high = n - k
    rows = np.zeros(n, dtype=complex)
    size = 0
    total = 0j
    prev = 0
    for t in range(1 << high):
        gray = t ^ (t >> 1)
        if t:
            bit = gray ^ prev
            j = k + bit.bit_length() - 1
            if gray & bit:
                rows += a[:, j]
                size += 1
            else:
                rows -= a[:, j]
                size -= 1
            prev = gray
        prods = np.prod(low + rows, axis=1)
        block = np.dot(low_sign, prods)
        total += -block if size % 2 else block
    return complex(-total if n % 2 else total)


def _power_trace_coeff(mats: np.ndarray, half: int) -> np.ndarray:
    """lambda^half coefficient of exp(sum_k tr(M^k) lambda^k / 2k) for a batch."""
    lam = np.linalg.eigvals(mats)
    q = np.empty((mats.shape[0], half + 1), dtype=complex)
    for k in range(1, half + 1):
        q[:, k] = (lam**k).sum(axis=1) / (2 * k)
    e = np.zeros((mats.shape[0], half + 1), dtype=complex)
    e[:, 0] = 1
    for k in range(1, half + 1):
        acc = np.zeros(mats.shape[0], dtype=complex)
        for l in range(1, k + 1):
            acc += l * q[:, l] * e[:, k - l]
        e[:, k] = acc / k
    return e[:, half]


def hafnian_power_trace(a) -> complex:
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if n % 2:
        return 0j
    if n == 0:
        return 1 + 0j
    np.fill_diagonal(a, 0)
    half = n // 2
    swap = np.arange(n) ^ 1
    xa = a[swap]  # X A: rows swapped within each index pair
    masks = np.arange(1, 1 << half)
    sizes = np.array([bin(int(m)).count("1") for m in masks])
    total = 0j
    for s in range(1, half + 1):
        chosen = masks[sizes == s]
        pairs = ((chosen[:, None] >> np.arange(half)) & 1).astype(bool)
        pidx = np.nonzero(pairs)[1].reshape(len(chosen), s)
        idx = np.stack([2 * pidx, 2 * pidx + 1], axis=2).reshape(len(chosen), 2 * s)
        sub = xa[idx[:, :, None], idx[:, None, :]]
        coeffs = _power_trace_coeff(sub, half)
        sign = -1 if (half - s) % 2 else 1
        total += sign * coeffs.sum()
    return complex(total)


def hafnian_inclusion_exclusion(a) -> complex:
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if n % 2:
        return 0j
    if n == 0:
        return 1 + 0j
    np.fill_diagonal(a, 0)
    half = n // 2
    total = 0j
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        ids = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        x = ((ids[:, None] >> np.arange(n)) & 1).astype(float)
        es = np.einsum("si,ij,sj->s", x, a, x) / 2
        sign = np.where((n - x.sum(axis=1)) % 2, -1.0, 1.0)
        total += np.dot(sign, es**half)
    return complex(total / math.factorial(half))
