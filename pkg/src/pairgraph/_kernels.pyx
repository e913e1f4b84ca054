# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Permanent / Hafnian kernels.

Same signatures and results as :mod:`pairgraph._kernels_py`; that module is
used when this extension is not built.
"""

import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef inline int _ctz(unsigned long long x) nogil:
    cdef int c = 0
    while (x & 1) == 0:
        x >>= 1
        c += 1
    return c


def permanent_ryser(a):
    """Ryser inclusion-exclusion with Gray-code column updates, O(n 2^n)."""
    cdef cplx[:, ::1] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n == 0:
        return 1 + 0j
    cdef cplx[::1] rows = np.zeros(n, dtype=np.complex128)
    cdef unsigned long long k, gray = 0, prev = 0, bit, top = 1ULL << n
    cdef Py_ssize_t i, j
    cdef cplx total = 0, prod
    cdef int size = 0
    with nogil:
        for k in range(1, top):
            gray = k ^ (k >> 1)
            bit = gray ^ prev
            j = _ctz(bit)
            if gray & bit:
                for i in range(n):
                    rows[i] = rows[i] + m[i, j]
                size += 1
            else:
                for i in range(n):
                    rows[i] = rows[i] - m[i, j]
                size -= 1
            prev = gray
            prod = 1
            for i in range(n):
                prod = prod * rows[i]
            if size & 1:
                total = total - prod
            else:
                total = total + prod
    if n & 1:
        total = -total
    return complex(total)


def hafnian_power_trace(a):
    """Power-trace Hafnian, O(n^3 2^(n/2)).

    Sums over subsets S of the n/2 index pairs (0,1), (2,3), ...; each term is
    the lambda^(n/2) coefficient of exp(sum_k tr((X A_S)^k) lambda^k / (2k)).
    """
    cdef cplx[:, ::1] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n & 1:
        return 0j
    if n == 0:
        return 1 + 0j
    cdef Py_ssize_t half = n // 2
    cdef Py_ssize_t s, i, j, l, p, kk, sz
    cdef unsigned long long mask
    cdef cnp.intp_t[::1] idx = np.zeros(n, dtype=np.intp)
    cdef cplx[:, ::1] c = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] pw = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.zeros((n, n), dtype=np.complex128)
    cdef cplx[::1] q = np.zeros(half + 1, dtype=np.complex128)
    cdef cplx[::1] e = np.zeros(half + 1, dtype=np.complex128)
    cdef cplx total = 0, acc, tr
    with nogil:
        for mask in range(1, 1ULL << half):
            sz = 0
            for p in range(half):
                if (mask >> p) & 1:
                    idx[sz] = 2 * p
                    idx[sz + 1] = 2 * p + 1
                    sz += 2
            # C = X A_S: row i of C is row partner(i) of A_S, diagonal of A ignored
            for i in range(sz):
                for j in range(sz):
                    l = i ^ 1
                    if idx[l] == idx[j]:
                        c[i, j] = 0
                    else:
                        c[i, j] = m[idx[l], idx[j]]
                    pw[i, j] = c[i, j]
            for kk in range(1, half + 1):
                tr = 0
                for i in range(sz):
                    tr = tr + pw[i, i]
                q[kk] = tr / (2 * kk)
                if kk < half:
                    for i in range(sz):
                        for j in range(sz):
                            acc = 0
                            for l in range(sz):
                                acc = acc + pw[i, l] * c[l, j]
                            tmp[i, j] = acc
                    for i in range(sz):
                        for j in range(sz):
                            pw[i, j] = tmp[i, j]
            e[0] = 1
            for kk in range(1, half + 1):
                acc = 0
                for l in range(1, kk + 1):
                    acc = acc + l * q[l] * e[kk - l]
                e[kk] = acc / kk
            if (half - sz // 2) & 1:
                total = total - e[half]
            else:
                total = total + e[half]
    return complex(total)


def hafnian_inclusion_exclusion(a):
    """Edge-sequence inclusion-exclusion Hafnian with Gray-code vertex updates.

    haf(A) = 1/(n/2)! * sum_S (-1)^(n-|S|) (sum_{i<j in S} a_ij)^(n/2).
    Exact in exact arithmetic but loses digits to cancellation as n grows.
    """
    cdef cplx[:, ::1] m = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = m.shape[0]
    if n & 1:
        return 0j
    if n == 0:
        return 1 + 0j
    cdef Py_ssize_t half = n // 2, i, j, t
    cdef cplx[::1] r = np.zeros(n, dtype=np.complex128)
    cdef unsigned long long k, gray, prev = 0, bit, top = 1ULL << n
    cdef cplx es = 0, pw, total = 0
    cdef int size = 0
    cdef double fact = 1
    for t in range(2, half + 1):
        fact *= t
    with nogil:
        for k in range(1, top):
            gray = k ^ (k >> 1)
            bit = gray ^ prev
            j = _ctz(bit)
            if gray & bit:
                es = es + r[j]
                for i in range(n):
                    if i != j:
                        r[i] = r[i] + m[i, j]
                size += 1
            else:
                for i in range(n):
                    if i != j:
                        r[i] = r[i] - m[i, j]
                es = es - r[j]
                size -= 1
            prev = gray
            pw = 1
            for t in range(half):
                pw = pw * es
            if (n - size) & 1:
                total = total - pw
            else:
                total = total + pw
    return complex(total / fact)
