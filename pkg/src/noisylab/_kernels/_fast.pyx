# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled packed-bit kernels: Gray-code codeword expansion and popcount scan."""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    """
    static inline int popcount_u64(unsigned long long x) {
        return __builtin_popcountll(x);
    }
    static inline int ctz_u64(unsigned long long x) {
        return __builtin_ctzll(x);
    }
    """
    int popcount_u64(unsigned long long x) nogil
    int ctz_u64(unsigned long long x) nogil


def codeword_table(row_masks):
    """All 2^k XOR combinations of ``k`` uint64 row bitmasks.

    Entry ``m`` is the XOR of the rows selected by the set bits of ``m``
    (bit ``i`` of the index selects row ``i``). Entry 0 is 0.
    """
    rows = np.ascontiguousarray(row_masks, dtype=np.uint64)
    cdef Py_ssize_t k = rows.shape[0]
    if k > 24:
        raise ValueError(f"refusing to expand 2^{k} codewords (k > 24)")
    out = np.empty(1 << k, dtype=np.uint64)
    cdef uint64_t[::1] rows_v = rows
    cdef uint64_t[::1] out_v = out
    cdef Py_ssize_t n = 1 << k
    cdef Py_ssize_t m
    cdef uint64_t acc = 0
    # Gray-code walk: between consecutive indices exactly one row toggles, and
    # gray(m) = m ^ (m >> 1), so write each accumulated word to its gray index.
    with nogil:
        out_v[0] = 0
        for m in range(1, n):
            acc ^= rows_v[ctz_u64(<unsigned long long>m)]
            out_v[<uint64_t>m ^ (<uint64_t>m >> 1)] = acc
    return out


def hamming_scan(table, target, mask):
    """Per-entry popcount of ``(table ^ target) & mask``."""
    tab = np.ascontiguousarray(table, dtype=np.uint64)
    out = np.empty(tab.shape[0], dtype=np.int64)
    cdef uint64_t[::1] tab_v = tab
    cdef int64_t[::1] out_v = out
    cdef uint64_t t = <uint64_t>target
    cdef uint64_t mk = <uint64_t>mask
    cdef Py_ssize_t i, n = tab.shape[0]
    with nogil:
        for i in range(n):
            out_v[i] = popcount_u64((tab_v[i] ^ t) & mk)
    return out
