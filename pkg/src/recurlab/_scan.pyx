# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Bit-parallel triple-correlation counts over Z/N."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    """
    static inline int rl_popcount64(unsigned long long x) { return __builtin_popcountll(x); }
    """
    int rl_popcount64(unsigned long long x) nogil


def scan_counts(const uint64_t[::1] a_words, const uint64_t[:, ::1] shifted,
                int64_t n, int64_t a, int64_t b, int threads=1):
    """``counts[d] = sum_i popcount(A[i] & rot(A, a d)[i] & rot(A, b d)[i])``.

    ``shifted[r, k]`` holds word ``k`` of the doubled bit string shifted right by ``r`` bits,
    so word ``i`` of ``rot(A, s)`` is ``shifted[s % 64, s // 64 + i]``.
    """
    cdef Py_ssize_t nw = a_words.shape[0]
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef Py_ssize_t d, i
    cdef int64_t s1, s2, q1, q2, r1, r2, total
    cdef int nthreads = threads if threads > 0 else 1
    for d in prange(n, nogil=True, schedule="static", num_threads=nthreads):
        s1 = (a * d) % n
        if s1 < 0:
            s1 = s1 + n
        s2 = (b * d) % n
        if s2 < 0:
            s2 = s2 + n
        q1 = s1 >> 6
        r1 = s1 & 63
        q2 = s2 >> 6
        r2 = s2 & 63
        total = 0
        for i in range(nw):
            total = total + rl_popcount64(a_words[i] & shifted[r1, q1 + i] & shifted[r2, q2 + i])
        counts[d] = total
    return out
