# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: rolling CoES matrices and the two-segment SSE scan.

Arithmetic in ``breakpoint_scan`` mirrors the pure-Python fallback
operation for operation (left-to-right sums, segment SSEs added last),
so both backends return bit-identical results. The extension is built
with FMA contraction disabled to keep that guarantee.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy

cnp.import_array()

BACKEND_NAME = "cython"


cdef double _kth_smallest(double* buf, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    """Value of the k-th smallest element (1-based) via quickselect."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, target = k - 1
    cdef double pivot, tmp
    while lo < hi:
        pivot = buf[(lo + hi) >> 1]
        i = lo
        j = hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                tmp = buf[i]
                buf[i] = buf[j]
                buf[j] = tmp
                i += 1
                j -= 1
        if target <= j:
            hi = j
        elif target >= i:
            lo = i
        else:
            return buf[target]
    return buf[target]


def rolling_coes_kernel(const double[:, ::1] returns, Py_ssize_t window, Py_ssize_t k):
    """All rolling-window CoES matrices for a (T, N) return panel.

    Returns (coes, var): coes[w, i, j] is the mean of asset i's window
    returns over dates where asset j is at or below its k-th smallest
    window return (= var[w, j]).
    """
    cdef Py_ssize_t T = returns.shape[0]
    cdef Py_ssize_t n = returns.shape[1]
    cdef Py_ssize_t n_out = T - window + 1
    coes_arr = np.empty((n_out, n, n), dtype=np.float64)
    var_arr = np.empty((n_out, n), dtype=np.float64)
    buf_arr = np.empty(window, dtype=np.float64)
    acc_arr = np.empty(n, dtype=np.float64)
    # column-major copy so per-asset window slices are contiguous
    by_asset_arr = np.ascontiguousarray(np.asarray(returns).T)
    cdef double[:, :, ::1] coes = coes_arr
    cdef double[:, ::1] var = var_arr
    cdef double[::1] buf = buf_arr
    cdef double[::1] acc = acc_arr
    cdef double[:, ::1] by_asset = by_asset_arr
    cdef Py_ssize_t w, i, j, s, cnt
    cdef double vj
    with nogil:
        for w in range(n_out):
            for j in range(n):
                memcpy(&buf[0], &by_asset[j, w], window * sizeof(double))
                vj = _kth_smallest(&buf[0], window, k)
                var[w, j] = vj
                cnt = 0
                for i in range(n):
                    acc[i] = 0.0
                for s in range(window):
                    if by_asset[j, w + s] <= vj:
                        cnt += 1
                        for i in range(n):
                            acc[i] += returns[w + s, i]
                for i in range(n):
                    coes[w, i, j] = acc[i] / cnt
    return coes_arr, var_arr


def breakpoint_scan(const double[::1] gaps, Py_ssize_t lo, Py_ssize_t hi):
    """Best two-segment split of ``gaps`` by total within-segment SSE.

    Candidate prefix lengths run over lo..hi inclusive; ties go to the
    smallest split. Returns (split, sse).
    """
    cdef Py_ssize_t m = gaps.shape[0]
    if not (1 <= lo <= hi <= m - 1):
        raise ValueError(f"admissible split range [{lo}, {hi}] invalid for {m} gaps")
    cdef Py_ssize_t best_split = -1
    cdef double best_sse = np.inf
    cdef Py_ssize_t s, i
    cdef double accum, mu1, mu2, sse1, sse2, sse, d
    with nogil:
        for s in range(lo, hi + 1):
            accum = 0.0
            for i in range(s):
                accum += gaps[i]
            mu1 = accum / s
            sse1 = 0.0
            for i in range(s):
                d = gaps[i] - mu1
                sse1 += d * d
            accum = 0.0
            for i in range(s, m):
                accum += gaps[i]
            mu2 = accum / (m - s)
            sse2 = 0.0
            for i in range(s, m):
                d = gaps[i] - mu2
                sse2 += d * d
            sse = sse1 + sse2
            if sse < best_sse:
                best_sse = sse
                best_split = s
    return best_split, best_sse
