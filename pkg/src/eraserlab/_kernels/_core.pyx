# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: inverse-CDF sampling and coincidence matching.

Semantics must match eraserlab._kernels.pure exactly (bit-identical integer
outputs for identical inputs); the pair is cross-checked in the test suite.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _bisect_right(const double* cdf, Py_ssize_t n, double u) noexcept nogil:
    # smallest k with u < cdf[k]; mirrors np.searchsorted(side="right")
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo > n - 1:
        lo = n - 1
    return lo


def categorical_sample(const double[::1] cdf, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = cdf.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _bisect_right(&cdf[0], k, u[i])
    return out


def categorical_sample_rows(const double[:, ::1] cdf_rows, const cnp.int64_t[::1] rows, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = cdf_rows.shape[1]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _bisect_right(&cdf_rows[rows[i], 0], k, u[i])
    return out


def match_nearest(const double[::1] t_upper, const double[::1] t_lower, double window):
    cdef Py_ssize_t n_u = t_upper.shape[0]
    cdef Py_ssize_t n_l = t_lower.shape[0]
    used_arr = np.zeros(n_l, dtype=np.uint8)
    out_u_arr = np.empty(min(n_u, n_l) if n_l < n_u else n_u, dtype=np.int64)
    out_l_arr = np.empty(out_u_arr.shape[0], dtype=np.int64)
    cdef cnp.uint8_t[::1] used = used_arr
    cdef cnp.int64_t[::1] out_u = out_u_arr
    cdef cnp.int64_t[::1] out_l = out_l_arr
    cdef Py_ssize_t i, j, start = 0, best, n_match = 0
    cdef double t, lo, hi, d, best_d
    with nogil:
        for i in range(n_u):
            t = t_upper[i]
            lo = t - window
            hi = t + window
            while start < n_l and (used[start] or t_lower[start] < lo):
                start += 1
            best = -1
            best_d = 0.0
            j = start
            while j < n_l and t_lower[j] <= hi:
                if not used[j]:
                    d = t_lower[j] - t
                    if d < 0:
                        d = -d
                    if best < 0 or d < best_d:
                        best_d = d
                        best = j
                j += 1
            if best >= 0:
                used[best] = 1
                out_u[n_match] = i
                out_l[n_match] = best
                n_match += 1
    return out_u_arr[:n_match].copy(), out_l_arr[:n_match].copy()
