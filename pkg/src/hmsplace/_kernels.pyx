# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled DP tables for the placement and eviction searches."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF UNREACHABLE = 2147483647


def knapsack_suffix(cnp.int64_t[::1] sizes, double[::1] weights, Py_ssize_t capacity):
    cdef Py_ssize_t n = sizes.shape[0]
    cdef Py_ssize_t i, c, s
    cdef double w, cand
    best_w_arr = np.zeros((n + 1, capacity + 1), dtype=np.float64)
    best_s_arr = np.zeros((n + 1, capacity + 1), dtype=np.int64)
    cdef double[:, ::1] bw = best_w_arr
    cdef cnp.int64_t[:, ::1] bs = best_s_arr
    for i in range(n - 1, -1, -1):
        s = sizes[i]
        w = weights[i]
        for c in range(capacity + 1):
            bw[i, c] = bw[i + 1, c]
            bs[i, c] = bs[i + 1, c]
            if s <= c:
                cand = bw[i + 1, c - s] + w
                if cand > bw[i, c] or (cand == bw[i, c] and bs[i + 1, c - s] + s < bs[i, c]):
                    bw[i, c] = cand
                    bs[i, c] = bs[i + 1, c - s] + s
    return best_w_arr, best_s_arr


def subset_min_count(cnp.int64_t[::1] sizes, Py_ssize_t total):
    cdef Py_ssize_t n = sizes.shape[0]
    cdef Py_ssize_t i, t, s
    cdef int cand
    table_arr = np.full((n + 1, total + 1), UNREACHABLE, dtype=np.int32)
    cdef int[:, ::1] tab = table_arr
    tab[n, 0] = 0
    for i in range(n - 1, -1, -1):
        s = sizes[i]
        for t in range(total + 1):
            tab[i, t] = tab[i + 1, t]
            if s <= t and tab[i + 1, t - s] != UNREACHABLE:
                cand = tab[i + 1, t - s] + 1
                if cand < tab[i, t]:
                    tab[i, t] = cand
    return table_arr
