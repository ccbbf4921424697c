# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounded two-constraint knapsack tables (see _dp_fallback)."""
import numpy as np
from libc.math cimport INFINITY


def suffix_tables(costs, values, copies, int capacity, int max_items):
    cdef long long[::1] k_arr = np.ascontiguousarray(costs, dtype=np.int64)
    cdef double[::1] v_arr = np.ascontiguousarray(values, dtype=np.float64)
    cdef long long[::1] c_arr = np.ascontiguousarray(copies, dtype=np.int64)
    cdef Py_ssize_t n = k_arr.shape[0]
    out = np.full((n + 1, capacity + 1, max_items + 1), -np.inf)
    cdef double[:, :, ::1] tab = out
    cdef Py_ssize_t i, b, t, j, jmax, k
    cdef double v, best, prev, cand
    tab[n, 0, 0] = 0.0
    for i in range(n - 1, -1, -1):
        k = k_arr[i]
        v = v_arr[i]
        for b in range(capacity + 1):
            for t in range(max_items + 1):
                best = tab[i + 1, b, t]
                jmax = c_arr[i]
                if jmax > t:
                    jmax = t
                if k > 0 and jmax > b // k:
                    jmax = b // k
                for j in range(1, jmax + 1):
                    prev = tab[i + 1, b - j * k, t - j]
                    if prev == -INFINITY:
                        continue
                    cand = prev + j * v
                    if cand > best:
                        best = cand
                tab[i, b, t] = best
    return out
