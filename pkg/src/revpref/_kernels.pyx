# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics match ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

BACKEND = "cython"


def floyd_warshall(a, double tol):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d_arr = np.array(a, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = d_arr.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] p_arr = np.repeat(
        np.arange(n, dtype=np.int64)[:, None], n, axis=1
    ).copy(order="C")
    cdef double[:, ::1] d = d_arr
    cdef cnp.int64_t[:, ::1] pred = p_arr
    cdef double[::1] col = np.empty(n)
    cdef double[::1] row = np.empty(n)
    cdef cnp.int64_t[::1] prow = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j, k
    cdef double ci, cand
    for k in range(n):
        for i in range(n):
            col[i] = d[i, k]
            row[i] = d[k, i]
            prow[i] = pred[k, i]
        for i in range(n):
            ci = col[i]
            for j in range(n):
                cand = ci + row[j]
                if cand < d[i, j]:
                    d[i, j] = cand
                    pred[i, j] = prow[j]
        for i in range(n):
            if d[i, i] < -tol:
                return d_arr, p_arr, int(k)
    return d_arr, p_arr, -1


def transitive_closure(r):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] c_arr = np.array(r, dtype=bool, copy=True, order="C").view(np.uint8)
    cdef cnp.uint8_t[:, ::1] c = c_arr
    cdef Py_ssize_t n = c_arr.shape[0]
    cdef Py_ssize_t i, j, k
    for k in range(n):
        for i in range(n):
            if c[i, k]:
                for j in range(n):
                    c[i, j] |= c[k, j]
    return c_arr.view(bool)


def hungarian(cost):
    cdef const double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef double[::1] u = np.zeros(n + 1)
    cdef double[::1] v = np.zeros(n + 1)
    cdef double[::1] minv = np.empty(n + 1)
    cdef cnp.int64_t[::1] p = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] way = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.uint8_t[::1] used = np.zeros(n + 1, dtype=np.uint8)
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur, ui0
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(n + 1):
            minv[j] = INFINITY
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INFINITY
            j1 = 0
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = c[i0 - 1, j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assignment = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment, np.asarray(u[1:]).copy(), np.asarray(v[1:]).copy()


cdef bint _next_permutation(cnp.int64_t[::1] a, Py_ssize_t n):
    cdef Py_ssize_t i = n - 2, j, lo, hi
    cdef cnp.int64_t t
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    t = a[i]; a[i] = a[j]; a[j] = t
    lo = i + 1
    hi = n - 1
    while lo < hi:
        t = a[lo]; a[lo] = a[hi]; a[hi] = t
        lo += 1
        hi -= 1
    return True


def brute_force_assignment(cost):
    cdef const double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef cnp.int64_t[::1] perm = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] best = np.arange(n, dtype=np.int64)
    cdef double best_val = INFINITY, total
    cdef Py_ssize_t i
    while True:
        total = c[0, perm[0]]
        for i in range(1, n):
            total += c[i, perm[i]]
        if total < best_val:
            best_val = total
            best[:] = perm
        if not _next_permutation(perm, n):
            break
    return np.asarray(best).copy(), float(best_val)
