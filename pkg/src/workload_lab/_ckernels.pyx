# cython: language_level=3
"""Compiled kernels. Must stay arithmetically in step with ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef inline double _dist(double[:, ::1] cent, Py_ssize_t i, Py_ssize_t j, Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0, diff
    cdef Py_ssize_t k
    for k in range(d):
        diff = cent[i, k] - cent[j, k]
        acc = acc + diff * diff
    return sqrt(acc)


cdef inline bint _better(double d1, long long lo1, long long hi1,
                         double d2, long long lo2, long long hi2) noexcept nogil:
    if d1 < d2:
        return True
    if d1 > d2:
        return False
    if lo1 != lo2:
        return lo1 < lo2
    return hi1 < hi2


cdef void _scan_row(double[:, ::1] cent, long long[::1] ids, char[::1] active,
                    Py_ssize_t r, Py_ssize_t m, Py_ssize_t d,
                    long long[::1] nn_idx, double[::1] nn_dist) noexcept nogil:
    cdef Py_ssize_t j, best = -1
    cdef double dj, bd = 0.0
    cdef long long lo, hi, blo = 0, bhi = 0
    for j in range(m):
        if j == r or not active[j]:
            continue
        dj = _dist(cent, r, j, d)
        if ids[r] < ids[j]:
            lo = ids[r]
            hi = ids[j]
        else:
            lo = ids[j]
            hi = ids[r]
        if best < 0 or _better(dj, lo, hi, bd, blo, bhi):
            best = j
            bd = dj
            blo = lo
            bhi = hi
    nn_idx[r] = best
    nn_dist[r] = bd


def centroid_linkage(ls_in, weights_in):
    """Weighted-centroid agglomeration. Returns (pairs[int64, m-1 x 2], distances)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ls_arr = np.array(ls_in, dtype=np.float64, order="C", copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.array(weights_in, dtype=np.float64, copy=True)
    cdef Py_ssize_t m = ls_arr.shape[0]
    cdef Py_ssize_t d = ls_arr.shape[1]
    if w_arr.shape[0] != m:
        raise ValueError("weights length does not match entry count")
    pairs_arr = np.zeros((max(m - 1, 0), 2), dtype=np.int64)
    dists_arr = np.zeros(max(m - 1, 0), dtype=np.float64)
    if m <= 1:
        return pairs_arr, dists_arr

    cdef double[:, ::1] ls = ls_arr
    cdef double[::1] w = w_arr
    cdef double[:, ::1] cent = np.empty((m, d), dtype=np.float64)
    cdef long long[::1] ids = np.arange(m, dtype=np.int64)
    cdef char[::1] active = np.ones(m, dtype=np.int8)
    cdef long long[::1] nn_idx = np.full(m, -1, dtype=np.int64)
    cdef double[::1] nn_dist = np.zeros(m, dtype=np.float64)
    cdef long long[:, ::1] pairs = pairs_arr
    cdef double[::1] dists = dists_arr

    cdef Py_ssize_t i, j, k, r, step, a, b
    cdef double dr, bd
    cdef long long lo, hi, blo, bhi, clo, chi, ida, idb

    with nogil:
        for i in range(m):
            for k in range(d):
                cent[i, k] = ls[i, k] / w[i]
        for i in range(m):
            _scan_row(cent, ids, active, i, m, d, nn_idx, nn_dist)

        for step in range(m - 1):
            a = -1
            bd = 0.0
            blo = 0
            bhi = 0
            for i in range(m):
                if not active[i]:
                    continue
                j = nn_idx[i]
                if ids[i] < ids[j]:
                    lo = ids[i]
                    hi = ids[j]
                else:
                    lo = ids[j]
                    hi = ids[i]
                if a < 0 or _better(nn_dist[i], lo, hi, bd, blo, bhi):
                    a = i
                    bd = nn_dist[i]
                    blo = lo
                    bhi = hi
            b = nn_idx[a]
            ida = ids[a]
            idb = ids[b]
            pairs[step, 0] = blo
            pairs[step, 1] = bhi
            dists[step] = bd

            for k in range(d):
                ls[a, k] = ls[a, k] + ls[b, k]
            w[a] = w[a] + w[b]
            for k in range(d):
                cent[a, k] = ls[a, k] / w[a]
            ids[a] = m + step
            active[b] = 0

            for r in range(m):
                if not active[r] or r == a:
                    continue
                if nn_idx[r] == a or nn_idx[r] == b:
                    _scan_row(cent, ids, active, r, m, d, nn_idx, nn_dist)
                    continue
                dr = _dist(cent, r, a, d)
                # ids[a] is the largest id alive, so the pair key is (ids[r], ids[a])
                j = nn_idx[r]
                if ids[r] < ids[j]:
                    clo = ids[r]
                    chi = ids[j]
                else:
                    clo = ids[j]
                    chi = ids[r]
                if _better(dr, ids[r], ids[a], nn_dist[r], clo, chi):
                    nn_idx[r] = a
                    nn_dist[r] = dr
            if step < m - 2:
                _scan_row(cent, ids, active, a, m, d, nn_idx, nn_dist)
    return pairs_arr, dists_arr


def dissimilarity_sums(x_in, labels_in, Py_ssize_t k, int mode, double eps=0.0):
    """Per-sample sums of dissimilarity to every cluster.

    mode 0: Euclidean distance. mode 1: count of coordinates differing by more than eps.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lab_arr = np.ascontiguousarray(labels_in, dtype=np.int64)
    cdef Py_ssize_t n = x_arr.shape[0]
    cdef Py_ssize_t d = x_arr.shape[1]
    if lab_arr.shape[0] != n:
        raise ValueError("labels length does not match sample count")
    out_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] x = x_arr
    cdef long long[::1] lab = lab_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, c
    cdef double acc, diff
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                if mode == 0:
                    for c in range(d):
                        diff = x[i, c] - x[j, c]
                        acc = acc + diff * diff
                    acc = sqrt(acc)
                else:
                    for c in range(d):
                        if fabs(x[i, c] - x[j, c]) > eps:
                            acc = acc + 1.0
                out[i, lab[j]] += acc
                out[j, lab[i]] += acc
    return out_arr
