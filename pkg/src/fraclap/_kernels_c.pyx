# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sparse kernels: CSR matvec, pivot-free LU row merge, triangular
solves. Mirrors fraclap._kernels_py exactly (same signatures, same
elimination order)."""

import numpy as np

cimport numpy as cnp

from fraclap.errors import PivotBreakdownError

cnp.import_array()

BACKEND = "c"

PIVOT_RTOL = 1e-14

cdef double _PIVOT_RTOL = 1e-14


def csr_matvec(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
               double[::1] data, double[::1] x):
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    out_arr = np.zeros(n_rows)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, p
    cdef double acc
    for i in range(n_rows):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc
    return out_arr


def csr_matvec_t(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                 double[::1] data, double[::1] x, Py_ssize_t n_cols):
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    out_arr = np.zeros(n_cols)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, p
    cdef double xi
    for i in range(n_rows):
        xi = x[i]
        if xi != 0.0:
            for p in range(indptr[i], indptr[i + 1]):
                out[indices[p]] += data[p] * xi
    return out_arr


cdef inline void _heap_push(cnp.int64_t* heap, Py_ssize_t* size, cnp.int64_t v) nogil:
    cdef Py_ssize_t c = size[0]
    cdef Py_ssize_t parent
    cdef cnp.int64_t tmp
    heap[c] = v
    size[0] += 1
    while c > 0:
        parent = (c - 1) >> 1
        if heap[parent] <= heap[c]:
            break
        tmp = heap[parent]
        heap[parent] = heap[c]
        heap[c] = tmp
        c = parent


cdef inline cnp.int64_t _heap_pop(cnp.int64_t* heap, Py_ssize_t* size) nogil:
    cdef cnp.int64_t top = heap[0]
    cdef Py_ssize_t c = 0, child
    cdef cnp.int64_t tmp
    size[0] -= 1
    heap[0] = heap[size[0]]
    while True:
        child = 2 * c + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and heap[child + 1] < heap[child]:
            child += 1
        if heap[c] <= heap[child]:
            break
        tmp = heap[c]
        heap[c] = heap[child]
        heap[child] = tmp
        c = child
    return top


def lu_row_merge(Py_ssize_t n, cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                 double[::1] data, bint allow_singular_last):
    x_arr = np.zeros(n)
    marked_arr = np.zeros(n, dtype=np.uint8)
    heap_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef double[::1] x = x_arr
    cdef cnp.uint8_t[::1] marked = marked_arr
    cdef cnp.int64_t[::1] heap_mv = heap_arr
    cdef cnp.int64_t* heap = &heap_mv[0]

    l_indptr_arr = np.zeros(n + 1, dtype=np.int64)
    u_indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] l_indptr = l_indptr_arr
    cdef cnp.int64_t[::1] u_indptr = u_indptr_arr

    # dynamically grown output buffers
    cdef Py_ssize_t l_cap = max(4 * n, 16), u_cap = max(4 * n, 16)
    l_idx_arr = np.empty(l_cap, dtype=np.int64)
    l_val_arr = np.empty(l_cap)
    u_idx_arr = np.empty(u_cap, dtype=np.int64)
    u_val_arr = np.empty(u_cap)
    cdef cnp.int64_t[::1] l_idx = l_idx_arr
    cdef double[::1] l_val = l_val_arr
    cdef cnp.int64_t[::1] u_idx = u_idx_arr
    cdef double[::1] u_val = u_val_arr
    cdef Py_ssize_t l_len = 0, u_len = 0

    u_diag_arr = np.zeros(n)
    cdef double[::1] u_diag = u_diag_arr

    cdef bint singular = False
    cdef Py_ssize_t i, p, heap_size, us, ue, need
    cdef cnp.int64_t k, j
    cdef double rownorm, m, pivot, av, mag

    for i in range(n):
        rownorm = 0.0
        heap_size = 0
        for p in range(indptr[i], indptr[i + 1]):
            k = indices[p]
            av = data[p]
            x[k] = av
            if not marked[k]:
                marked[k] = 1
                _heap_push(heap, &heap_size, k)
            if av < 0.0:
                av = -av
            if av > rownorm:
                rownorm = av

        # grow L/U buffers enough for this row's worst case (n entries each)
        need = l_len + n + 1
        if need > l_cap:
            while l_cap < need:
                l_cap *= 2
            l_idx_arr = np.resize(l_idx_arr, l_cap)
            l_val_arr = np.resize(l_val_arr, l_cap)
            l_idx = l_idx_arr
            l_val = l_val_arr
        need = u_len + n + 1
        if need > u_cap:
            while u_cap < need:
                u_cap *= 2
            u_idx_arr = np.resize(u_idx_arr, u_cap)
            u_val_arr = np.resize(u_val_arr, u_cap)
            u_idx = u_idx_arr
            u_val = u_val_arr

        while heap_size > 0 and heap[0] < i:
            k = _heap_pop(heap, &heap_size)
            if not marked[k]:
                continue
            marked[k] = 0
            m = x[k] / u_diag[k]
            x[k] = 0.0
            l_idx[l_len] = k
            l_val[l_len] = m
            l_len += 1
            if m != 0.0:
                us = u_indptr[k] + 1  # skip stored diagonal
                ue = u_indptr[k + 1]
                for p in range(us, ue):
                    j = u_idx[p]
                    x[j] -= m * u_val[p]
                    if not marked[j]:
                        marked[j] = 1
                        _heap_push(heap, &heap_size, j)

        # leading remaining index must be the diagonal for a usable pivot
        pivot = 0.0
        if heap_size > 0 and heap[0] == i:
            pivot = x[i]
        mag = pivot if pivot >= 0.0 else -pivot
        if mag < _PIVOT_RTOL * rownorm or rownorm == 0.0:
            if i == n - 1 and allow_singular_last:
                pivot = 0.0
                singular = True
            else:
                raise PivotBreakdownError(i)

        l_idx[l_len] = i
        l_val[l_len] = 1.0
        l_len += 1
        l_indptr[i + 1] = l_len

        u_idx[u_len] = i
        u_val[u_len] = pivot
        u_len += 1
        while heap_size > 0:
            k = _heap_pop(heap, &heap_size)
            if not marked[k]:
                continue
            marked[k] = 0
            if k == i:
                x[k] = 0.0
                continue
            u_idx[u_len] = k
            u_val[u_len] = x[k]
            u_len += 1
            x[k] = 0.0
        u_diag[i] = pivot
        u_indptr[i + 1] = u_len

    return (
        l_indptr_arr,
        l_idx_arr[:l_len].copy(),
        l_val_arr[:l_len].copy(),
        u_indptr_arr,
        u_idx_arr[:u_len].copy(),
        u_val_arr[:u_len].copy(),
        singular,
    )


def solve_lower_unit(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                     double[::1] data, b_arr):
    cdef double[::1] b = b_arr
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    for i in range(n):
        acc = b[i]
        for p in range(indptr[i], indptr[i + 1] - 1):  # last entry is unit diag
            acc -= data[p] * b[indices[p]]
        b[i] = acc
    return b_arr


def solve_upper(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                double[::1] data, b_arr):
    cdef double[::1] b = b_arr
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for p in range(indptr[i] + 1, indptr[i + 1]):  # diagonal stored first
            acc -= data[p] * b[indices[p]]
        b[i] = acc / data[indptr[i]]
    return b_arr
