"""Pure-Python/numpy fallback for the hot sparse kernels.

Same call signatures as the compiled module ``fraclap._kernels_c``; selected
at import time by :mod:`fraclap._backend` when the extension is unavailable
or explicitly disabled.
"""

import heapq

import numpy as np

from fraclap.errors import PivotBreakdownError

BACKEND = "python"

PIVOT_RTOL = 1e-14


def csr_matvec(indptr, indices, data, x):
    """y = A x for CSR arrays; per-row accumulation over ascending columns."""
    n_rows = len(indptr) - 1
    out = np.zeros(n_rows)
    if len(data) == 0:
        return out
    prod = data * x[indices]
    starts = indptr[:-1]
    nonempty = np.flatnonzero(np.diff(indptr) > 0)
    if nonempty.size:
        out[nonempty] = np.add.reduceat(prod, starts[nonempty])
    return out


def csr_matvec_t(indptr, indices, data, x, n_cols):
    """y = A^T x for CSR arrays of A."""
    if len(data) == 0:
        return np.zeros(n_cols)
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    return np.bincount(indices, weights=data * x[rows], minlength=n_cols)


def lu_row_merge(n, indptr, indices, data, allow_singular_last):
    """Row-wise Gaussian elimination without pivoting on a CSR matrix.

    Returns (l_indptr, l_indices, l_data, u_indptr, u_indices, u_data,
    singular) where L is unit lower triangular (unit diagonal stored) and U
    is upper triangular with the diagonal as the first entry of each row.
    Raises PivotBreakdownError on a near-zero pivot at any step but the
    last; at the last step a near-zero pivot is kept as an exact 0.0 when
    ``allow_singular_last`` is set.
    """
    x = np.zeros(n)
    marked = np.zeros(n, dtype=bool)
    u_rows_idx = []
    u_rows_val = []
    l_rows_idx = []
    l_rows_val = []
    u_diag = np.zeros(n)
    singular = False

    for i in range(n):
        s, e = indptr[i], indptr[i + 1]
        cols = indices[s:e]
        vals = data[s:e]
        rownorm = np.max(np.abs(vals)) if e > s else 0.0
        x[cols] = vals
        marked[cols] = True
        heap = list(cols)
        heapq.heapify(heap)

        li = []
        lv = []
        while heap and heap[0] < i:
            k = heapq.heappop(heap)
            if not marked[k]:
                continue
            marked[k] = False
            m = x[k] / u_diag[k]
            x[k] = 0.0
            li.append(k)
            lv.append(m)
            if m != 0.0:
                uj = u_rows_idx[k]
                uv = u_rows_val[k]
                x[uj] -= m * uv
                fresh = uj[~marked[uj]]
                marked[uj] = True
                for j in fresh:
                    heapq.heappush(heap, j)

        # remaining marked indices are >= i and form row i of U
        upper = []
        while heap:
            k = heapq.heappop(heap)
            if marked[k]:
                marked[k] = False
                upper.append(k)
        pivot = x[i] if upper and upper[0] == i else 0.0
        if abs(pivot) < PIVOT_RTOL * rownorm or rownorm == 0.0:
            if i == n - 1 and allow_singular_last:
                pivot = 0.0
                singular = True
            else:
                x[upper] = 0.0
                raise PivotBreakdownError(i)
        offdiag = [j for j in upper if j > i]
        u_rows_idx.append(np.array(offdiag, dtype=np.int64))
        u_rows_val.append(x[offdiag].copy())
        u_diag[i] = pivot
        x[upper] = 0.0

        li.append(i)
        lv.append(1.0)
        l_rows_idx.append(np.array(li, dtype=np.int64))
        l_rows_val.append(np.array(lv))

    l_indptr = np.zeros(n + 1, dtype=np.int64)
    l_indptr[1:] = np.cumsum([len(r) for r in l_rows_idx])
    u_indptr = np.zeros(n + 1, dtype=np.int64)
    u_indptr[1:] = np.cumsum([1 + len(r) for r in u_rows_idx])
    u_indices = np.empty(u_indptr[-1], dtype=np.int64)
    u_data = np.empty(u_indptr[-1])
    for i in range(n):
        s = u_indptr[i]
        u_indices[s] = i
        u_data[s] = u_diag[i]
        e = u_indptr[i + 1]
        u_indices[s + 1 : e] = u_rows_idx[i]
        u_data[s + 1 : e] = u_rows_val[i]
    return (
        l_indptr,
        np.concatenate(l_rows_idx) if n else np.zeros(0, dtype=np.int64),
        np.concatenate(l_rows_val) if n else np.zeros(0),
        u_indptr,
        u_indices,
        u_data,
        singular,
    )


def solve_lower_unit(indptr, indices, data, b):
    """In-place forward substitution with unit lower triangular CSR L."""
    n = len(indptr) - 1
    for i in range(n):
        s, e = indptr[i], indptr[i + 1]
        # last entry of the row is the unit diagonal
        if e - 1 > s:
            b[i] -= np.dot(data[s : e - 1], b[indices[s : e - 1]])
    return b


def solve_upper(indptr, indices, data, b):
    """In-place back substitution with upper triangular CSR U (diagonal first)."""
    n = len(indptr) - 1
    for i in range(n - 1, -1, -1):
        s, e = indptr[i], indptr[i + 1]
        acc = b[i]
        if e > s + 1:
            acc -= np.dot(data[s + 1 : e], b[indices[s + 1 : e]])
        b[i] = acc / data[s]
    return b
